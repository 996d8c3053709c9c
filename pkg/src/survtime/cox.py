"""Linear Cox regression with exact partial likelihood.

The model is h(t|x) = h0(t) * exp(g(x)) with g(x) = beta'x and no
intercept (an intercept would only rescale h0). Fitting minimizes the
negative partial log-likelihood

    loss(g) = sum over event rows i of log sum_{j in R_i} exp(g_j - g_i),

with tied event times handled by letting all events at a time share the
full risk set at that time. The cumulative baseline hazard is then
estimated by summing d_k / sum_{j in R(t_k)} exp(g_j) over distinct event
times t_k, and the full (hazard-based) log-likelihood

    (1/n) sum_i [ D_i log h(T_i|x_i) - H(T_i|x_i) ]

is available for comparing fitted models on a common scale.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from survtime.data import RiskSetIndex, SurvivalDataset, _read_text, _write_text

__all__ = [
    "BaselineHazard",
    "LinearCoxModel",
    "neg_partial_loglik",
    "mean_partial_loglik",
    "fit_newton_raphson",
    "breslow_estimate",
    "full_log_likelihood",
    "baseline_hazard_from_cumulative",
    "CoxDivergenceError",
]


class CoxDivergenceError(RuntimeError):
    """The partial likelihood has no finite minimizer (monotone likelihood)."""


@dataclass(frozen=True)
class BaselineHazard:
    """Cumulative baseline hazard increments at distinct event times."""

    event_times: np.ndarray  # strictly increasing
    increments: np.ndarray  # >= 0
    cumulative: np.ndarray  # running sum of increments

    def __post_init__(self):
        t = np.asarray(self.event_times, dtype=np.float64)
        inc = np.asarray(self.increments, dtype=np.float64)
        cum = np.asarray(self.cumulative, dtype=np.float64)
        if not (t.shape == inc.shape == cum.shape):
            raise ValueError("event_times, increments, cumulative must align")
        if t.size and np.any(np.diff(t) <= 0):
            raise ValueError("event_times must be strictly increasing")
        if np.any(inc < 0):
            raise ValueError("increments must be >= 0")
        if np.max(np.abs(cum - np.cumsum(inc)), initial=0.0) > 1e-12 * max(
            1.0, float(np.max(cum, initial=0.0))
        ):
            raise ValueError("cumulative must be the running sum of increments")
        object.__setattr__(self, "event_times", t)
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "cumulative", cum)

    def cumulative_at(self, times) -> np.ndarray:
        """H0 evaluated as a right-continuous step function, 0 before the
        first event time."""
        times = np.asarray(times, dtype=np.float64)
        idx = np.searchsorted(self.event_times, times, side="right") - 1
        out = np.where(idx >= 0, self.cumulative[np.maximum(idx, 0)], 0.0)
        return out

    def to_csv(self, dest) -> None:
        lines = ["time,increment,cumulative"]
        for t, i, c in zip(self.event_times, self.increments, self.cumulative):
            lines.append(f"{t:.17g},{i:.17g},{c:.17g}")
        _write_text(dest, "\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, source) -> "BaselineHazard":
        reader = csv.reader(io.StringIO(_read_text(source)))
        header = next(reader)
        if [h.strip() for h in header] != ["time", "increment", "cumulative"]:
            raise ValueError("expected header 'time,increment,cumulative'")
        rows = [[float(c) for c in row] for row in reader if row]
        arr = np.asarray(rows, dtype=np.float64).reshape(len(rows), 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])


@dataclass(frozen=True)
class LinearCoxModel:
    beta: np.ndarray
    converged: bool
    final_loss: float


def _suffix_logsumexp(values: np.ndarray) -> np.ndarray:
    """lse[k] = log sum_{j >= k} exp(values[j]), numerically stable."""
    return np.logaddexp.accumulate(values[::-1])[::-1]


def neg_partial_loglik(g_values: np.ndarray, index: RiskSetIndex) -> float:
    """Negative partial log-likelihood of relative risks exp(g)."""
    g = np.asarray(g_values, dtype=np.float64).ravel()
    if g.shape[0] != index.n:
        raise ValueError("g_values length must equal dataset size")
    if not np.all(np.isfinite(g)):
        raise ValueError("g_values must be finite")
    gs = g[index.order]
    lse = _suffix_logsumexp(gs)
    terms = lse[index.risk_start] - gs[index.event_positions]
    return float(terms.sum())


def mean_partial_loglik(g_values: np.ndarray, index: RiskSetIndex) -> float:
    """Partial log-likelihood per event; sign follows the likelihood."""
    n_events = index.event_rows.size
    if n_events == 0:
        raise ValueError("no events")
    return -neg_partial_loglik(g_values, index) / n_events


def _loss_grad_hess(dataset: SurvivalDataset, index: RiskSetIndex,
                    beta: np.ndarray):
    """Analytic value, gradient, and Hessian of the partial-likelihood loss."""
    x = dataset.covariates[index.order]
    eta = x @ beta
    shift = eta.max()
    w = np.exp(eta - shift)
    # suffix sums of w, w*x, w*x x' (reversed cumulative sums)
    s0 = np.cumsum(w[::-1])[::-1]
    s1 = np.cumsum((w[:, None] * x)[::-1], axis=0)[::-1]
    xxt = np.einsum("ij,ik->ijk", x, x)
    s2 = np.cumsum((w[:, None, None] * xxt)[::-1], axis=0)[::-1]

    starts = index.risk_start
    positions = index.event_positions
    loss = float(np.sum(np.log(s0[starts]) + shift - eta[positions]))
    mean1 = s1[starts] / s0[starts, None]
    grad = mean1.sum(axis=0) - x[positions].sum(axis=0)
    hess = (
        s2[starts] / s0[starts, None, None]
        - np.einsum("ij,ik->ijk", mean1, mean1)
    ).sum(axis=0)
    return loss, grad, hess


def fit_newton_raphson(dataset: SurvivalDataset, tol: float = 1e-8,
                       max_iter: int = 50) -> LinearCoxModel:
    """Fit beta by Newton iterations with step halving.

    Raises CoxDivergenceError when ||beta||_inf exceeds 50 during the
    iteration, or when the gradient test passes at an extreme coefficient
    (||beta||_inf > 15, a relative risk above e^15 per covariate unit):
    with a monotone likelihood the score decays like e^{-|beta|}, so it
    underflows any float64 tolerance long before beta reaches the hard
    guard. If max_iter runs out first, the model is returned with
    converged=False.
    """
    if dataset.n_events == 0:
        raise ValueError("no events to fit")
    index = RiskSetIndex(dataset)
    beta = np.zeros(dataset.p)
    loss, grad, hess = _loss_grad_hess(dataset, index, beta)
    converged = False
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad  # singular Hessian: fall back to gradient direction
        scale = 1.0
        accept = loss + 1e-12 * max(1.0, abs(loss))  # a few ulps of slack
        for _ in range(30):
            candidate = beta - scale * step
            new_loss, new_grad, new_hess = _loss_grad_hess(dataset, index, candidate)
            if new_loss <= accept:
                break
            scale *= 0.5
        beta, loss, grad, hess = candidate, new_loss, new_grad, new_hess
        if np.max(np.abs(beta)) > 50.0:
            raise CoxDivergenceError(
                "coefficient magnitude exceeded 50; the partial likelihood "
                "appears monotone (no finite estimate exists)"
            )
    else:
        if np.max(np.abs(grad)) < tol:
            converged = True
    if converged and np.max(np.abs(beta)) > 15.0:
        raise CoxDivergenceError(
            "gradient tolerance reached at an extreme coefficient "
            f"(||beta||_inf = {np.max(np.abs(beta)):.2f}); the partial "
            "likelihood appears monotone (no finite estimate exists)"
        )
    if not converged:
        warnings.warn("Newton-Raphson did not reach tolerance", stacklevel=2)
    return LinearCoxModel(beta=beta, converged=converged, final_loss=loss)


def breslow_estimate(dataset: SurvivalDataset, g_values: np.ndarray) -> BaselineHazard:
    """Cumulative baseline hazard increments d_k / sum_{R(t_k)} exp(g_j)."""
    g = np.asarray(g_values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(g)):
        raise ValueError("g_values must be finite")
    index = RiskSetIndex(dataset)
    gs = g[index.order]
    lse = _suffix_logsumexp(gs)
    starts = index.risk_start  # per event row, position of its tie group
    times, first_idx, counts = np.unique(
        index.sorted_durations[index.event_positions], return_index=True,
        return_counts=True,
    )
    # All events in a tie group share the group-start suffix sum.
    group_starts = starts[first_idx]
    increments = counts * np.exp(-lse[group_starts])
    return BaselineHazard(times, increments, np.cumsum(increments))


def full_log_likelihood(dataset: SurvivalDataset, hazard_at,
                        cum_hazard_at) -> float:
    """Mean of D_i log h(T_i|x_i) - H(T_i|x_i) over the dataset.

    ``hazard_at`` and ``cum_hazard_at`` are vectorized callables mapping
    (durations, covariate matrix) to per-row values.
    """
    t, x, d = dataset.durations, dataset.covariates, dataset.events
    cum = np.asarray(cum_hazard_at(t, x), dtype=np.float64)
    total = -cum.sum()
    event_rows = np.flatnonzero(d == 1)
    if event_rows.size:
        h = np.asarray(hazard_at(t[event_rows], x[event_rows]), dtype=np.float64)
        if np.any(h <= 0):
            raise ValueError("zero hazard at an event time")
        total += np.log(h).sum()
    return float(total) / dataset.n


def baseline_hazard_from_cumulative(baseline: BaselineHazard):
    """Step estimates of h0 by backward differences of the Breslow curve.

    The first gap is measured from t = 0. Returns (event_times, rates).
    Per-event-time gap ratios are extremely noisy (the median of the ratio
    sits near h0/log 2, not h0); prefer smoothed_baseline_rates when the
    rates feed a likelihood.
    """
    t = baseline.event_times
    if t.size < 1:
        raise ValueError("need at least one event time")
    gaps = np.diff(t, prepend=0.0)
    return t, baseline.increments / gaps


def smoothed_baseline_rates(baseline: BaselineHazard, n_windows: int = 100):
    """h0 as a step function of window-averaged slopes of the Breslow curve.

    Differences the cumulative baseline over n_windows equal windows of
    [0, last event time], pooling many increments per window. Returns
    (window_left_edges, rates); evaluate right-continuously.
    """
    if baseline.event_times.size < 1:
        raise ValueError("need at least one event time")
    edges = np.linspace(0.0, float(baseline.event_times[-1]), n_windows + 1)
    cum = baseline.cumulative_at(edges)
    return edges[:-1], np.diff(cum) / np.diff(edges)
