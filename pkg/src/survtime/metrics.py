"""Censoring-aware evaluation of survival predictions.

All metrics weight by the Kaplan-Meier estimate G of the censoring
survival function (fit by flipping the event indicator). The Brier score
at a horizon t is

    BS(t) = (1/N) sum_i [ S(t|x_i)^2 1{T_i <= t, D_i = 1} / G(T_i-)
                        + (1 - S(t|x_i))^2 1{T_i > t} / G(t) ],

the binomial log-likelihood replaces the squared errors with
log(1 - S(t|x_i)) and log(S(t|x_i)) on clipped probabilities, and both
integrate over a horizon interval by the trapezoid rule. Terms whose
weight would divide by G = 0 are dropped, with N reduced to match, and a
warning reports how many.

The time-dependent concordance scores ordered pairs (i, j) that are
comparable, meaning D_i = 1 and either T_i < T_j, or T_i = T_j with j
censored: a pair counts 1 when S(T_i|x_i) < S(T_i|x_j), 0.5 on predicted
ties, else 0. Pairs of tied event times with both events count 1 when the
predictions tie and 0.5 otherwise, so a predictor constant in x scores
exactly 0.5 on data with unique event times.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from survtime.data import SurvivalDataset

__all__ = [
    "StepFunction",
    "kaplan_meier",
    "censoring_km",
    "c_td",
    "brier_score_at",
    "binomial_ll_at",
    "integrate_score",
]

CLIP_EPS = 1e-7  # survival clipping inside the log-likelihood


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function equal to 1 before the first knot."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if k.shape != v.shape or k.ndim != 1:
            raise ValueError("knots and values must be equal-length vectors")
        if k.size > 1 and np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def at(self, times) -> np.ndarray:
        """Value at the largest knot <= t (1 when t precedes all knots)."""
        times = np.asarray(times, dtype=np.float64)
        idx = np.searchsorted(self.knots, times, side="right") - 1
        return np.where(idx >= 0, self.values[np.maximum(idx, 0)], 1.0)

    def before(self, times) -> np.ndarray:
        """Left limit: value at the largest knot strictly below t."""
        times = np.asarray(times, dtype=np.float64)
        idx = np.searchsorted(self.knots, times, side="left") - 1
        return np.where(idx >= 0, self.values[np.maximum(idx, 0)], 1.0)


def kaplan_meier(durations, events) -> StepFunction:
    """Product-limit estimate of P(T* > t) from right-censored data."""
    t = np.asarray(durations, dtype=np.float64)
    d = np.asarray(events)
    if t.size < 1:
        raise ValueError("need at least one observation")
    order = np.argsort(t, kind="stable")
    ts, ds = t[order], d[order]
    event_times, n_events = np.unique(ts[ds == 1], return_counts=True)
    if event_times.size == 0:
        return StepFunction(np.asarray([np.inf]), np.asarray([1.0]))
    # at-risk counts: everyone with T >= t_k
    at_risk = t.size - np.searchsorted(ts, event_times, side="left")
    surv = np.cumprod(1.0 - n_events / at_risk)
    return StepFunction(event_times, surv)


def censoring_km(dataset: SurvivalDataset) -> StepFunction:
    """Kaplan-Meier estimate of the censoring survival P(C* > t)."""
    return kaplan_meier(dataset.durations, 1 - dataset.events)


def c_td(durations, events, surv_at_event_times) -> float:
    """Time-dependent concordance over comparable pairs.

    ``surv_at_event_times[a, b]`` must hold S(T_a | x_b); only rows a with
    an event are consulted.
    """
    t = np.asarray(durations, dtype=np.float64)
    d = np.asarray(events)
    s = np.asarray(surv_at_event_times, dtype=np.float64)
    n = t.size
    if s.shape != (n, n):
        raise ValueError(f"survival matrix must be {n}x{n}, got {s.shape}")
    event_rows = np.flatnonzero(d == 1)
    score = 0.0
    pairs = 0
    for lo in range(0, event_rows.size, 256):
        idx = event_rows[lo : lo + 256]
        s_own = s[idx, idx][:, None]  # S(T_i | x_i)
        s_other = s[idx, :]  # S(T_i | x_j)
        t_i = t[idx][:, None]
        later = t[None, :] > t_i
        tied_censored = (t[None, :] == t_i) & (d[None, :] == 0)
        ordered = later | tied_censored
        score += np.where(ordered, (s_own < s_other) + 0.5 * (s_own == s_other),
                          0.0).sum()
        tied_events = (t[None, :] == t_i) & (d[None, :] == 1)
        tied_events[np.arange(idx.size), idx] = False
        score += np.where(tied_events, (s_own == s_other) + 0.5 * (s_own != s_other),
                          0.0).sum()
        pairs += int(ordered.sum()) + int(tied_events.sum())
    if pairs == 0:
        raise ValueError("no comparable pairs")
    return score / pairs


def _ipcw_pieces(t_eval: float, dataset: SurvivalDataset, surv_at_t,
                 censor_km: StepFunction):
    """Weighted event/survivor terms shared by the Brier score and the
    log-likelihood. Returns masks, weights, and the effective N."""
    t = dataset.durations
    d = dataset.events
    s = np.asarray(surv_at_t, dtype=np.float64).ravel()
    if s.size != dataset.n:
        raise ValueError("survival_at_t must have one value per row")
    g_before = censor_km.before(t)
    g_at = float(censor_km.at(t_eval))
    past_event = (t <= t_eval) & (d == 1)
    future = t > t_eval
    drop_past = past_event & (g_before <= 0)
    drop_future = future & (g_at <= 0)
    dropped = int(drop_past.sum() + drop_future.sum())
    if dropped:
        warnings.warn(
            f"{dropped} term(s) dropped at t={t_eval}: censoring survival is 0",
            stacklevel=3,
        )
    past_event &= ~drop_past
    future &= ~drop_future
    n_eff = dataset.n - dropped
    return s, past_event, future, g_before, g_at, n_eff


def brier_score_at(t: float, dataset: SurvivalDataset, survival_at_t,
                   censor_km: StepFunction) -> float:
    """Inverse-censoring-weighted squared error of S(t|x) as a classifier."""
    s, past_event, future, g_before, g_at, n_eff = _ipcw_pieces(
        t, dataset, survival_at_t, censor_km)
    if n_eff <= 0:
        raise ValueError("every term was dropped")
    total = float((s[past_event] ** 2 / g_before[past_event]).sum())
    total += float(((1.0 - s[future]) ** 2).sum() / g_at) if future.any() else 0.0
    return total / n_eff


def binomial_ll_at(t: float, dataset: SurvivalDataset, survival_at_t,
                   censor_km: StepFunction) -> float:
    """Inverse-censoring-weighted log-likelihood of S(t|x); always <= 0."""
    s, past_event, future, g_before, g_at, n_eff = _ipcw_pieces(
        t, dataset, survival_at_t, censor_km)
    if n_eff <= 0:
        raise ValueError("every term was dropped")
    s = np.clip(s, CLIP_EPS, 1.0 - CLIP_EPS)
    total = float((np.log(1.0 - s[past_event]) / g_before[past_event]).sum())
    total += float(np.log(s[future]).sum() / g_at) if future.any() else 0.0
    return total / n_eff


def integrate_score(score, t1: float, t2: float, grid_points: int = 100) -> float:
    """Trapezoid average of a score over [t1, t2] on an equidistant grid."""
    if not t1 < t2:
        raise ValueError("need t1 < t2")
    ts = np.linspace(t1, t2, grid_points)
    values = np.asarray([score(t) for t in ts], dtype=np.float64)
    return float(np.trapezoid(values, ts) / (t2 - t1))
