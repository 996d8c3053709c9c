"""Closed-form survival-time generators with known truth.

Three scenarios share uniform covariates on [-1, 1]^3, exponential
censoring with rate 1/30, and administrative censoring at time 30:

* ``linear-ph``: h(t|x) = 0.1 * exp(beta'x), beta = [0.44, 0.66, 0.88].
* ``nonlinear-ph``: the linear predictor plus the interaction/quadratic
  term (2/3)(x0^2 + x2^2 + x0*x1 + x0*x2 + x1*x2), same baseline.
* ``nonproportional``: h(t|x) = 0.02 * exp(a(x) + b(x) t) with
  a(x) = g_nl(x) + sign(x2) and b(x) = |0.2 (x0 + x1) + 0.5 x0 x1| >= 0,
  so hazards grow with time and sign(x2) acts as two distinct baselines.

Event times come from the inverse cumulative hazard applied to unit
exponential draws: if V ~ Exp(1) then T* = H^{-1}(V|x) has survival
function exp(-H(t|x)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from survtime.data import SurvivalDataset, RiskSetIndex
from survtime.neural_cox import SurvivalCurve

__all__ = [
    "SimScenario",
    "SimTruth",
    "scenario_by_name",
    "invert_cumhaz",
    "cum_hazard",
    "draw_dataset",
    "true_survival",
    "true_partial_loglik_terms",
]

SCENARIO_NAMES = ("linear-ph", "nonlinear-ph", "nonproportional")


@dataclass(frozen=True)
class SimScenario:
    kind: str
    h0: float
    beta: tuple[float, float, float] = (0.44, 0.66, 0.88)
    censor_hazard: float = 1.0 / 30.0
    admin_censor_time: float = 30.0

    def __post_init__(self):
        if self.kind not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {self.kind!r}; choose from {SCENARIO_NAMES}")
        if self.h0 <= 0 or self.admin_censor_time <= 0:
            raise ValueError("h0 and admin_censor_time must be positive")

    @property
    def n_covariates(self) -> int:
        return 3

    def linear_term(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ np.asarray(self.beta)

    def nonlinear_term(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        x0, x1, x2 = x[:, 0], x[:, 1], x[:, 2]
        return self.linear_term(x) + (2.0 / 3.0) * (
            x0 ** 2 + x2 ** 2 + x0 * x1 + x0 * x2 + x1 * x2
        )

    def a(self, x: np.ndarray) -> np.ndarray:
        """Time-free part of the non-proportional predictor."""
        x = np.atleast_2d(x)
        sign = np.where(x[:, 2] >= 0, 1.0, -1.0)  # sign(0) counts as +1
        return self.nonlinear_term(x) + sign

    def b(self, x: np.ndarray) -> np.ndarray:
        """Slope of the time interaction; non-negative by construction."""
        x = np.atleast_2d(x)
        return np.abs(0.2 * (x[:, 0] + x[:, 1]) + 0.5 * x[:, 0] * x[:, 1])

    def g(self, t, x: np.ndarray) -> np.ndarray:
        """True predictor g(t, x); t is ignored by the proportional kinds."""
        x = np.atleast_2d(x)
        if self.kind == "linear-ph":
            return self.linear_term(x)
        if self.kind == "nonlinear-ph":
            return self.nonlinear_term(x)
        return self.a(x) + self.b(x) * np.asarray(t, dtype=np.float64)


def scenario_by_name(name: str) -> SimScenario:
    if name == "linear-ph":
        return SimScenario(kind=name, h0=0.1)
    if name == "nonlinear-ph":
        return SimScenario(kind=name, h0=0.1)
    if name == "nonproportional":
        return SimScenario(kind=name, h0=0.02)
    raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")


def cum_hazard(scenario: SimScenario, t, x: np.ndarray) -> np.ndarray:
    """H(t|x) in closed form."""
    t = np.asarray(t, dtype=np.float64)
    x = np.atleast_2d(x)
    if scenario.kind != "nonproportional":
        return t * scenario.h0 * np.exp(scenario.g(t, x))
    a, b = scenario.a(x), scenario.b(x)
    rate = scenario.h0 * np.exp(a)
    with np.errstate(invalid="ignore"):
        curved = rate * np.expm1(b * t) / np.where(b > 0, b, 1.0)
    return np.where(b > 0, curved, rate * t)


def invert_cumhaz(scenario: SimScenario, v, x: np.ndarray) -> np.ndarray:
    """T* = H^{-1}(v|x); v must be positive."""
    v = np.asarray(v, dtype=np.float64)
    if np.any(v <= 0):
        raise ValueError("v must be positive")
    x = np.atleast_2d(x)
    if scenario.kind != "nonproportional":
        return v / (scenario.h0 * np.exp(scenario.g(0.0, x)))
    a, b = scenario.a(x), scenario.b(x)
    rate = scenario.h0 * np.exp(a)
    curved = np.log1p(v * np.where(b > 0, b, 1.0) / rate) / np.where(b > 0, b, 1.0)
    return np.where(b > 0, curved, v / rate)  # b -> 0 limit is the flat-hazard form


@dataclass(frozen=True)
class SimTruth:
    """Latent quantities behind a simulated dataset."""

    t_star: np.ndarray  # uncensored event times
    c_star: np.ndarray  # raw censoring times (before the administrative cut)
    g_true: np.ndarray  # true predictor at the observed duration


def draw_dataset(scenario: SimScenario, n: int, seed: int) -> tuple[SurvivalDataset, SimTruth]:
    """Sample n right-censored records plus their hidden truth.

    Ties between event and censoring times resolve to censored.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, scenario.n_covariates))
    v = -np.log1p(-rng.random(n))  # unit exponential via inverse CDF
    t_star = invert_cumhaz(scenario, np.maximum(v, 1e-300), x)
    c_star = -np.log1p(-rng.random(n)) / scenario.censor_hazard
    c_eff = np.minimum(c_star, scenario.admin_censor_time)
    durations = np.minimum(t_star, c_eff)
    events = (t_star < c_eff).astype(np.int64)
    dataset = SurvivalDataset(x, durations, events)
    truth = SimTruth(t_star=t_star, c_star=c_star,
                     g_true=np.asarray(scenario.g(durations, x)))
    return dataset, truth


def true_survival(scenario: SimScenario, x: np.ndarray, grid) -> SurvivalCurve:
    """Exact S(t|x) = exp(-H(t|x)) for one covariate vector on a grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    x = np.atleast_2d(x)
    if x.shape[0] != 1:
        raise ValueError("true_survival expects a single covariate vector")
    surv = np.exp(-cum_hazard(scenario, grid, x))
    return SurvivalCurve(grid=grid, survival=surv)


def true_partial_loglik_terms(dataset: SurvivalDataset, index: RiskSetIndex,
                              scenario: SimScenario):
    """Per-event -log sum_{j in R_i} exp(g(T_i, x_j) - g(T_i, x_i)).

    Returns (event_rows, values) in the dataset's original row indexing.
    The time argument only matters for the non-proportional scenario.
    """
    x_sorted = dataset.covariates[index.order]
    if scenario.kind != "nonproportional":
        g_sorted = np.asarray(scenario.g(0.0, x_sorted))
        lse = np.logaddexp.accumulate(g_sorted[::-1])[::-1]
        values = g_sorted[index.event_positions] - lse[index.risk_start]
        return index.event_rows.copy(), values
    a = scenario.a(x_sorted)
    b = scenario.b(x_sorted)
    t_event = index.sorted_durations[index.event_positions]
    values = np.empty(index.event_rows.size)
    for k, (pos, start, t) in enumerate(
        zip(index.event_positions, index.risk_start, t_event)
    ):
        g_risk = a[start:] + b[start:] * t
        g_case = a[pos] + b[pos] * t
        m = g_risk.max()
        values[k] = g_case - (m + np.log(np.exp(g_risk - m).sum()))
    return index.event_rows.copy(), values
