"""Relative-risk models trained on sampled risk sets.

Instead of summing each event's full risk set, the training loss replaces
R_i by the case plus a few controls drawn uniformly with replacement from
R_i \\ {i}, redrawn every iteration:

    loss = (1/n_events) * sum over cases i of
           log(1 + sum_k exp[g(x_jk) - g(x_i)]).

A constant predictor gives log(m+1); with one control the loss lives in
(0, log 2]. The same loss fits a time-dependent predictor g(t, x) by
feeding the case's duration to the network for the case and all of its
controls, which keeps the cost linear in the number of events. An
optional L1 pull toward zero, lambda * sum |g| over the sampled sets,
regularizes networks whose g is only identified up to location.

Four fitters share this engine: a linear model (readable coefficients), a
proportional MLP, a proportional MLP trained on within-batch partial
likelihood instead of sampling, and the time-dependent MLP. Prediction
composes the fitted baseline hazard with exp(g) into survival curves.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from survtime.cox import BaselineHazard, breslow_estimate, neg_partial_loglik
from survtime.data import RiskSetIndex, SurvivalDataset, build_risk_index
from survtime.nets import AdamState, DenseNet, MLPSpec, adam_update

__all__ = [
    "CCTrainConfig",
    "RelativeRiskModel",
    "SurvivalCurve",
    "sample_controls",
    "cc_loss",
    "risk_penalty",
    "fit_cox_sgd_linear",
    "fit_cox_mlp_cc",
    "fit_cox_mlp_batchpl",
    "fit_cox_time",
    "breslow_time_dependent",
    "predict_survival",
    "predict_survival_matrix",
    "save_model",
    "load_model",
]

LOG_SHIFT_EPS = 1e-8  # duration offset inside the log transform
DEFAULT_BASELINE_SAMPLE = 1000
PATIENCE = 10  # epochs without validation improvement before stopping


@dataclass(frozen=True)
class CCTrainConfig:
    controls_per_case: int = 1
    batch_size: int = 256
    epochs: int = 50
    penalty: float = 0.0
    learning_rate: float = 1e-2
    seed: int = 0
    log_durations: bool = True  # only consulted by the time-dependent fit

    def __post_init__(self):
        if self.controls_per_case < 1:
            raise ValueError("controls_per_case must be >= 1")
        if self.penalty < 0:
            raise ValueError("penalty must be >= 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


@dataclass(frozen=True)
class SurvivalCurve:
    """Step function of survival probabilities on an increasing grid."""

    grid: np.ndarray
    survival: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        s = np.asarray(self.survival, dtype=np.float64)
        if g.shape != s.shape or g.ndim != 1:
            raise ValueError("grid and survival must be equal-length vectors")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(s < -1e-9) or np.any(s > 1 + 1e-9):
            raise ValueError("survival values must lie in [0, 1]")
        if g.size > 1 and np.any(np.diff(s) > 1e-9):
            raise ValueError("survival must be non-increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "survival", s)

    def at(self, times) -> np.ndarray:
        """Step evaluation: value at the largest grid point <= t, 1 before."""
        times = np.asarray(times, dtype=np.float64)
        idx = np.searchsorted(self.grid, times, side="right") - 1
        return np.where(idx >= 0, self.survival[np.maximum(idx, 0)], 1.0)


@dataclass
class RelativeRiskModel:
    kind: str  # 'linear-sgd' | 'mlp-proportional' | 'mlp-time-dependent'
    net: DenseNet
    baseline: BaselineHazard | None = None
    duration_transform: str = "identity"  # 'identity' | 'log'
    history: list = field(default_factory=list)

    @property
    def time_dependent(self) -> bool:
        return self.kind == "mlp-time-dependent"

    @property
    def coefficients(self) -> np.ndarray:
        """First-layer weights of a zero-hidden-layer (linear) network."""
        if self.net.spec.hidden_layers != 0:
            raise ValueError("coefficients are only defined for linear models")
        return self.net.parameters[: self.net.spec.input_dim].copy()

    def g_values(self, x: np.ndarray, times=None) -> np.ndarray:
        """Deterministic g(x) or g(t, x) for a covariate matrix."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.time_dependent:
            if times is None:
                raise ValueError("time-dependent model needs evaluation times")
            t = transform_durations(np.asarray(times, dtype=np.float64),
                                    self.duration_transform)
            t = np.broadcast_to(np.atleast_1d(t), (x.shape[0],))
            x = np.column_stack([t, x])
        return self.net.forward(x, training=False)[:, 0]


def transform_durations(t: np.ndarray, transform: str) -> np.ndarray:
    if transform == "identity":
        return t
    if transform == "log":
        return np.log(t + LOG_SHIFT_EPS)
    raise ValueError(f"unknown duration transform {transform!r}")


# ---------------------------------------------------------------------------
# Loss pieces
# ---------------------------------------------------------------------------


def sample_controls(index: RiskSetIndex, case_row: int, m: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Draw m controls uniformly with replacement from R_case minus the case.

    Returns original row indices. Raises when the case is the only member
    of its risk set, so callers can skip such events.
    """
    pos = int(index.position[case_row])
    if index.sorted_events[pos] != 1:
        raise ValueError("case_row must have an observed event")
    start = int(index.group_start[pos])
    size = index.n - start
    if size < 2:
        raise ValueError("risk set of size 1: no control exists for this case")
    u = rng.integers(0, size - 1, size=m)
    picks = start + u
    picks += picks >= pos  # reserve the case's own slot
    return index.order[picks]


def cc_loss(g_case: float, g_controls) -> float:
    """log(1 + sum_k exp(g_control_k - g_case)), max-shifted for stability.

    The leading 1 is the case's own term (the case belongs to its sampled
    risk set). Strictly positive even when the case dominates.
    """
    diffs = np.asarray(g_controls, dtype=np.float64).ravel() - float(g_case)
    shift = float(diffs.max())
    lse = shift + float(np.log(np.exp(diffs - shift).sum()))
    return float(np.logaddexp(0.0, lse))


def risk_penalty(g_values, penalty_lambda: float) -> float:
    """lambda * sum of |g| over every member of the sampled risk sets."""
    if penalty_lambda < 0:
        raise ValueError("penalty_lambda must be >= 0")
    return penalty_lambda * float(np.abs(np.asarray(g_values)).sum())


def _cc_loss_batch(g_case: np.ndarray, g_controls: np.ndarray):
    """Per-case sampled losses and gradients.

    g_case is (B,), g_controls is (m, B). Returns (losses (B,),
    dloss/dg_case (B,), dloss/dg_controls (m, B)).
    """
    diffs = g_controls - g_case  # (m, B)
    shift = diffs.max(axis=0)
    lse = shift + np.log(np.exp(diffs - shift).sum(axis=0))
    losses = np.logaddexp(0.0, lse)
    p = np.exp(diffs - losses)  # = exp(diff_k) / (1 + sum exp(diffs))
    return losses, -p.sum(axis=0), p


def _epoch_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _fresh_net(spec: MLPSpec, seed: int) -> DenseNet:
    """Linear (zero-hidden) models start at zero, the canonical start for
    the convex linear problem; networks start at the random init."""
    if spec.hidden_layers == 0:
        return DenseNet(spec, parameters=np.zeros(spec.parameter_count()))
    return DenseNet(spec, seed=seed)


# ---------------------------------------------------------------------------
# Shared training engine
# ---------------------------------------------------------------------------


class _EarlyStopper:
    """Patience-based stopping on validation loss; remembers best parameters."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.best_loss = np.inf
        self.best_parameters = None
        self.stale = 0

    def update(self, loss: float, parameters: np.ndarray) -> bool:
        """Record an epoch; returns True when training should stop."""
        if not self.enabled:
            return False
        if loss < self.best_loss - 1e-12:
            self.best_loss = loss
            self.best_parameters = parameters.copy()
            self.stale = 0
        else:
            self.stale += 1
        return self.stale >= PATIENCE

    def restore(self, net: DenseNet) -> None:
        if self.enabled and self.best_parameters is not None:
            net.parameters = self.best_parameters


def _eligible_cases(index: RiskSetIndex):
    """Sorted positions and group starts of events with at least one control."""
    sizes = index.n - index.risk_start
    keep = sizes >= 2
    skipped = int((~keep).sum())
    if skipped:
        warnings.warn(
            f"{skipped} event(s) with singleton risk sets are skipped by the "
            "sampled loss", stacklevel=3,
        )
    return index.event_positions[keep], index.risk_start[keep]


def _fit_sampled(train: SurvivalDataset, val: SurvivalDataset | None,
                 spec: MLPSpec, config: CCTrainConfig,
                 time_dependent: bool, kind: str) -> RelativeRiskModel:
    if train.n_events == 0:
        raise ValueError("training data has no events")
    if val is not None and val.n_events == 0:
        raise ValueError("validation data has no events")
    expected_inputs = train.p + 1 if time_dependent else train.p
    if spec.input_dim != expected_inputs:
        raise ValueError(
            f"network input_dim {spec.input_dim} does not match the expected "
            f"{expected_inputs} for this model"
        )
    transform = "identity"
    if time_dependent:
        if config.log_durations:
            if np.any(train.durations <= 0):
                raise ValueError("log duration transform requires positive durations")
            transform = "log"

    index = build_risk_index(train)
    case_positions, case_starts = _eligible_cases(index)
    if case_positions.size == 0:
        raise ValueError("no event has a non-trivial risk set")
    x_sorted = train.covariates[index.order]
    case_times = transform_durations(
        index.sorted_durations, transform)[case_positions]

    net = _fresh_net(spec, config.seed)
    adam = AdamState(net.parameters.size, learning_rate=config.learning_rate)
    model = RelativeRiskModel(kind=kind, net=net, duration_transform=transform)
    stopper = _EarlyStopper(enabled=val is not None)
    val_index = build_risk_index(val) if val is not None else None
    m = config.controls_per_case

    for epoch in range(config.epochs):
        rng = _epoch_rng(config.seed, epoch)
        perm = rng.permutation(case_positions.size)
        epoch_loss = 0.0
        for lo in range(0, perm.size, config.batch_size):
            chunk = perm[lo : lo + config.batch_size]
            b = chunk.size
            pos = case_positions[chunk]
            starts = case_starts[chunk]
            u = rng.integers(0, index.n - starts - 1, size=(m, b))
            ctrl = starts + u
            ctrl += ctrl >= pos

            x_batch = np.vstack([x_sorted[pos], x_sorted[ctrl.ravel()]])
            if time_dependent:
                t_batch = np.concatenate([case_times[chunk],
                                          np.tile(case_times[chunk], m)])
                x_batch = np.column_stack([t_batch, x_batch])
            z = net.forward(x_batch, training=True, rng=rng)[:, 0]
            g_case, g_ctrl = z[:b], z[b:].reshape(m, b)

            losses, d_case, d_ctrl = _cc_loss_batch(g_case, g_ctrl)
            loss = losses.mean()
            grad_z = np.concatenate([d_case, d_ctrl.ravel()]) / b
            if config.penalty > 0:
                loss += risk_penalty(z, config.penalty) / b
                grad_z = grad_z + config.penalty * np.sign(z) / b
            param_grad = net.backward(grad_z[:, None])
            net.parameters = adam_update(adam, net.parameters, param_grad)
            epoch_loss += losses.sum()

        train_loss = epoch_loss / case_positions.size
        val_loss = _validation_loss(model, val, val_index, config, epoch)
        model.history.append({"epoch": epoch, "train_loss": float(train_loss),
                              "val_loss": val_loss})
        if stopper.update(val_loss if val_loss is not None else np.nan,
                          net.parameters):
            break
    stopper.restore(net)

    if time_dependent:
        model.baseline = _time_dependent_baseline(train, model, config)
    else:
        g_train = net.forward(train.covariates, training=False)[:, 0]
        model.baseline = breslow_estimate(train, g_train)
    return model


def _validation_loss(model: RelativeRiskModel, val, val_index, config, epoch):
    """Mean partial-likelihood loss (proportional) or sampled loss
    (time-dependent) on the validation set."""
    if val is None:
        return None
    if not model.time_dependent:
        g = model.net.forward(val.covariates, training=False)[:, 0]
        return neg_partial_loglik(g, val_index) / val.n_events
    rng = _epoch_rng(config.seed, epoch, 1)
    positions, starts = _eligible_positions_quiet(val_index)
    if positions.size == 0:
        return None
    m = config.controls_per_case
    u = rng.integers(0, val_index.n - starts - 1, size=(m, positions.size))
    ctrl = starts + u
    ctrl += ctrl >= positions
    x_sorted = val.covariates[val_index.order]
    t_case = transform_durations(val_index.sorted_durations,
                                 model.duration_transform)[positions]
    x_batch = np.vstack([x_sorted[positions], x_sorted[ctrl.ravel()]])
    t_batch = np.concatenate([t_case, np.tile(t_case, m)])
    z = model.net.forward(np.column_stack([t_batch, x_batch]), training=False)[:, 0]
    b = positions.size
    losses, _, _ = _cc_loss_batch(z[:b], z[b:].reshape(m, b))
    return float(losses.mean())


def _eligible_positions_quiet(index: RiskSetIndex):
    keep = (index.n - index.risk_start) >= 2
    return index.event_positions[keep], index.risk_start[keep]


def fit_cox_sgd_linear(dataset: SurvivalDataset,
                       config: CCTrainConfig) -> RelativeRiskModel:
    """Linear relative risk (no bias) fitted with the sampled loss.

    Coefficients are readable from ``model.coefficients``.
    """
    spec = MLPSpec(input_dim=dataset.p, hidden_layers=0, output_dim=1)
    model = _fit_sampled(dataset, None, spec, config,
                         time_dependent=False, kind="linear-sgd")
    return model


def fit_cox_mlp_cc(dataset: SurvivalDataset, val_dataset: SurvivalDataset | None,
                   mlp_spec: MLPSpec, config: CCTrainConfig) -> RelativeRiskModel:
    """Proportional MLP relative risk fitted with the sampled loss."""
    kind = "linear-sgd" if mlp_spec.hidden_layers == 0 else "mlp-proportional"
    return _fit_sampled(dataset, val_dataset, mlp_spec, config,
                        time_dependent=False, kind=kind)


def fit_cox_time(dataset: SurvivalDataset, val_dataset: SurvivalDataset | None,
                 mlp_spec: MLPSpec, config: CCTrainConfig) -> RelativeRiskModel:
    """Time-dependent relative risk g(t, x); time is the first network input.

    The case's duration feeds the network for the case and all of its
    controls, so the per-iteration cost stays linear in the batch size.
    """
    return _fit_sampled(dataset, val_dataset, mlp_spec, config,
                        time_dependent=True, kind="mlp-time-dependent")


# ---------------------------------------------------------------------------
# Within-batch partial likelihood (no control sampling)
# ---------------------------------------------------------------------------


def _partial_loglik_value_grad(g: np.ndarray, index: RiskSetIndex):
    """Value and per-row gradient of the partial-likelihood loss."""
    gs = g[index.order]
    shift = gs.max()
    lse = np.logaddexp.accumulate((gs - shift)[::-1])[::-1] + shift
    value = float((lse[index.risk_start] - gs[index.event_positions]).sum())
    # dloss/dg_j = exp(g_j) * sum over events e with start_e <= j of
    # exp(-lse_e), minus 1 for event rows.
    weights = np.zeros(index.n)
    np.add.at(weights, index.risk_start, np.exp(-(lse[index.risk_start] - shift)))
    grad_sorted = np.exp(gs - shift) * np.cumsum(weights)
    grad_sorted[index.event_positions] -= 1.0
    grad = np.empty_like(grad_sorted)
    grad[index.order] = grad_sorted
    return value, grad


def fit_cox_mlp_batchpl(dataset: SurvivalDataset, val_dataset: SurvivalDataset | None,
                        mlp_spec: MLPSpec, config: CCTrainConfig) -> RelativeRiskModel:
    """Proportional MLP trained on the partial likelihood of each batch.

    Every batch forms its own risk sets from the rows it contains; a batch
    without events is skipped. With batch_size >= n the loss coincides
    with the full negative partial log-likelihood.
    """
    if dataset.n_events == 0:
        raise ValueError("training data has no events")
    if config.batch_size < 2:
        raise ValueError("batch_size must be >= 2")
    if mlp_spec.input_dim != dataset.p:
        raise ValueError(
            f"network input_dim {mlp_spec.input_dim} does not match p={dataset.p}"
        )
    net = _fresh_net(mlp_spec, config.seed)
    adam = AdamState(net.parameters.size, learning_rate=config.learning_rate)
    kind = "linear-sgd" if mlp_spec.hidden_layers == 0 else "mlp-proportional"
    model = RelativeRiskModel(kind=kind, net=net)
    stopper = _EarlyStopper(enabled=val_dataset is not None)
    val_index = build_risk_index(val_dataset) if val_dataset is not None else None

    for epoch in range(config.epochs):
        rng = _epoch_rng(config.seed, epoch)
        perm = rng.permutation(dataset.n)
        epoch_loss = 0.0
        epoch_events = 0
        for lo in range(0, dataset.n, config.batch_size):
            rows = perm[lo : lo + config.batch_size]
            batch = dataset.subset(rows)
            if batch.n_events == 0:
                continue
            batch_index = build_risk_index(batch)
            z = net.forward(batch.covariates, training=True, rng=rng)[:, 0]
            value, grad_g = _partial_loglik_value_grad(z, batch_index)
            param_grad = net.backward(grad_g[:, None])
            net.parameters = adam_update(adam, net.parameters, param_grad)
            epoch_loss += value
            epoch_events += batch.n_events
        train_loss = epoch_loss / max(epoch_events, 1)
        if val_dataset is not None:
            g_val = net.forward(val_dataset.covariates, training=False)[:, 0]
            val_loss = neg_partial_loglik(g_val, val_index) / val_dataset.n_events
        else:
            val_loss = None
        model.history.append({"epoch": epoch, "train_loss": float(train_loss),
                              "val_loss": val_loss})
        if stopper.update(val_loss if val_loss is not None else np.nan,
                          net.parameters):
            break
    stopper.restore(net)
    g_train = net.forward(dataset.covariates, training=False)[:, 0]
    model.baseline = breslow_estimate(dataset, g_train)
    return model


# ---------------------------------------------------------------------------
# Baseline hazard and prediction
# ---------------------------------------------------------------------------


def breslow_time_dependent(train_subsample: SurvivalDataset,
                           model: RelativeRiskModel) -> BaselineHazard:
    """Baseline increments d_k / sum_{j at risk} exp(g(t_k, x_j)).

    Re-evaluates the network at every distinct event time for every
    at-risk row, so the work grows quadratically with the subsample size;
    callers control cost through the subsample.
    """
    if not model.time_dependent:
        raise ValueError("model is not time-dependent")
    if train_subsample.n == 0:
        raise ValueError("empty subsample")
    index = build_risk_index(train_subsample)
    if index.event_rows.size == 0:
        raise ValueError("subsample has no events")
    x_sorted = train_subsample.covariates[index.order]
    event_t = index.sorted_durations[index.event_positions]
    times, first_idx, counts = np.unique(event_t, return_index=True,
                                         return_counts=True)
    starts = index.risk_start[first_idx]
    t_in = transform_durations(times, model.duration_transform)
    increments = np.empty(times.size)
    for k in range(times.size):
        x_risk = x_sorted[starts[k]:]
        g = model.net.forward(
            np.column_stack([np.full(x_risk.shape[0], t_in[k]), x_risk]),
            training=False,
        )[:, 0]
        shift = g.max()
        increments[k] = counts[k] * np.exp(
            -(shift + np.log(np.exp(g - shift).sum()))
        )
    return BaselineHazard(times, increments, np.cumsum(increments))


def _time_dependent_baseline(train, model, config,
                             sample_size: int | None = None) -> BaselineHazard:
    size = min(train.n, sample_size or DEFAULT_BASELINE_SAMPLE)
    rng = _epoch_rng(config.seed, 0xBA5E)
    rows = rng.choice(train.n, size=size, replace=False)
    sub = train.subset(np.sort(rows))
    if sub.n_events == 0:  # tiny subsample without events: use everything
        sub = train
    return breslow_time_dependent(sub, model)


def _survival_on_knots(model: RelativeRiskModel, x: np.ndarray) -> np.ndarray:
    """S at the baseline's event times for each row of x; shape (n, knots)."""
    baseline = model.baseline
    if baseline is None:
        raise ValueError("model has no baseline hazard")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not model.time_dependent:
        g = model.net.forward(x, training=False)[:, 0]
        cum = np.outer(np.exp(g), baseline.cumulative)
        return np.exp(-cum)
    t_in = transform_durations(baseline.event_times, model.duration_transform)
    rel = np.empty((x.shape[0], t_in.size))
    for k in range(t_in.size):
        g = model.net.forward(
            np.column_stack([np.full(x.shape[0], t_in[k]), x]), training=False
        )[:, 0]
        rel[:, k] = baseline.increments[k] * np.exp(g)
    return np.exp(-np.cumsum(rel, axis=1))


def predict_survival_matrix(model: RelativeRiskModel, x: np.ndarray,
                            grid) -> np.ndarray:
    """Survival at grid times for each row of x; shape (n_rows, len(grid)).

    Step evaluation uses the value at the largest event time <= t and 1
    before the first event time.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    knots = model.baseline.event_times if model.baseline is not None else None
    surv = _survival_on_knots(model, x)
    idx = np.searchsorted(knots, grid, side="right") - 1
    out = np.ones((surv.shape[0], grid.size))
    inside = idx >= 0
    out[:, inside] = surv[:, idx[inside]]
    return out


def predict_survival(model: RelativeRiskModel, x: np.ndarray, grid) -> SurvivalCurve:
    """Survival curve for a single covariate vector on the requested grid."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[0] != 1:
        raise ValueError("predict_survival expects a single covariate vector; "
                         "use predict_survival_matrix for batches")
    surv = predict_survival_matrix(model, x, grid)[0]
    return SurvivalCurve(grid=np.asarray(grid, dtype=np.float64), survival=surv)


# ---------------------------------------------------------------------------
# Persistence: JSON with the network spec, flat parameters, duration
# transform, and the baseline table.
# ---------------------------------------------------------------------------


def save_model(model: RelativeRiskModel, dest) -> None:
    spec = model.net.spec
    doc = {
        "kind": model.kind,
        "spec": {
            "input_dim": spec.input_dim,
            "hidden_layers": spec.hidden_layers,
            "nodes_per_layer": spec.nodes_per_layer,
            "dropout_rate": spec.dropout_rate,
            "output_dim": spec.output_dim,
        },
        "parameters": [float(v) for v in model.net.parameters],
        "duration_transform": model.duration_transform,
        "baseline": None,
    }
    if model.baseline is not None:
        doc["baseline"] = {
            "event_times": [float(v) for v in model.baseline.event_times],
            "increments": [float(v) for v in model.baseline.increments],
            "cumulative": [float(v) for v in model.baseline.cumulative],
        }
    text = json.dumps(doc)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_model(source) -> RelativeRiskModel:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if doc.get("kind") not in ("linear-sgd", "mlp-proportional",
                               "mlp-time-dependent"):
        raise ValueError(f"not a relative-risk model file: kind={doc.get('kind')!r}")
    net = DenseNet(MLPSpec(**doc["spec"]), parameters=np.asarray(doc["parameters"]))
    baseline = None
    if doc.get("baseline") is not None:
        b = doc["baseline"]
        baseline = BaselineHazard(
            np.asarray(b["event_times"]), np.asarray(b["increments"]),
            np.asarray(b["cumulative"]),
        )
    return RelativeRiskModel(kind=doc["kind"], net=net, baseline=baseline,
                             duration_transform=doc["duration_transform"])
