"""Discrete-time survival baseline: a softmax pmf over a fixed time grid.

Durations are snapped to the nearest point of an equidistant grid
tau_0 = 0 < tau_1 < ... < tau_m. A network with m+1 softmax outputs
models the probability mass y_j(x) of the event landing on tau_j, and
survival follows as S(tau_j|x) = 1 - sum_{k=1..j} y_k(x). Training
combines the discrete negative log-likelihood with a pairwise ranking
term,

    loss = alpha * loss_L + (1 - alpha) * loss_rank,
    loss_rank = sum_{i,j} D_i 1{T_i < T_j}
                exp[(S(T_i|x_i) - S(T_i|x_j)) / sigma],

so alpha = 1 trains purely on likelihood and alpha = 0 purely on ranking.
Only a single event type is supported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from survtime.data import SurvivalDataset
from survtime.nets import AdamState, DenseNet, MLPSpec, adam_update
from survtime.neural_cox import _EarlyStopper, _epoch_rng

__all__ = [
    "DiscreteTimeGrid",
    "DeepHitModel",
    "discretize",
    "pmf_to_survival",
    "deephit_loss",
    "fit_deephit",
    "save_deephit",
    "load_deephit",
]

LOG_FLOOR = 1e-7  # probabilities are clipped here before taking logs


@dataclass(frozen=True)
class DiscreteTimeGrid:
    """Equidistant grid tau_0 = 0 < ... < tau_m."""

    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.float64)
        if tau.size < 2:
            raise ValueError("grid needs at least two points")
        if tau[0] != 0.0:
            raise ValueError("grid must start at 0")
        gaps = np.diff(tau)
        if np.any(gaps <= 0):
            raise ValueError("grid must be increasing")
        if np.max(np.abs(gaps - gaps[0])) > 1e-9 * max(1.0, tau[-1]):
            raise ValueError("grid must be equidistant")
        object.__setattr__(self, "tau", tau)

    @property
    def m(self) -> int:
        return self.tau.size - 1

    @classmethod
    def from_durations(cls, durations, m: int) -> "DiscreteTimeGrid":
        durations = np.asarray(durations, dtype=np.float64)
        top = float(durations.max())
        if top <= 0:
            raise ValueError("maximum duration must be positive")
        return cls(np.linspace(0.0, top, m + 1))


def discretize(durations, grid: DiscreteTimeGrid) -> np.ndarray:
    """Nearest grid index per duration; midpoints break down, ends clamp."""
    t = np.asarray(durations, dtype=np.float64)
    h = grid.tau[1] - grid.tau[0]
    idx = np.ceil(t / h - 0.5)  # round half down
    return np.clip(idx, 0, grid.m).astype(np.int64)


def pmf_to_survival(y: np.ndarray) -> np.ndarray:
    """S(tau_j) = 1 - sum_{k=1..j} y_k for j = 1..m; y_0 is never subtracted."""
    y = np.asarray(y, dtype=np.float64)
    if abs(y.sum() - 1.0) > 1e-9:
        raise ValueError("pmf must sum to 1")
    return 1.0 - np.cumsum(y[1:])


def _survival_table(pmf: np.ndarray) -> np.ndarray:
    """S at every grid index for a batch: column 0 is 1."""
    pmf = np.atleast_2d(pmf)
    s = np.ones_like(pmf)
    s[:, 1:] = 1.0 - np.cumsum(pmf[:, 1:], axis=1)
    return s


def deephit_loss(pmf: np.ndarray, event_idx: np.ndarray, events: np.ndarray,
                 alpha: float, sigma: float) -> float:
    """Convex combination of discrete NLL and the pairwise ranking sum."""
    value, _ = _deephit_loss_grad(pmf, event_idx, events, alpha, sigma)
    return value


def _deephit_loss_grad(pmf: np.ndarray, event_idx: np.ndarray,
                       events: np.ndarray, alpha: float, sigma: float):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    pmf = np.atleast_2d(np.asarray(pmf, dtype=np.float64))
    e = np.asarray(event_idx, dtype=np.int64)
    d = np.asarray(events, dtype=np.float64)
    b, width = pmf.shape
    rows = np.arange(b)
    surv = _survival_table(pmf)

    y_at_e = pmf[rows, e]
    s_at_e = surv[rows, e]
    nll = -(d * np.log(np.maximum(y_at_e, LOG_FLOOR))
            + (1.0 - d) * np.log(np.maximum(s_at_e, LOG_FLOOR))).sum()

    # dL/dS accumulator over the survival table, plus the direct pmf term.
    grad_s = np.zeros_like(surv)
    grad_y = np.zeros_like(pmf)
    ev = d == 1.0
    live_y = ev & (y_at_e > LOG_FLOOR)
    grad_y[rows[live_y], e[live_y]] -= alpha / y_at_e[live_y]
    live_s = (~ev) & (s_at_e > LOG_FLOOR)
    grad_s[rows[live_s], e[live_s]] -= alpha / s_at_e[live_s]

    # ranking: pairs (i, j) with D_i = 1 and e_i < e_j
    s_cross = surv[:, e]  # s_cross[j, i] = S(tau_{e_i} | x_j)
    diff = (s_at_e[:, None] - s_cross.T) / sigma  # (i, j)
    w = np.where(ev[:, None] & (e[:, None] < e[None, :]), np.exp(diff), 0.0)
    rank = float(w.sum())
    if alpha < 1.0:
        scale = (1.0 - alpha) / sigma
        np.add.at(grad_s, (rows, e), scale * w.sum(axis=1))
        j_mat = np.broadcast_to(rows, (b, b))
        e_mat = np.broadcast_to(e[:, None], (b, b))
        np.add.at(grad_s, (j_mat.ravel(), e_mat.ravel()), (-scale * w).ravel())

    # S(tau_j) depends on y_k with -1 for 1 <= k <= j.
    suffix = np.cumsum(grad_s[:, ::-1], axis=1)[:, ::-1]
    grad_y[:, 1:] -= suffix[:, 1:]
    return float(alpha * nll + (1.0 - alpha) * rank), grad_y


@dataclass
class DeepHitModel:
    grid: DiscreteTimeGrid
    net: DenseNet
    alpha: float
    sigma: float
    history: list = field(default_factory=list)
    kind: str = "deephit"

    @property
    def time_dependent(self) -> bool:
        return False  # predictions come straight from the pmf grid

    def pmf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        logits = self.net.forward(x, training=False)
        shifted = logits - logits.max(axis=1, keepdims=True)
        expz = np.exp(shifted)
        return expz / expz.sum(axis=1, keepdims=True)

    def survival_matrix(self, x: np.ndarray, grid) -> np.ndarray:
        """Step-function survival on arbitrary times; shape (rows, len(grid))."""
        grid = np.asarray(grid, dtype=np.float64)
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be increasing")
        table = _survival_table(self.pmf(x))
        idx = np.searchsorted(self.grid.tau, grid, side="right") - 1
        out = np.ones((table.shape[0], grid.size))
        inside = idx >= 0
        out[:, inside] = table[:, idx[inside]]
        return out


def fit_deephit(dataset: SurvivalDataset, val_dataset: SurvivalDataset | None,
                mlp_spec: MLPSpec, m: int, alpha: float, sigma: float,
                config) -> DeepHitModel:
    """Train the pmf network with Adam on the combined loss.

    ``config`` is a CCTrainConfig; its control-sampling fields are unused
    here, only batch_size, epochs, learning_rate, and seed apply.
    """
    if dataset.n_events == 0:
        raise ValueError("training data has no events")
    if m < 2:
        raise ValueError("need at least 2 grid intervals")
    grid = DiscreteTimeGrid.from_durations(dataset.durations, m)
    spec = replace(mlp_spec, input_dim=dataset.p, output_dim=m + 1)
    net = DenseNet(spec, seed=config.seed)
    adam = AdamState(net.parameters.size, learning_rate=config.learning_rate)
    model = DeepHitModel(grid=grid, net=net, alpha=alpha, sigma=sigma)
    stopper = _EarlyStopper(enabled=val_dataset is not None)

    e_train = discretize(dataset.durations, grid)
    d_train = dataset.events.astype(np.float64)
    if val_dataset is not None:
        e_val = discretize(val_dataset.durations, grid)

    for epoch in range(config.epochs):
        rng = _epoch_rng(config.seed, epoch)
        perm = rng.permutation(dataset.n)
        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, dataset.n, config.batch_size):
            rows = perm[lo : lo + config.batch_size]
            logits = net.forward(dataset.covariates[rows], training=True, rng=rng)
            shifted = logits - logits.max(axis=1, keepdims=True)
            expz = np.exp(shifted)
            pmf = expz / expz.sum(axis=1, keepdims=True)
            value, grad_y = _deephit_loss_grad(pmf, e_train[rows], d_train[rows],
                                               alpha, sigma)
            inner = (grad_y * pmf).sum(axis=1, keepdims=True)
            grad_logits = pmf * (grad_y - inner)
            net.parameters = adam_update(adam, net.parameters,
                                         net.backward(grad_logits))
            epoch_loss += value / rows.size
            n_batches += 1
        train_loss = epoch_loss / max(n_batches, 1)
        if val_dataset is not None:
            val_loss = deephit_loss(model.pmf(val_dataset.covariates), e_val,
                                    val_dataset.events, alpha, sigma) / val_dataset.n
        else:
            val_loss = None
        model.history.append({"epoch": epoch, "train_loss": float(train_loss),
                              "val_loss": val_loss})
        if stopper.update(val_loss if val_loss is not None else np.nan,
                          net.parameters):
            break
    stopper.restore(net)
    return model


def save_deephit(model: DeepHitModel, dest) -> None:
    spec = model.net.spec
    doc = {
        "kind": "deephit",
        "grid": [float(v) for v in model.grid.tau],
        "alpha": model.alpha,
        "sigma": model.sigma,
        "spec": {
            "input_dim": spec.input_dim,
            "hidden_layers": spec.hidden_layers,
            "nodes_per_layer": spec.nodes_per_layer,
            "dropout_rate": spec.dropout_rate,
            "output_dim": spec.output_dim,
        },
        "parameters": [float(v) for v in model.net.parameters],
    }
    text = json.dumps(doc)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_deephit(source) -> DeepHitModel:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if doc.get("kind") != "deephit":
        raise ValueError(f"not a deephit model file: kind={doc.get('kind')!r}")
    net = DenseNet(MLPSpec(**doc["spec"]), parameters=np.asarray(doc["parameters"]))
    return DeepHitModel(grid=DiscreteTimeGrid(np.asarray(doc["grid"])), net=net,
                        alpha=doc["alpha"], sigma=doc["sigma"])
