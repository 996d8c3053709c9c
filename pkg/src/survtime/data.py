"""Right-censored survival data: loading, validation, standardization,
splitting, and risk-set indexing.

A record is a covariate vector x, an observed duration T, and an event
indicator D (1 = the event was observed at T, 0 = the record was censored
at T). The risk set of a row i is every row still under observation just
before T_i, with ties at T_i included.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SurvivalDataset",
    "Standardizer",
    "RiskSetIndex",
    "load_csv",
    "write_csv",
    "fit_standardizer",
    "apply_standardizer",
    "split_dataset",
    "build_risk_index",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SurvivalDataset:
    """Covariate matrix with per-row durations and event indicators.

    Immutable after construction; safe to share across threads.
    """

    covariates: np.ndarray  # (n, p) float64
    durations: np.ndarray  # (n,) float64, finite and >= 0
    events: np.ndarray  # (n,) int64, values in {0, 1}
    names: tuple[str, ...] = ()

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.covariates, dtype=np.float64))
        if x.ndim != 2:
            raise ValueError("covariates must be a 2-d matrix")
        t = np.asarray(self.durations, dtype=np.float64).ravel()
        d_raw = np.asarray(self.events, dtype=np.float64).ravel()
        n = x.shape[0]
        if n < 1:
            raise ValueError("empty dataset")
        if t.shape[0] != n or d_raw.shape[0] != n:
            raise ValueError(
                f"row counts differ: covariates {n}, durations {t.shape[0]}, "
                f"events {d_raw.shape[0]}"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("durations must be finite")
        if np.any(t < 0):
            raise ValueError("durations must be >= 0")
        if not np.all((d_raw == 0) | (d_raw == 1)):
            raise ValueError("event indicators must be exactly 0 or 1")
        d = d_raw.astype(np.int64)
        names = tuple(self.names) if self.names else tuple(
            f"x{j}" for j in range(x.shape[1])
        )
        if len(names) != x.shape[1]:
            raise ValueError("one name per covariate column required")
        object.__setattr__(self, "covariates", _readonly(x))
        object.__setattr__(self, "durations", _readonly(t))
        object.__setattr__(self, "events", _readonly(d))
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def n_events(self) -> int:
        return int(self.events.sum())

    def subset(self, rows) -> "SurvivalDataset":
        rows = np.asarray(rows)
        return SurvivalDataset(
            self.covariates[rows], self.durations[rows], self.events[rows], self.names
        )


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine transform (x - mean) / sd fitted on training data.

    Zero-variance columns get sd = 1 so they map to zero instead of
    dividing by zero.
    """

    mean: np.ndarray
    std: np.ndarray


def fit_standardizer(train: SurvivalDataset) -> Standardizer:
    x = train.covariates
    mean = x.mean(axis=0)
    if x.shape[0] > 1:
        std = x.std(axis=0, ddof=1)
    else:
        std = np.zeros(x.shape[1])
    std = np.where(np.isfinite(std) & (std > 0), std, 1.0)
    return Standardizer(mean=_readonly(mean), std=_readonly(std))


def apply_standardizer(s: Standardizer, dataset: SurvivalDataset) -> SurvivalDataset:
    if s.mean.shape[0] != dataset.p:
        raise ValueError(
            f"standardizer has {s.mean.shape[0]} columns, dataset has {dataset.p}"
        )
    z = (dataset.covariates - s.mean) / s.std
    return SurvivalDataset(z, dataset.durations, dataset.events, dataset.names)


# ---------------------------------------------------------------------------
# CSV format: UTF-8, comma separated, header `duration,event,<name>...`,
# decimal point, 17 significant digits on write (bit-exact round trip).
# ---------------------------------------------------------------------------


def load_csv(source) -> SurvivalDataset:
    """Parse a dataset from a path, text/byte stream, or bytes.

    Validation errors name the offending 1-based data row (header excluded).
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty file: missing header row") from None
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0] != "duration" or header[1] != "event":
        missing = {"duration", "event"} - set(header[:2])
        raise ValueError(
            f"missing required column(s) {sorted(missing)}: header must start "
            "with 'duration,event'"
        )
    names = tuple(header[2:])
    p = len(names)

    durations, events, rows = [], [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue
        if len(row) != 2 + p:
            raise ValueError(
                f"row {row_no}: expected {2 + p} fields, found {len(row)}"
            )
        values = []
        for name, cell in zip(header, row):
            try:
                values.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"row {row_no}: non-numeric value {cell!r} in column {name!r}"
                ) from None
        t, d = values[0], values[1]
        if not np.isfinite(t):
            raise ValueError(f"row {row_no}: duration must be finite")
        if t < 0:
            raise ValueError(f"row {row_no}: negative duration {t}")
        if d not in (0.0, 1.0):
            raise ValueError(f"row {row_no}: event value {d} outside {{0, 1}}")
        durations.append(t)
        events.append(int(d))
        rows.append(values[2:])

    if not durations:
        raise ValueError("empty dataset: header present but no data rows")
    x = np.asarray(rows, dtype=np.float64).reshape(len(durations), p)
    return SurvivalDataset(x, np.asarray(durations), np.asarray(events), names)


def write_csv(dataset: SurvivalDataset, dest) -> None:
    """Write a dataset in the canonical CSV format (17 significant digits)."""
    lines = [",".join(("duration", "event") + dataset.names)]
    for i in range(dataset.n):
        cells = [f"{dataset.durations[i]:.17g}", str(int(dataset.events[i]))]
        cells.extend(f"{v:.17g}" for v in dataset.covariates[i])
        lines.append(",".join(cells))
    _write_text(dest, "\n".join(lines) + "\n")


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, bytes):
        return source.decode("utf-8")
    with open(source, "rb") as fh:
        return fh.read().decode("utf-8")


def _write_text(dest, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def split_dataset(
    dataset: SurvivalDataset,
    fractions: tuple[float, float, float],
    seed: int,
) -> tuple[SurvivalDataset, ...]:
    """Disjoint row partition with sizes within +-1 of n * fraction.

    Deterministic for a fixed seed.
    """
    fracs = np.asarray(fractions, dtype=np.float64)
    if np.any(fracs <= 0):
        raise ValueError("fractions must be positive")
    if abs(fracs.sum() - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fracs.sum()}")
    n = dataset.n
    # Largest-remainder apportionment keeps every size within 1 of n*f.
    raw = n * fracs
    counts = np.floor(raw).astype(int)
    remainder = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:remainder]] += 1
    perm = np.random.default_rng(seed).permutation(n)
    parts = []
    start = 0
    for c in counts:
        parts.append(dataset.subset(np.sort(perm[start : start + c])))
        start += c
    return tuple(parts)


class RiskSetIndex:
    """Duration-sorted view of a dataset for O(1) risk-set arithmetic.

    Sorted position k belongs to the tie group starting at
    ``group_start[k]``; the risk set of any row is the suffix of the sorted
    order beginning at its group start (so ties at T_i are at risk, whether
    events or censored).
    """

    def __init__(self, dataset: SurvivalDataset):
        t = dataset.durations
        order = np.argsort(t, kind="stable")
        sorted_t = t[order]
        new_group = np.empty(dataset.n, dtype=bool)
        new_group[0] = True
        new_group[1:] = sorted_t[1:] != sorted_t[:-1]
        group_ids = np.cumsum(new_group) - 1
        starts = np.flatnonzero(new_group)
        self.n = dataset.n
        self.order = _readonly(order)
        self.sorted_durations = _readonly(sorted_t)
        self.sorted_events = _readonly(dataset.events[order])
        self.group_start = _readonly(starts[group_ids])
        # sorted position of each original row
        pos = np.empty(dataset.n, dtype=np.int64)
        pos[order] = np.arange(dataset.n)
        self.position = _readonly(pos)
        self.event_rows = _readonly(np.flatnonzero(dataset.events == 1))
        self.event_positions = _readonly(pos[self.event_rows])
        self.risk_start = _readonly(self.group_start[self.event_positions])

    def risk_set_size(self, row: int) -> int:
        return self.n - int(self.group_start[self.position[row]])

    def enumerate_risk_set(self, row: int) -> np.ndarray:
        """Original row indices {j : T_j >= T_row}."""
        return self.order[self.group_start[self.position[row]] :]


def build_risk_index(dataset: SurvivalDataset) -> RiskSetIndex:
    return RiskSetIndex(dataset)
