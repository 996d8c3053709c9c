"""K-means segmentation of predicted survival curves.

Each individual's curve is sampled on a shared equidistant grid and the
resulting vectors are clustered with Lloyd's algorithm under Euclidean
distance, seeded k-means++ style. Cluster proportions summarize how the
population splits into risk profiles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["CurveMatrix", "KMeansResult", "curves_to_matrix", "kmeans_curves"]


@dataclass(frozen=True)
class CurveMatrix:
    """One survival vector per individual on a shared grid from 0."""

    grid: np.ndarray  # (m+1,) equidistant, starts at 0
    values: np.ndarray  # (n, m+1), rows start at 1, non-increasing in [0, 1]

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        v = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if g.ndim != 1 or v.shape[1] != g.size:
            raise ValueError("values must have one column per grid point")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be increasing")
        if np.any(v < -1e-9) or np.any(v > 1 + 1e-9):
            raise ValueError("survival values must lie in [0, 1]")
        if np.any(np.abs(v[:, 0] - 1.0) > 1e-9):
            raise ValueError("every curve must start at 1")
        if np.any(np.diff(v, axis=1) > 1e-9):
            raise ValueError("curves must be non-increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)


def curves_to_matrix(curves, m: int = 100) -> CurveMatrix:
    """Evaluate curves on an equidistant grid [0, max span] with m+1 points.

    Step evaluation takes the value at the largest curve knot <= tau;
    curves ending before the span extend by their last value (warned).
    """
    curves = list(curves)
    if not curves:
        raise ValueError("no curves")
    span = max(float(c.grid[-1]) for c in curves)
    if span <= 0:
        raise ValueError("curves must extend past t = 0")
    grid = np.linspace(0.0, span, m + 1)
    short = sum(1 for c in curves if float(c.grid[-1]) < span)
    if short:
        warnings.warn(
            f"{short} curve(s) end before the grid span and are extended by "
            "their last value", stacklevel=2,
        )
    values = np.vstack([c.at(grid) for c in curves])
    return CurveMatrix(grid=grid, values=values)


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray  # (k, m+1)
    assignments: np.ndarray  # (n,)
    proportions: np.ndarray  # (k,), sums to 1
    inertia: float
    inertia_path: tuple  # inertia after each assignment step


def _sq_distances(rows: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = rows[:, None, :] - centers[None, :, :]
    return np.einsum(" nkj,nkj->nk", diff, diff)


def _seed_centers(rows: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++: spread the initial centers proportionally to squared
    distance from the ones already chosen."""
    n = rows.shape[0]
    centers = np.empty((k, rows.shape[1]))
    centers[0] = rows[rng.integers(n)]
    d2 = ((rows - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = rows[idx]
        d2 = np.minimum(d2, ((rows - centers[j]) ** 2).sum(axis=1))
    return centers


def kmeans_curves(matrix: CurveMatrix, k: int, seed: int = 0,
                  max_iter: int = 100) -> KMeansResult:
    """Lloyd's algorithm on curve vectors; empty clusters re-seed at the
    point farthest from its current center."""
    rows = matrix.values
    n = rows.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    rng = np.random.default_rng(seed)
    centers = _seed_centers(rows, k, rng)
    assignments = np.zeros(n, dtype=np.int64)
    inertia_path = []
    for _ in range(max_iter):
        d2 = _sq_distances(rows, centers)
        assignments = d2.argmin(axis=1)
        nearest = d2[np.arange(n), assignments]
        inertia_path.append(float(nearest.sum()))
        for c in range(k):
            if not np.any(assignments == c):
                far = int(np.argmax(nearest))
                centers[c] = rows[far]
                assignments[far] = c
                nearest[far] = 0.0
        new_centers = np.vstack(
            [rows[assignments == c].mean(axis=0) for c in range(k)]
        )
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    d2 = _sq_distances(rows, centers)
    assignments = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    inertia_path.append(inertia)
    proportions = np.bincount(assignments, minlength=k) / n
    return KMeansResult(centers=centers, assignments=assignments,
                        proportions=proportions, inertia=inertia,
                        inertia_path=tuple(inertia_path))
