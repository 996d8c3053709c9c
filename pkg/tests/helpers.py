import numpy as np

from survtime.data import SurvivalDataset


def make_dataset(t, d, x=None, p=1):
    """Small hand-built dataset; covariates default to zeros."""
    t = np.asarray(t, dtype=float)
    if x is None:
        x = np.zeros((t.size, p))
    x = np.asarray(x, dtype=float).reshape(t.size, -1)
    return SurvivalDataset(x, t, np.asarray(d))
