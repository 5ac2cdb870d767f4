"""Quadratic Wasserstein distances between empirical clouds and Gaussians.

Empirical-to-empirical W2 is exact: sorting in one dimension, an optimal
assignment in higher dimension (equal-size clouds only, cost |x - y|^2).
For large clouds ``w2_subsampled`` averages the exact distance over random
common-size subsamples.  ``w2_gaussian`` is the closed form between two
Gaussians (Bures metric between the covariances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import rng as rng_mod

__all__ = [
    "W2Report",
    "w2_sorted_1d",
    "w2_assignment",
    "w2_empirical",
    "w2_subsampled",
    "w2_gaussian",
    "empirical_moment",
]

ASSIGNMENT_CAP = 2048


@dataclass
class W2Report:
    distance: float        # W2 itself (not squared)
    squared: float
    method: str            # "sorted", "assignment", "subsampled", "gaussian"
    n_points: int
    subsamples: int = 1


def _check_cloud(x, dim: Optional[int] = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"expected a nonempty (n, d) cloud, got shape {x.shape}")
    if dim is not None and x.shape[1] != dim:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cloud contains non-finite points")
    return x


def w2_sorted_1d(x, y) -> W2Report:
    """Exact W2 between equal-size 1D clouds via sorted pairing."""
    x = _check_cloud(x, 1).ravel()
    y = _check_cloud(y, 1).ravel()
    if x.size != y.size:
        raise ValueError("clouds must have equal size")
    d = np.sort(x) - np.sort(y)
    sq = math.fsum((d * d).tolist()) / x.size
    return W2Report(distance=math.sqrt(sq), squared=sq, method="sorted",
                    n_points=x.size)


def w2_assignment(x, y) -> W2Report:
    """Exact W2 between equal-size clouds via optimal assignment."""
    x = _check_cloud(x)
    y = _check_cloud(y, x.shape[1])
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("clouds must have equal size")
    if n > ASSIGNMENT_CAP:
        raise ValueError(
            f"assignment solve capped at {ASSIGNMENT_CAP} points "
            f"(got {n}); use w2_subsampled")
    cost = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1)
    rows, cols = linear_sum_assignment(cost)
    sq = math.fsum(cost[rows, cols].tolist()) / n
    return W2Report(distance=math.sqrt(sq), squared=sq, method="assignment",
                    n_points=n)


def w2_empirical(x, y) -> W2Report:
    """Exact W2 between equal-size clouds: sorted in 1D, assignment else."""
    x = _check_cloud(x)
    y = _check_cloud(y)
    if x.shape[1] == 1 and y.shape[1] == 1:
        return w2_sorted_1d(x, y)
    return w2_assignment(x, y)


def w2_subsampled(x, y, size: int = 1024, n_draws: int = 8,
                  seed: int = 0, tag: int = 0) -> W2Report:
    """W2 estimate between large clouds from exact solves on subsamples.

    Averages W2^2 over ``n_draws`` independent common-size subsamples drawn
    without replacement from each cloud.
    """
    x = _check_cloud(x)
    y = _check_cloud(y, x.shape[1])
    size = min(size, x.shape[0], y.shape[0])
    if size < 1:
        raise ValueError("subsample size must be >= 1")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    sq_vals = []
    for j in range(n_draws):
        gen = rng_mod.stream(seed, rng_mod.SUBSAMPLE, tag=tag, step=j)
        xi = gen.choice(x.shape[0], size=size, replace=False)
        yi = gen.choice(y.shape[0], size=size, replace=False)
        sq_vals.append(w2_empirical(x[xi], y[yi]).squared)
    sq = math.fsum(sq_vals) / n_draws
    return W2Report(distance=math.sqrt(sq), squared=sq, method="subsampled",
                    n_points=size, subsamples=n_draws)


def w2_gaussian(m1, S1, m2, S2) -> W2Report:
    """Closed-form W2 between N(m1, S1) and N(m2, S2).

    W2^2 = |m1 - m2|^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2}).
    """
    m1 = np.atleast_1d(np.asarray(m1, dtype=float))
    m2 = np.atleast_1d(np.asarray(m2, dtype=float))
    S1 = np.atleast_2d(np.asarray(S1, dtype=float))
    S2 = np.atleast_2d(np.asarray(S2, dtype=float))
    if m1.shape != m2.shape or S1.shape != S2.shape:
        raise ValueError("shape mismatch between the two Gaussians")
    root2 = _sqrtm_psd(S2)
    cross = _sqrtm_psd(root2 @ S1 @ root2)
    sq = float(np.sum((m1 - m2) ** 2) + np.trace(S1 + S2 - 2.0 * cross))
    sq = max(sq, 0.0)  # clip the tiny negative values eigh round-off produces
    return W2Report(distance=math.sqrt(sq), squared=sq, method="gaussian",
                    n_points=0)


def _sqrtm_psd(S: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(S)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def empirical_moment(x, order: int = 2) -> float:
    """Mean of |x|^order over the cloud (compensated summation)."""
    x = _check_cloud(x)
    r = np.sqrt(np.sum(x * x, axis=1))
    return math.fsum((r ** order).tolist()) / x.shape[0]
