"""Gaussian mixtures: initial conditions and analytic reference marginals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GaussianMixture", "benchmark_mixture_1d", "benchmark_mixture_2d"]


@dataclass
class GaussianMixture:
    """Weighted Gaussian components; covariances are full PSD matrices."""

    weights: np.ndarray   # (K,)
    means: np.ndarray     # (K, d)
    covariances: np.ndarray  # (K, d, d)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.covariances = np.asarray(self.covariances, dtype=float)
        if self.covariances.ndim == 1:  # per-component scalar variances
            d = self.means.shape[1]
            self.covariances = np.array(
                [v * np.eye(d) for v in self.covariances]
            )
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if np.any(self.weights < 0):
            raise ValueError("mixture weights must be nonnegative")
        for S in self.covariances:
            if not np.allclose(S, S.T, atol=1e-12):
                raise ValueError("covariance not symmetric")
            if np.min(np.linalg.eigvalsh(S)) < -1e-12:
                raise ValueError("covariance not PSD")

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def second_moment(self) -> float:
        """E|X|^2 of the mixture."""
        out = 0.0
        for w, m, S in zip(self.weights, self.means, self.covariances):
            out += w * (m @ m + np.trace(S))
        return float(out)

    def covariance(self) -> np.ndarray:
        """Full covariance of the mixture."""
        mu = self.mean()
        out = np.zeros((self.dim, self.dim))
        for w, m, S in zip(self.weights, self.means, self.covariances):
            dm = m - mu
            out += w * (S + np.outer(dm, dm))
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.n_components, size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        chols = np.array([np.linalg.cholesky(_nudge(S)) for S in self.covariances])
        return self.means[comp] + np.einsum("nij,nj->ni", chols[comp], z)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(len(x))
        for w, m, S in zip(self.weights, self.means, self.covariances):
            d = self.dim
            Si = np.linalg.inv(_nudge(S))
            det = np.linalg.det(_nudge(S))
            q = np.einsum("ni,ij,nj->n", x - m, Si, x - m)
            out += w * np.exp(-0.5 * q) / np.sqrt((2 * np.pi) ** d * det)
        return out

    def cdf_1d(self, x: np.ndarray) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("cdf_1d requires d=1")
        from scipy.stats import norm

        x = np.asarray(x, dtype=float).ravel()
        sd = np.sqrt(self.covariances[:, 0, 0])
        m = self.means[:, 0]
        return (self.weights[None, :] * norm.cdf(
            (x[:, None] - m[None, :]) / sd[None, :])).sum(axis=1)


def _nudge(S: np.ndarray) -> np.ndarray:
    # keep Cholesky happy for exactly-singular PSD inputs
    return S + 1e-15 * np.eye(len(S))


def benchmark_mixture_1d() -> GaussianMixture:
    """The three-bump 1D initial condition (component variances 1, 1, 2.25)."""
    return GaussianMixture(
        weights=[0.2, 0.4, 0.4],
        means=[[2.0], [-4.0], [4.0]],
        covariances=np.array([1.0, 1.0, 2.25]),
    )


def benchmark_mixture_2d() -> GaussianMixture:
    """The three-component 2D initial condition with full covariances."""
    return GaussianMixture(
        weights=[0.2, 0.4, 0.4],
        means=[[4.0, 2.0], [-2.0, -4.0], [-2.0, 3.0]],
        covariances=np.array([
            [[1.0, 0.2], [0.2, 1.3]],
            [[1.0, -0.2], [-0.2, 1.3]],
            [[2.0, 0.2], [0.2, 2.0]],
        ]),
    )
