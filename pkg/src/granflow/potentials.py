"""Confinement and interaction potentials, plus the joint lift to R^{dN}.

All built-in potentials are vectorized: ``value`` maps an (..., d) array of
points to an (...,) array, ``gradient`` maps (..., d) to (..., d).  Kinks of
the non-smooth potentials use a fixed subgradient selection: the zero vector
at origin kinks, and the outer branch on radius-1 seams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "PotentialSpec",
    "JointPotential",
    "ZeroPotential",
    "make_builtin",
    "lift_psi",
    "BUILTIN_IDS",
]

BUILTIN_IDS = ("V1", "V2", "V3", "W1", "W2", "W3", "W4", "W5", "W6")


@dataclass
class PotentialSpec:
    """A potential on R^d with analytic gradient and convexity metadata.

    ``lambda_convex`` and ``growth_q`` store the nominal catalog constants;
    ``lambda_empirical`` is the constant actually verified by the property
    tests (it differs for V3 and W6, whose nominal constants do not hold
    near the origin / on the left branch).
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    lambda_convex: float
    growth_q: float
    minimizer: Optional[np.ndarray] = None
    exact_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    lambda_empirical: Optional[float] = None
    # radii of piecewise seams ("kink sets"); origin kinks flagged separately
    seam_radii: tuple = ()
    kink_at_origin: bool = False
    # quadratic coefficient c when gradient(x) == c*x exactly (else None)
    quad_coeff: Optional[float] = None

    def __post_init__(self):
        if self.lambda_empirical is None:
            self.lambda_empirical = self.lambda_convex

    def eval(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        out = self.value(x)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"non-finite value of {self.name}")
        return out

    def grad(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        out = self.gradient(x)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"non-finite gradient of {self.name}")
        return out


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar input for dim={dim} potential")
        x = x.reshape(1)
    if x.shape[-1] != dim:
        raise ValueError(f"expected last axis {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input point")
    return x


def _radius(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def _radial_grad(x, r, slope_over_r):
    """Gradient of a radial function f(|x|): f'(r) * x/r = slope_over_r * x."""
    return x * slope_over_r[..., None]


# --- built-in catalog ------------------------------------------------------

def _v1(dim):
    c = 1.0

    def value(x):
        return 0.5 * np.sum(x * x, axis=-1)

    def grad(x):
        return x.copy()

    def exact_prox(x, tau):
        return x / (1.0 + tau)

    return PotentialSpec(
        "V1", dim, value, grad, lambda_convex=1.0, growth_q=1.0,
        minimizer=np.zeros(dim), exact_prox=exact_prox, quad_coeff=c,
    )


def _v2(dim):
    # 0.5|x| inside the unit ball, 0.5|x|^3 outside; kink at 0, seam at r=1.
    def value(x):
        r = _radius(x)
        return np.where(r <= 1.0, 0.5 * r, 0.5 * r ** 3)

    def grad(x):
        r = _radius(x)
        safe = np.where(r > 0, r, 1.0)
        slope = np.where(r < 1.0, 0.5, 1.5 * r ** 2)  # outer branch at the seam
        g = _radial_grad(x, r, slope / safe)
        return np.where(r[..., None] > 0, g, 0.0)  # zero subgradient at 0

    return PotentialSpec(
        "V2", dim, value, grad, lambda_convex=0.0, growth_q=2.0,
        minimizer=np.zeros(dim), seam_radii=(1.0,), kink_at_origin=True,
    )


def _v3(dim):
    if dim != 2:
        raise ValueError("V3 is defined for dim=2 only")

    def value(x):
        x1, x2 = x[..., 0], x[..., 1]
        right = (x1 + 0.5) ** np.where(x1 >= 0, 4.0 + np.arctan(x1), 1.0)
        right = np.where(x1 >= 0, right + x2 ** 2 - 1.0 / 16.0, 0.0)
        left = 0.25 * x1 ** 2 + x2 ** 2
        return np.where(x1 >= 0, right, left)

    def grad(x):
        x1, x2 = x[..., 0], x[..., 1]
        # right branch: d/dx1 (x1+1/2)^(4+arctan x1) via the log-derivative
        base = np.where(x1 >= 0, x1 + 0.5, 1.0)
        expo = 4.0 + np.arctan(np.maximum(x1, 0.0))
        pw = base ** expo
        d1_right = pw * (expo / base + np.log(base) / (1.0 + x1 ** 2))
        d1 = np.where(x1 >= 0, d1_right, 0.5 * x1)
        out = np.stack([d1, 2.0 * x2], axis=-1)
        return out

    return PotentialSpec(
        "V3", dim, value, grad, lambda_convex=1.0, growth_q=3.0 + np.pi / 2.0,
        minimizer=np.zeros(dim), lambda_empirical=0.5, seam_radii=(),
    )


def _w1(dim):
    c = -0.25

    def value(x):
        return -0.125 * np.sum(x * x, axis=-1)

    def grad(x):
        return -0.25 * x

    return PotentialSpec(
        "W1", dim, value, grad, lambda_convex=-0.25, growth_q=1.0,
        quad_coeff=c,
    )


def _w2(dim):
    def value(x):
        r = _radius(x)
        return r ** 3 / 3.0 - 0.125 * r ** 2

    def grad(x):
        r = _radius(x)
        safe = np.where(r > 0, r, 1.0)
        slope = r ** 2 - 0.25 * r
        g = _radial_grad(x, r, slope / safe)
        return np.where(r[..., None] > 0, g, 0.0)

    return PotentialSpec(
        "W2", dim, value, grad, lambda_convex=-0.25, growth_q=2.0,
        kink_at_origin=False,
    )


def _w3(dim):
    def value(x):
        r = _radius(x)
        return r ** 3 / 3.0

    def grad(x):
        r = _radius(x)
        return x * r[..., None]

    return PotentialSpec("W3", dim, value, grad, lambda_convex=0.0, growth_q=2.0)


def _w4(dim):
    c = 1.0

    def value(x):
        return 0.5 * np.sum(x * x, axis=-1)

    def grad(x):
        return x.copy()

    def exact_prox(x, tau):
        return x / (1.0 + tau)

    return PotentialSpec(
        "W4", dim, value, grad, lambda_convex=1.0, growth_q=1.0,
        exact_prox=exact_prox, quad_coeff=c,
    )


def _w5(dim):
    # -|x|^2/8 + 1 inside the unit ball; outside -|x| + 15/8 (the outer
    # constant is chosen so the value is continuous at the seam; the
    # constant shift does not change any gradient).
    def value(x):
        r = _radius(x)
        return np.where(r <= 1.0, 1.0 - 0.125 * r ** 2, 15.0 / 8.0 - r)

    def grad(x):
        r = _radius(x)
        safe = np.where(r > 0, r, 1.0)
        slope = np.where(r < 1.0, -0.25 * r, -1.0)  # outer branch at the seam
        g = _radial_grad(x, r, slope / safe)
        return np.where(r[..., None] > 0, g, 0.0)

    return PotentialSpec(
        "W5", dim, value, grad, lambda_convex=-0.25, growth_q=1.0,
        seam_radii=(1.0,),
    )


def _w6(dim):
    def value(x):
        r = _radius(x)
        return np.where(r <= 1.0, 0.5 * r, 0.5 * r ** 3)

    def grad(x):
        r = _radius(x)
        safe = np.where(r > 0, r, 1.0)
        slope = np.where(r < 1.0, 0.5, 1.5 * r ** 2)
        g = _radial_grad(x, r, slope / safe)
        return np.where(r[..., None] > 0, g, 0.0)

    return PotentialSpec(
        "W6", dim, value, grad, lambda_convex=1.0, growth_q=2.0,
        lambda_empirical=0.0, seam_radii=(1.0,), kink_at_origin=True,
    )


_FACTORIES = {
    "V1": _v1, "V2": _v2, "V3": _v3,
    "W1": _w1, "W2": _w2, "W3": _w3, "W4": _w4, "W5": _w5, "W6": _w6,
}


def make_builtin(model_id: str, dim: int) -> PotentialSpec:
    """Build one of the catalog potentials V1..V3, W1..W6 on R^dim."""
    if model_id not in _FACTORIES:
        raise KeyError(f"unknown potential id {model_id!r}")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _FACTORIES[model_id](dim)


def ZeroPotential(dim: int) -> PotentialSpec:
    """The identically-zero potential (used for W == 0 models)."""

    def value(x):
        return np.zeros(x.shape[:-1])

    def grad(x):
        return np.zeros_like(x)

    def exact_prox(x, tau):
        return x.copy()

    return PotentialSpec(
        "0", dim, value, grad, lambda_convex=0.0, growth_q=1.0,
        minimizer=np.zeros(dim), exact_prox=exact_prox, quad_coeff=0.0,
    )


# --- joint potential -------------------------------------------------------

@dataclass
class JointPotential:
    """Lift of (V, W, N) to the joint space R^{dN}.

    value(X) = sum_i V(x^i) + (1/2N) sum_i sum_j W(x^i - x^j); the j = i
    diagonal contributes W(0) per particle to the value and nothing to the
    gradient (zero subgradient of the even W at the origin).
    """

    base_v: PotentialSpec
    base_w: PotentialSpec
    n_particles: int
    dim_per_particle: int
    lambda_convex: float = field(init=False)
    growth_q: float = field(init=False)
    lambda_empirical: float = field(init=False)
    exact_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(init=False)

    def __post_init__(self):
        lv, lw = self.base_v.lambda_convex, self.base_w.lambda_convex
        self.lambda_convex = min(lv, lv + 2.0 * lw)
        self.growth_q = max(self.base_v.growth_q, self.base_w.growth_q)
        le_v = self.base_v.lambda_empirical
        le_w = self.base_w.lambda_empirical
        self.lambda_empirical = min(le_v, le_v + 2.0 * le_w)
        self.exact_prox = self._quadratic_prox()

    @property
    def total_dim(self) -> int:
        return self.n_particles * self.dim_per_particle

    def value(self, positions: np.ndarray) -> float:
        X = self._check(positions)
        v = float(np.sum(self.base_v.eval(X)))
        diffs = X[:, None, :] - X[None, :, :]
        w = float(np.sum(self.base_w.eval(diffs))) / (2.0 * self.n_particles)
        return v + w

    def gradient(self, positions: np.ndarray) -> np.ndarray:
        X = self._check(positions)
        g = self.base_v.grad(X)
        diffs = X[:, None, :] - X[None, :, :]
        gw = self.base_w.grad(diffs)
        # diagonal is the zero subgradient of the even W at 0 already
        g = g + np.sum(gw, axis=1) / self.n_particles
        return g

    def interaction_force(self, positions: np.ndarray) -> np.ndarray:
        """(1/N) sum_j grad W(x^i - x^j); O(N^2) direct, fixed order."""
        X = self._check(positions)
        if self.base_w.quad_coeff is not None:
            c = self.base_w.quad_coeff
            return c * (X - X.mean(axis=0, keepdims=True))
        diffs = X[:, None, :] - X[None, :, :]
        return np.sum(self.base_w.grad(diffs), axis=1) / self.n_particles

    def _quadratic_prox(self):
        """Closed-form joint prox when both V and W are quadratic.

        With grad V = a*x and grad W = c*z the stationarity system
        y_i + tau*(a*y_i + c*(y_i - ybar)) = x_i is linear; the mean obeys
        ybar*(1 + tau*a) = xbar.
        """
        a, c = self.base_v.quad_coeff, self.base_w.quad_coeff
        if a is None or c is None:
            return None

        def prox(X, tau):
            xbar = X.mean(axis=0, keepdims=True)
            ybar = xbar / (1.0 + tau * a)
            return (X + tau * c * ybar) / (1.0 + tau * (a + c))

        return prox

    def _check(self, positions) -> np.ndarray:
        X = np.asarray(positions, dtype=float)
        if X.shape != (self.n_particles, self.dim_per_particle):
            raise ValueError(
                f"expected shape {(self.n_particles, self.dim_per_particle)},"
                f" got {X.shape}"
            )
        return X


def lift_psi(v: PotentialSpec, w: PotentialSpec, n: int) -> JointPotential:
    """Lift a confinement/interaction pair to the joint potential on R^{dN}."""
    if v.dim != w.dim:
        raise ValueError(f"dimension mismatch: V has d={v.dim}, W has d={w.dim}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return JointPotential(v, w, n, v.dim)
