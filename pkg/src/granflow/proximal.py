"""Proximal solves: closed forms where available, backtracking descent else.

The backtracking loop minimizes P_x(y) = V(y) + |y - x|^2 / (2 tau) by
gradient descent with a shrinking step: a trial step from eta with step gamma
is accepted only when both

    P_x(eta')  <=  V(eta_0)                       (stay below the start), and
    P_x(eta')  <=  P_x(eta) - (gamma/2)|grad P_x(eta)|^2   (quadratic bound),

otherwise gamma <- shrink * gamma and the step is retried.  The loop stops
once |grad P_x(eta)| <= grad_tol; strong convexity of P_x then certifies
|eta - prox(x)| <= grad_tol / (lambda + 1/tau).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .potentials import JointPotential, PotentialSpec

__all__ = [
    "ProxConfig",
    "ProxResult",
    "ProxError",
    "MaxItersExceeded",
    "StepUnderflow",
    "prox_exact_quadratic",
    "prox_backtracking",
    "prox",
    "prox_batch",
    "prox_joint",
]

_GAMMA_FLOOR = 1e-30


class ProxError(RuntimeError):
    pass


class MaxItersExceeded(ProxError):
    pass


class StepUnderflow(ProxError):
    pass


@dataclass
class ProxConfig:
    """Inner-solver settings; ``from_epsilon`` ties grad_tol to the target
    accuracy via grad_tol = epsilon * (lambda + 1/tau)."""

    gamma0: float
    shrink: float = 0.5
    grad_tol: float = 1e-10
    max_iters: int = 500
    epsilon_target: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.shrink < 1.0):
            raise ValueError("shrink must lie strictly inside (0, 1)")
        if self.gamma0 <= 0 or self.grad_tol <= 0 or self.epsilon_target <= 0:
            raise ValueError("gamma0, grad_tol, epsilon_target must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @classmethod
    def from_epsilon(cls, tau: float, lam: float, epsilon: Optional[float] = None,
                     shrink: float = 0.5, max_iters: int = 500) -> "ProxConfig":
        """Defaults: gamma0 = tau, epsilon = tau^2 (the perturbation-stable
        accuracy regime), grad_tol = epsilon * (lambda + 1/tau)."""
        if epsilon is None:
            epsilon = tau * tau
        strong = lam + 1.0 / tau
        if strong <= 0:
            raise ValueError("requires lambda + 1/tau > 0")
        return cls(gamma0=tau, shrink=shrink, grad_tol=epsilon * strong,
                   max_iters=max_iters, epsilon_target=epsilon)


@dataclass
class ProxResult:
    point: np.ndarray
    iterations: int
    final_gamma: float
    residual: float
    path: Optional[List[np.ndarray]] = field(default=None, repr=False)


def prox_exact_quadratic(x, tau: float, lam: float, center=0.0) -> np.ndarray:
    """Minimizer of (lam/2)|y-center|^2 + |y-x|^2/(2 tau)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    if tau <= 0 or lam <= 0:
        raise ValueError("tau and lam must be positive")
    center = np.asarray(center, dtype=float)
    return center + (x - center) / (1.0 + tau * lam)


def _backtrack(value_fn: Callable[[np.ndarray], np.ndarray],
               grad_fn: Callable[[np.ndarray], np.ndarray],
               x0: np.ndarray, tau: float, cfg: ProxConfig,
               gammas: Optional[np.ndarray] = None,
               keep_path: bool = False):
    """Row-wise backtracking descent on P_x for a (B, D) batch of problems.

    Returns (eta, iters, gammas, residuals, paths).  Each row is an
    independent prox problem; acceptance and gamma shrinking are per row.
    """
    x0 = np.asarray(x0, dtype=float)
    B, _ = x0.shape
    eta = x0.copy()
    if gammas is None:
        gammas = np.full(B, cfg.gamma0)
    else:
        gammas = np.asarray(gammas, dtype=float).copy()
    inv2tau = 1.0 / (2.0 * tau)

    v_start = value_fn(x0)  # V(eta_0); P_x(eta_0) equals it since eta_0 = x
    p_cur = v_start.copy()
    g = grad_fn(eta) + (eta - x0) / tau
    gnorm2 = np.einsum("ij,ij->i", g, g)
    iters = np.zeros(B, dtype=int)
    active = np.sqrt(gnorm2) > cfg.grad_tol
    paths = [eta.copy()] if keep_path else None

    while np.any(active):
        idx = np.nonzero(active)[0]
        cand = eta[idx] - gammas[idx, None] * g[idx]
        p_cand = p_of_rows(value_fn, inv2tau, cand, x0[idx])
        ok = (p_cand <= v_start[idx] + 1e-15) & (
            p_cand <= p_cur[idx] - 0.5 * gammas[idx] * gnorm2[idx] + 1e-15)

        acc = idx[ok]
        rej = idx[~ok]
        if acc.size:
            g_old = g[acc]
            step_len = gammas[acc] * np.sqrt(gnorm2[acc])
            eta[acc] = cand[ok]
            p_cur[acc] = p_cand[ok]
            iters[acc] += 1
            g_new = grad_fn(eta[acc]) + (eta[acc] - x0[acc]) / tau
            g[acc] = g_new
            gnorm2[acc] = np.einsum("ij,ij->i", g_new, g_new)
            done = np.sqrt(gnorm2[acc]) <= cfg.grad_tol
            # At a kink of V the minimizer carries a nonvanishing selected
            # gradient, so the norm test cannot fire.  If a short accepted
            # step reversed the gradient direction, the segment brackets the
            # minimizer and the iterate is within the step length of it.
            reversed_ = np.einsum("ij,ij->i", g_old, g_new) < 0.0
            done |= reversed_ & (step_len <= cfg.epsilon_target)
            active[acc[done]] = False
            over = iters[acc] >= cfg.max_iters
            if np.any(over & ~done):
                raise MaxItersExceeded(
                    f"prox row {acc[np.argmax(over & ~done)]}: residual "
                    f"{np.sqrt(gnorm2[acc][np.argmax(over & ~done)]):.3e} above "
                    f"grad_tol {cfg.grad_tol:.3e} after {cfg.max_iters} steps")
            if keep_path:
                paths.append(eta.copy())
        if rej.size:
            gammas[rej] *= cfg.shrink
            if np.any(gammas[rej] < _GAMMA_FLOOR):
                raise StepUnderflow(
                    f"prox row {rej[np.argmin(gammas[rej])]}: step size below "
                    f"{_GAMMA_FLOOR:g} without acceptance")

    return eta, iters, gammas, np.sqrt(gnorm2), paths


def p_of_rows(value_fn, inv2tau, y, x):
    d = y - x
    return value_fn(y) + inv2tau * np.einsum("ij,ij->i", d, d)


def prox_backtracking(p: PotentialSpec, x, tau: float,
                      cfg: Optional[ProxConfig] = None,
                      keep_path: bool = False) -> ProxResult:
    """Backtracking prox of a potential at a single point."""
    if cfg is None:
        cfg = ProxConfig.from_epsilon(tau, p.lambda_empirical)
    if p.lambda_empirical + 1.0 / tau <= 0:
        raise ValueError("requires lambda + 1/tau > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    X = x.reshape(1, -1)
    eta, iters, gammas, res, paths = _backtrack(
        p.eval, p.grad, X, tau, cfg, keep_path=keep_path)
    return ProxResult(
        point=eta[0],
        iterations=int(iters[0]),
        final_gamma=float(gammas[0]),
        residual=float(res[0]),
        path=[row[0] for row in paths] if keep_path else None,
    )


def prox(p: PotentialSpec, x, tau: float,
         cfg: Optional[ProxConfig] = None) -> ProxResult:
    """Dispatch: closed form when the potential carries one, else backtracking."""
    if p.exact_prox is not None:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = p.exact_prox(x, tau)
        return ProxResult(point=y, iterations=0, final_gamma=tau, residual=0.0)
    return prox_backtracking(p, x, tau, cfg)


def prox_batch(p: PotentialSpec, X: np.ndarray, tau: float,
               cfg: Optional[ProxConfig] = None,
               gammas: Optional[np.ndarray] = None):
    """Particle-wise prox of an (N, d) ensemble.

    Returns (Y, gammas); gammas can be fed back in for warm starts across
    outer steps with the same potential and tau.
    """
    X = np.asarray(X, dtype=float)
    if p.exact_prox is not None:
        return p.exact_prox(X, tau), gammas
    if cfg is None:
        cfg = ProxConfig.from_epsilon(tau, p.lambda_empirical)
    eta, _, gammas, _, _ = _backtrack(p.eval, p.grad, X, tau, cfg, gammas=gammas)
    return eta, gammas


def prox_joint(psi: JointPotential, X: np.ndarray, tau: float,
               cfg: Optional[ProxConfig] = None,
               gamma: Optional[float] = None):
    """Joint prox of Psi over R^{dN}; X is the (N, d) ensemble.

    Returns (Y, gamma) with the same warm-start convention as prox_batch.
    """
    X = np.asarray(X, dtype=float)
    if psi.exact_prox is not None:
        return psi.exact_prox(X, tau), gamma
    if cfg is None:
        cfg = ProxConfig.from_epsilon(tau, psi.lambda_empirical)
    shape = X.shape

    def val(rows):
        return np.array([psi.value(r.reshape(shape)) for r in rows])

    def grad(rows):
        return np.stack([psi.gradient(r.reshape(shape)).ravel() for r in rows])

    gam = None if gamma is None else np.array([gamma])
    eta, _, gammas, _, _ = _backtrack(
        val, grad, X.reshape(1, -1), tau, cfg, gammas=gam)
    return eta[0].reshape(shape), float(gammas[0])
