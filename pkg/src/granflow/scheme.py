"""Time stepping: proximal drift step followed by an exact heat-kernel kick.

One step of the chain maps the ensemble X_k to

    X_{k+1/2} = prox(X_k)          (drift, solved exactly or by backtracking)
    X_{k+1}   = X_{k+1/2} + Z      (Z ~ N(0, 2 tau Id), the heat semigroup)

In ``local`` mode the prox uses the confinement potential alone, particle by
particle.  In ``interacting`` mode the prox is taken jointly over R^{dN} with
the lifted potential (confinement plus pairwise interaction).  ``perturbed``
mode adds a bounded perturbation of norm at most ``perturbation_eps`` to each
particle after the drift step, before the Gaussian kick.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import rng as rng_mod
from .mixture import GaussianMixture
from .potentials import JointPotential, PotentialSpec, ZeroPotential, lift_psi
from .proximal import ProxConfig, prox_batch, prox_joint

__all__ = [
    "SchemeConfig",
    "Ensemble",
    "RunRecord",
    "sample_initial",
    "gaussian_kick",
    "step_local",
    "step_interacting",
    "run_scheme",
]

MODES = ("local", "interacting", "perturbed")


@dataclass
class SchemeConfig:
    """Settings for one chain run."""

    tau: float
    n_steps: int
    n_particles: int
    mode: str = "local"
    perturbation_eps: float = 0.0
    prox_cfg: Optional[ProxConfig] = None
    seed: int = 0
    stream_tag: int = 0
    record_every: int = 10
    record_positions: bool = False
    noise_scale: float = 1.0  # test hook; 0 disables the Gaussian kick
    allow_large_tau: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "perturbed" and self.perturbation_eps < 0:
            raise ValueError("perturbation_eps must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    def validate_against(self, v: PotentialSpec) -> None:
        """The contraction analysis needs tau < 1/lambda_V when lambda_V > 0."""
        lam = v.lambda_convex
        if lam > 0 and self.tau >= 1.0 / lam and not self.allow_large_tau:
            warnings.warn(
                f"tau={self.tau} >= 1/lambda_V={1.0 / lam}; contraction "
                "guarantees do not apply (set allow_large_tau to silence)",
                RuntimeWarning,
            )


@dataclass
class Ensemble:
    """Particle positions plus bookkeeping carried across steps."""

    positions: np.ndarray  # (N, d)
    step: int = 0
    tau: float = 0.0
    # warm-started backtracking step sizes (None until first inexact prox)
    prox_gammas: Optional[np.ndarray] = None
    joint_gamma: Optional[float] = None

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def time(self) -> float:
        return self.step * self.tau

    def moments(self) -> dict:
        X = self.positions
        sq = np.sum(X * X, axis=1)
        return {
            "mean": X.mean(axis=0).tolist(),
            "second_moment": float(np.mean(sq)),
            "second_moment_std": float(np.std(sq)),
            "variance": float(np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1))),
        }


def sample_initial(mixture: GaussianMixture, n: int, seed: int,
                   tau: float, stream_tag: int = 0) -> Ensemble:
    gen = rng_mod.stream(seed, rng_mod.INIT, tag=stream_tag)
    return Ensemble(positions=mixture.sample(n, gen), step=0, tau=tau)


def gaussian_kick(shape, tau: float, seed: int, step: int,
                  stream_tag: int = 0, scale: float = 1.0) -> np.ndarray:
    """One heat-kernel increment Z ~ N(0, 2 tau Id), keyed by (seed, step)."""
    gen = rng_mod.stream(seed, rng_mod.GAUSS, tag=stream_tag, step=step)
    return scale * np.sqrt(2.0 * tau) * gen.standard_normal(shape)


def _perturbation(shape, eps: float, seed: int, step: int,
                  stream_tag: int = 0) -> np.ndarray:
    """Per-particle vectors drawn uniformly on the sphere of radius eps."""
    if eps == 0.0:
        return np.zeros(shape)
    gen = rng_mod.stream(seed, rng_mod.PERTURB, tag=stream_tag, step=step)
    u = gen.standard_normal(shape)
    norms = np.linalg.norm(u, axis=-1, keepdims=True)
    norms[norms == 0] = 1.0
    return eps * u / norms


def step_local(ens: Ensemble, v: PotentialSpec, cfg: SchemeConfig) -> Ensemble:
    """One local step: particle-wise prox of V, optional perturbation, kick."""
    Y, gammas = prox_batch(v, ens.positions, cfg.tau, cfg.prox_cfg,
                           gammas=ens.prox_gammas)
    if cfg.mode == "perturbed":
        Y = Y + _perturbation(Y.shape, cfg.perturbation_eps, cfg.seed,
                              ens.step, cfg.stream_tag)
    Z = gaussian_kick(Y.shape, cfg.tau, cfg.seed, ens.step, cfg.stream_tag,
                      scale=cfg.noise_scale)
    return Ensemble(positions=Y + Z, step=ens.step + 1, tau=cfg.tau,
                    prox_gammas=gammas)


def step_interacting(ens: Ensemble, psi: JointPotential,
                     cfg: SchemeConfig) -> Ensemble:
    """One interacting step: joint prox over R^{dN}, then the kick."""
    Y, gamma = prox_joint(psi, ens.positions, cfg.tau, cfg.prox_cfg,
                          gamma=ens.joint_gamma)
    if cfg.mode == "perturbed":
        Y = Y + _perturbation(Y.shape, cfg.perturbation_eps, cfg.seed,
                              ens.step, cfg.stream_tag)
    Z = gaussian_kick(Y.shape, cfg.tau, cfg.seed, ens.step, cfg.stream_tag,
                      scale=cfg.noise_scale)
    return Ensemble(positions=Y + Z, step=ens.step + 1, tau=cfg.tau,
                    joint_gamma=gamma)


@dataclass
class RunRecord:
    """Trajectory summary: recorded times, moments, optional positions."""

    tau: float
    n_steps: int
    n_particles: int
    dim: int
    mode: str
    seed: int
    times: List[float] = field(default_factory=list)
    moments: List[dict] = field(default_factory=list)
    positions: Optional[List[np.ndarray]] = None
    wall_seconds: float = 0.0
    final_positions: Optional[np.ndarray] = None

    def to_json_dict(self) -> dict:
        out = {
            "tau": self.tau,
            "n_steps": self.n_steps,
            "n_particles": self.n_particles,
            "dim": self.dim,
            "mode": self.mode,
            "seed": self.seed,
            "times": self.times,
            "moments": self.moments,
            # wall_seconds stays in memory only: artifacts must be
            # byte-identical across re-runs of the same (config, seed)
        }
        if self.positions is not None:
            out["positions"] = [P.tolist() for P in self.positions]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def run_scheme(v: PotentialSpec, cfg: SchemeConfig,
               mixture: Optional[GaussianMixture] = None,
               w: Optional[PotentialSpec] = None,
               initial: Optional[Ensemble] = None) -> RunRecord:
    """Run the chain for cfg.n_steps steps and record the trajectory.

    Pass either ``mixture`` (sampled with the run's init stream) or a
    prebuilt ``initial`` ensemble.  ``w`` switches on the interacting step;
    with w=None the interaction is the zero potential.
    """
    cfg.validate_against(v)
    if initial is None:
        if mixture is None:
            raise ValueError("need either a mixture or an initial ensemble")
        ens = sample_initial(mixture, cfg.n_particles, cfg.seed, cfg.tau,
                             cfg.stream_tag)
    else:
        ens = initial
        ens.tau = cfg.tau
    if ens.positions.shape[0] != cfg.n_particles:
        raise ValueError("initial ensemble size does not match n_particles")

    interacting = w is not None and w.name != "0"
    psi = lift_psi(v, w if w is not None else ZeroPotential(v.dim),
                   cfg.n_particles) if interacting else None

    rec = RunRecord(tau=cfg.tau, n_steps=cfg.n_steps,
                    n_particles=cfg.n_particles, dim=ens.dim, mode=cfg.mode,
                    seed=cfg.seed)
    if cfg.record_positions:
        rec.positions = []

    def snapshot(e: Ensemble):
        rec.times.append(e.time)
        rec.moments.append(e.moments())
        if rec.positions is not None:
            rec.positions.append(e.positions.copy())

    t0 = time.perf_counter()
    snapshot(ens)
    for k in range(cfg.n_steps):
        if interacting:
            ens = step_interacting(ens, psi, cfg)
        else:
            ens = step_local(ens, v, cfg)
        if (k + 1) % cfg.record_every == 0 or k + 1 == cfg.n_steps:
            snapshot(ens)
    rec.wall_seconds = time.perf_counter() - t0
    rec.final_positions = ens.positions
    return rec
