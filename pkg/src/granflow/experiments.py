"""Model catalog, analytic references, and the convergence-rate sweeps.

The catalog pairs confinement and interaction potentials into the eight
benchmark models A-H.  For the purely quadratic cases there are closed-form
references: the Ornstein-Uhlenbeck mixture marginal for the local model, and
the mean/variance ODE solution of the nonlinear (mean-field) OU dynamics for
the quadratic interacting models.  ``tau_sweep`` and ``n_sweep`` run the
chain across step sizes / particle counts and fit log-log convergence rates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import rng as rng_mod
from .mixture import GaussianMixture, benchmark_mixture_1d, benchmark_mixture_2d
from .potentials import PotentialSpec, make_builtin
from .proximal import ProxConfig
from .scheme import Ensemble, RunRecord, SchemeConfig, gaussian_kick, run_scheme
from .transport import W2Report, w2_empirical, w2_subsampled, ASSIGNMENT_CAP

__all__ = [
    "ModelSpec",
    "MODELS",
    "get_model",
    "ou_exact_marginal",
    "quadratic_meanfield_reference",
    "quadratic_meanfield_marginal",
    "MEANFIELD_COEFFS",
    "SweepRecord",
    "tau_sweep",
    "n_sweep",
    "moment_trace",
    "MomentTrace",
]


@dataclass(frozen=True)
class ModelSpec:
    """One catalog entry: a confinement potential, an optional interaction."""

    id: str
    v_id: str
    w_id: Optional[str]
    dim: int
    label: str

    @property
    def interacting(self) -> bool:
        return self.w_id is not None

    def build(self, dim: Optional[int] = None) -> Tuple[PotentialSpec, Optional[PotentialSpec]]:
        d = self.dim if dim is None else dim
        if self.v_id == "V3" and d != 2:
            raise ValueError(f"model {self.id} is fixed to dim=2")
        v = make_builtin(self.v_id, d)
        w = make_builtin(self.w_id, d) if self.w_id else None
        return v, w

    def default_mixture(self, dim: Optional[int] = None) -> GaussianMixture:
        d = self.dim if dim is None else dim
        if d == 2 and self.v_id == "V3":
            return benchmark_mixture_2d()
        base = benchmark_mixture_1d()
        if d == 1:
            return base
        # embed the 1D benchmark along the first axis, unit variance elsewhere
        means = np.zeros((base.n_components, d))
        means[:, 0] = base.means[:, 0]
        covs = np.array([np.eye(d) for _ in range(base.n_components)])
        for k in range(base.n_components):
            covs[k, 0, 0] = base.covariances[k, 0, 0]
        return GaussianMixture(base.weights, means, covs)


MODELS: Dict[str, ModelSpec] = {
    "A": ModelSpec("A", "V1", None, 1, "local"),
    "B": ModelSpec("B", "V1", "W1", 1, "repulsive"),
    "C": ModelSpec("C", "V1", "W2", 1, "attractive-repulsive"),
    "D": ModelSpec("D", "V1", "W3", 1, "attractive"),
    "E": ModelSpec("E", "V2", None, 1, "local"),
    "F": ModelSpec("F", "V1", "W4", 1, "attractive"),
    "G": ModelSpec("G", "V3", "W5", 2, "repulsive"),
    "H": ModelSpec("H", "V3", "W6", 2, "attractive"),
}


def get_model(model_id: str) -> ModelSpec:
    try:
        return MODELS[model_id.upper()]
    except KeyError:
        raise KeyError(f"unknown model {model_id!r}; choose from A-H") from None


# --- analytic references -----------------------------------------------


def ou_exact_marginal(m0: GaussianMixture, t: float) -> GaussianMixture:
    """Marginal at time t of dY = -Y dt + sqrt(2) dB started from a mixture.

    Each component (w, m, S) maps to (w, e^{-t} m, e^{-2t} S + (1-e^{-2t}) I).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    decay = math.exp(-t)
    d = m0.dim
    covs = decay ** 2 * m0.covariances + (1.0 - decay ** 2) * np.eye(d)
    return GaussianMixture(m0.weights.copy(), decay * m0.means, covs)


# drift coefficients (a, c): grad V = a x and grad W = c z for the
# quadratic interacting models; mean-field drift is -a Y - c (Y - mean_t)
MEANFIELD_COEFFS: Dict[str, Tuple[float, float]] = {
    "B": (1.0, -0.25),
    "F": (1.0, 1.0),
}


def quadratic_meanfield_marginal(model_id: str, m0: GaussianMixture,
                                 t: float) -> GaussianMixture:
    """Exact mixture marginal of the mean-field dynamics for Models B and F.

    The drift is linear given the running mean, so a Gaussian mixture stays
    one: the overall mean contracts at rate a, each component mean relaxes to
    it at rate a + c, and every component covariance solves
    S' = -2 (a + c) S + 2 I.
    """
    if model_id not in MEANFIELD_COEFFS:
        raise ValueError(f"no quadratic mean-field reference for model {model_id!r}")
    if t < 0:
        raise ValueError("t must be >= 0")
    a, c = MEANFIELD_COEFFS[model_id]
    k = a + c
    d = m0.dim
    mbar0 = m0.mean()
    mbar_t = math.exp(-a * t) * mbar0
    dev = math.exp(-k * t) * (m0.means - mbar0)
    covs = math.exp(-2.0 * k * t) * m0.covariances + (
        (1.0 - math.exp(-2.0 * k * t)) / k) * np.eye(d)
    return GaussianMixture(m0.weights.copy(), mbar_t + dev, covs)


def quadratic_meanfield_reference(model_id: str, m0: GaussianMixture,
                                  t: float) -> Tuple[np.ndarray, float]:
    """(mean, per-coordinate variance) of the mean-field law at time t."""
    mix = quadratic_meanfield_marginal(model_id, m0, t)
    return mix.mean(), float(np.trace(mix.covariance())) / mix.dim


# --- sweep records -------------------------------------------------------


@dataclass
class SweepRecord:
    """One convergence sweep: raw points plus the fitted log-log slope."""

    sweep_variable: str  # "tau" or "n_particles"
    model_id: str
    t_eval: float
    reference: str
    points: List[dict] = field(default_factory=list)
    fitted_loglog_slope: Optional[float] = None
    fitted_intercept: Optional[float] = None
    fit_on: str = "w2_squared"  # which column the slope was fitted on
    meta: dict = field(default_factory=dict)

    def add_point(self, value, replication, w2, seed, wall_ms):
        self.points.append({
            "sweep_value": float(value),
            "replication": int(replication),
            "w2": float(w2),
            "w2_squared": float(w2 * w2),
            "seed": int(seed),
            "wall_ms": float(wall_ms),
        })

    def point_means(self, column: str) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct sweep values (sorted) and the mean of ``column`` at each."""
        vals = sorted({p["sweep_value"] for p in self.points})
        means = [np.mean([p[column] for p in self.points
                          if p["sweep_value"] == v]) for v in vals]
        return np.array(vals), np.array(means)

    def fit_slope(self, column: str) -> Optional[float]:
        vals, means = self.point_means(column)
        if len(vals) < 2:
            self.fitted_loglog_slope = None
            self.fitted_intercept = None
            self.fit_on = column
            return None
        if np.ptp(np.log(vals)) == 0.0:
            raise ValueError("sweep values are all equal; slope fit is degenerate")
        slope, intercept = np.polyfit(np.log(vals), np.log(means), 1)
        self.fitted_loglog_slope = float(slope)
        self.fitted_intercept = float(intercept)
        self.fit_on = column
        return self.fitted_loglog_slope

    def sorted_points(self) -> List[dict]:
        return sorted(self.points,
                      key=lambda p: (p["sweep_value"], p["replication"]))

    def to_json_dict(self) -> dict:
        return {
            "sweep_variable": self.sweep_variable,
            "model_id": self.model_id,
            "t_eval": self.t_eval,
            "reference": self.reference,
            "fitted_loglog_slope": self.fitted_loglog_slope,
            "fitted_intercept": self.fitted_intercept,
            "fit_on": self.fit_on,
            "meta": self.meta,
            "points": self.sorted_points(),
        }


# --- tau sweep -------------------------------------------------------------


def _coupled_ou_point(v: PotentialSpec, mixture: GaussianMixture, tau: float,
                      n_steps: int, n_particles: int, seed: int,
                      tag: int) -> W2Report:
    """Chain vs a synchronously coupled exact OU sample at t = n_steps * tau.

    Both processes start from the same initial draw and consume the same
    Gaussian increments; the reference applies the exact one-step transition
    R <- e^{-tau} R + sqrt((1 - e^{-2tau}) / (2 tau)) Z, so its law at every
    step is the exact marginal while the coupling removes the Monte Carlo
    floor an independent reference draw would impose.
    """
    gen = rng_mod.stream(seed, rng_mod.INIT, tag=tag)
    X = mixture.sample(n_particles, gen)
    R = X.copy()
    decay = math.exp(-tau)
    ref_scale = math.sqrt((1.0 - decay ** 2) / (2.0 * tau))
    for k in range(n_steps):
        Z = gaussian_kick(X.shape, tau, seed, k, stream_tag=tag)
        X = v.exact_prox(X, tau) + Z
        R = decay * R + ref_scale * Z
    return w2_empirical(X, R)


def tau_sweep(model: ModelSpec, taus: List[float], n_particles: int,
              t_eval: float, replications: int, seed: int,
              dim: Optional[int] = None,
              prox_cfg: Optional[ProxConfig] = None,
              n_threads: int = 1) -> SweepRecord:
    """Run the chain at each step size and fit the rate of W2^2 in tau.

    For local runs with the quadratic confinement (Model A style) the
    reference is the exact OU mixture marginal, sampled by synchronous
    coupling.  Otherwise the reference is a fine-step self-reference with
    tau_ref = min(taus) / 5 sharing the initial draw.
    """
    taus = [float(t) for t in taus]
    if not taus or any(t <= 0 for t in taus):
        raise ValueError("taus must be positive")
    if len(taus) > 1 and len(set(taus)) == 1:
        raise ValueError("taus are all equal; the slope regression is degenerate")
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly descending")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    v, w = model.build(dim)
    mixture = model.default_mixture(dim)
    exact_ref = (not model.interacting) and v.name == "V1"

    rec = SweepRecord(
        sweep_variable="tau", model_id=model.id, t_eval=t_eval,
        reference=("exact OU mixture marginal, synchronously coupled"
                   if exact_ref else
                   f"fine-step self-reference, tau_ref = min(taus)/5 = {min(taus) / 5.0:g}"),
        meta={"n_particles": n_particles, "replications": replications,
              "seed": seed, "note": "t rounded to the nearest whole step"},
    )

    tau_ref = min(taus) / 5.0

    def one_point(job):
        tau, rep = job
        n_steps = max(1, round(t_eval / tau))
        t0 = time.perf_counter()
        if exact_ref:
            report = _coupled_ou_point(v, mixture, tau, n_steps,
                                       n_particles, seed, rep)
        else:
            report = _self_reference_point(
                v, w, mixture, tau, tau_ref, n_steps, n_particles,
                seed, rep, prox_cfg)
        return tau, rep, report.distance, 1e3 * (time.perf_counter() - t0)

    jobs = [(tau, rep) for tau in taus for rep in range(replications)]
    for tau, rep, dist, wall_ms in _run_jobs(one_point, jobs, n_threads):
        rec.add_point(tau, rep, dist, seed, wall_ms)
    rec.fit_slope("w2_squared")
    return rec


def _run_jobs(fn, jobs, n_threads):
    """Run independent sweep points, optionally on a thread pool; results
    come back in job order so aggregation stays deterministic."""
    if n_threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, jobs))


def _self_reference_point(v, w, mixture, tau, tau_ref, n_steps, n_particles,
                          seed, tag, prox_cfg) -> W2Report:
    t_actual = n_steps * tau
    n_ref = max(1, round(t_actual / tau_ref))

    def one_run(step, n_k, tag_offset):
        cfg = SchemeConfig(tau=step, n_steps=n_k, n_particles=n_particles,
                           seed=seed, stream_tag=tag + tag_offset,
                           prox_cfg=prox_cfg, record_every=max(1, n_k))
        return run_scheme(v, cfg, mixture=mixture, w=w).final_positions

    X = one_run(tau, n_steps, 0)
    R = one_run(tau_ref, n_ref, 0)  # same init stream: common starting draw
    if n_particles <= ASSIGNMENT_CAP or X.shape[1] == 1:
        return w2_empirical(X, R)
    return w2_subsampled(X, R, size=ASSIGNMENT_CAP, seed=seed, tag=tag)


# --- N sweep --------------------------------------------------------------


def n_sweep(model: ModelSpec, ns: List[int], tau: float, t_eval: float,
            replications: int, reference_n: int, seed: int,
            dim: Optional[int] = None,
            prox_cfg: Optional[ProxConfig] = None,
            n_threads: int = 1) -> SweepRecord:
    """Run the interacting chain at each particle count against a large-N
    reference run and fit the rate of W2 in N."""
    ns = [int(n) for n in ns]
    if not ns or any(n < 1 for n in ns):
        raise ValueError("ns must be positive")
    if any(a >= b for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly ascending")
    if reference_n <= max(ns):
        raise ValueError("reference_n must exceed every swept N")
    if tau <= 0 or replications < 1:
        raise ValueError("tau must be positive and replications >= 1")
    if not model.interacting:
        raise ValueError(f"model {model.id} has no interaction; N-sweep "
                         "compares interacting runs")
    v, w = model.build(dim)
    mixture = model.default_mixture(dim)
    n_steps = max(1, round(t_eval / tau))

    rec = SweepRecord(
        sweep_variable="n_particles", model_id=model.id, t_eval=t_eval,
        reference=f"self-reference run with N = {reference_n}",
        meta={"tau": tau, "replications": replications, "seed": seed,
              "reference_n": reference_n},
    )

    def one_run(n, rep):
        cfg = SchemeConfig(tau=tau, n_steps=n_steps, n_particles=n,
                           mode="interacting", seed=seed, stream_tag=rep,
                           prox_cfg=prox_cfg, record_every=max(1, n_steps))
        return run_scheme(v, cfg, mixture=mixture, w=w).final_positions

    def one_rep(rep):
        out = []
        ref_cloud = one_run(reference_n, rep)
        for n in ns:
            t0 = time.perf_counter()
            X = one_run(n, rep)
            size = min(n, ASSIGNMENT_CAP) if X.shape[1] > 1 else n
            report = w2_subsampled(X, ref_cloud, size=size, n_draws=4,
                                   seed=seed, tag=rep)
            out.append((n, rep, report.distance,
                        1e3 * (time.perf_counter() - t0)))
        return out

    for rows in _run_jobs(one_rep, list(range(replications)), n_threads):
        for n, rep, dist, wall_ms in rows:
            rec.add_point(n, rep, dist, seed, wall_ms)
    rec.fit_slope("w2")
    return rec


# --- moment traces ----------------------------------------------------------


@dataclass
class MomentTrace:
    order: float
    times: List[float]
    values: List[float]

    @property
    def supremum(self) -> float:
        return max(self.values)


def moment_trace(record: RunRecord, a: float) -> MomentTrace:
    """The (t_k, E|X_k|^a) series of a recorded run and its supremum.

    a = 2 reads the stored second moments; other orders need recorded
    positions.
    """
    if not record.times:
        raise ValueError("record holds no snapshots")
    if a == 0.0:
        return MomentTrace(a, list(record.times), [1.0] * len(record.times))
    if a == 2.0 and record.moments:
        vals = [m["second_moment"] for m in record.moments]
        return MomentTrace(a, list(record.times), vals)
    if record.positions is None:
        raise ValueError(f"moment of order {a} needs recorded positions")
    vals = [float(np.mean(np.sum(P * P, axis=1) ** (a / 2.0)))
            for P in record.positions]
    return MomentTrace(a, list(record.times), vals)
