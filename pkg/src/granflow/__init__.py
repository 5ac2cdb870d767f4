"""Particle solver for confined interacting diffusions.

The chain alternates a proximal step of the potential energy with an exact
Gaussian (heat-kernel) step, for local, interacting, and perturbed dynamics,
with exact Wasserstein-2 diagnostics and convergence-rate sweep harnesses.
"""

from .mixture import GaussianMixture, benchmark_mixture_1d, benchmark_mixture_2d
from .potentials import JointPotential, PotentialSpec, ZeroPotential, lift_psi, make_builtin
from .proximal import ProxConfig, ProxResult, prox, prox_backtracking, prox_batch, prox_joint
from .scheme import Ensemble, RunRecord, SchemeConfig, run_scheme
from .transport import W2Report, w2_assignment, w2_empirical, w2_gaussian, w2_sorted_1d, w2_subsampled
from .experiments import (
    MODELS,
    ModelSpec,
    SweepRecord,
    get_model,
    moment_trace,
    n_sweep,
    ou_exact_marginal,
    quadratic_meanfield_marginal,
    quadratic_meanfield_reference,
    tau_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "GaussianMixture", "benchmark_mixture_1d", "benchmark_mixture_2d",
    "JointPotential", "PotentialSpec", "ZeroPotential", "lift_psi", "make_builtin",
    "ProxConfig", "ProxResult", "prox", "prox_backtracking", "prox_batch", "prox_joint",
    "Ensemble", "RunRecord", "SchemeConfig", "run_scheme",
    "W2Report", "w2_assignment", "w2_empirical", "w2_gaussian",
    "w2_sorted_1d", "w2_subsampled",
    "MODELS", "ModelSpec", "SweepRecord", "get_model", "moment_trace",
    "n_sweep", "ou_exact_marginal", "quadratic_meanfield_marginal",
    "quadratic_meanfield_reference", "tau_sweep",
    "__version__",
]
