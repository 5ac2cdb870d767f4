"""Figure rendering for solver artifacts.

Three operations, each taking already-loaded artifact data and returning a
matplotlib Figure: density evolution curves for 1D runs, log-log sweep
plots with a theoretical-slope overlay, and filled-contour panels for 2D
runs.  Density estimates use a Gaussian kernel with Scott's rule bandwidth
by default (overridable).  Inputs are never mutated, and a fixed style
seed makes output images byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import matplotlib
matplotlib.use("Agg")  # headless batch rendering; set before pyplot import
import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import gaussian_kde

from .artifacts import (ArtifactError, Snapshot, SweepTable,
                        load_run_snapshots, load_sweep_csv)

PLOT_KINDS = ("density_evolution", "loglog_tau", "loglog_n", "contour2d")

# Default overlay slopes: the τ-sweep plots squared distance against the
# step size (theory: order one), the N-sweep plots distance against the
# particle count (theory: order N^{-1/2}).
DEFAULT_SLOPES = {"loglog_tau": 1.0, "loglog_n": -0.5}

CONTOUR_TIMES = (0.05, 0.25, 0.45, 0.95)


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: input artifacts in, one image file out."""

    inputs: Tuple[Path, ...]
    kind: str
    output: Path
    overlay_slope: Optional[float] = None
    times: Optional[Tuple[float, ...]] = None
    bandwidth: Optional[float] = None
    style_seed: int = 0

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; "
                             f"expected one of {PLOT_KINDS}")
        if not self.inputs:
            raise ValueError("a plot job needs at least one input path")


def apply_style(style_seed: int = 0) -> None:
    """Reset matplotlib to a fixed, deterministic style.

    The seed feeds matplotlib's SVG hashing salt and the global numpy
    state so that any style-level randomness is reproducible; all other
    parameters are pinned outright.
    """
    matplotlib.rcdefaults()
    np.random.seed(style_seed & 0xFFFFFFFF)
    plt.rcParams.update({
        "figure.dpi": 100,
        "savefig.dpi": 100,
        "font.size": 10,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "svg.hashsalt": str(style_seed),
        "path.simplify": False,
    })


def _kde_1d(samples: np.ndarray, grid: np.ndarray,
            bandwidth: Optional[float]) -> np.ndarray:
    kde = gaussian_kde(samples, bw_method=bandwidth)  # None -> Scott's rule
    return kde(grid)


def plot_density_evolution(snapshots: Sequence[Snapshot],
                           bandwidth: Optional[float] = None) -> plt.Figure:
    """Density curves, one per snapshot time, on a shared 1D axis."""
    if not snapshots:
        raise ArtifactError("no snapshots to plot")
    if any(s.dim != 1 for s in snapshots):
        dims = sorted({s.dim for s in snapshots})
        raise ArtifactError(
            f"density evolution needs 1D snapshots, got dim {dims}")
    lo = min(s.positions.min() for s in snapshots)
    hi = max(s.positions.max() for s in snapshots)
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    grid = np.linspace(lo - pad, hi + pad, 512)

    fig, ax = plt.subplots(figsize=(7, 4))
    cmap = plt.get_cmap("viridis")
    denom = max(len(snapshots) - 1, 1)
    for i, snap in enumerate(snapshots):
        density = _kde_1d(snap.positions[:, 0], grid, bandwidth)
        ax.plot(grid, density, color=cmap(i / denom),
                label=f"t = {snap.time:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_loglog(table: SweepTable, kind: str,
                overlay_slope: Optional[float] = None) -> plt.Figure:
    """Mean ± standard error on log-log axes plus a reference slope line.

    kind selects the metric: "loglog_tau" plots squared distance against
    the step size, "loglog_n" plots distance against the particle count.
    The reference line is anchored at the first (smallest-value) point.
    """
    if kind not in ("loglog_tau", "loglog_n"):
        raise ArtifactError(f"not a log-log sweep kind: {kind!r}")
    if len(table.values) < 2:
        raise ArtifactError("log-log plot needs at least two sweep points")
    if kind == "loglog_tau":
        y, err = table.mean_w2_squared, table.stderr_w2_squared
        xlabel, ylabel = r"step size $\tau$", r"$W_2^2$"
    else:
        y, err = table.mean_w2, table.stderr_w2
        xlabel, ylabel = "particle count N", r"$W_2$"
    slope = DEFAULT_SLOPES[kind] if overlay_slope is None else overlay_slope

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(table.values, y, yerr=err, fmt="o-", capsize=3,
                color="tab:blue", label="measured")
    ref = y[0] * (table.values / table.values[0]) ** slope
    ax.plot(table.values, ref, "--", color="tab:orange",
            label=f"slope {slope:g} reference")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    return fig


def _nearest_snapshots(snapshots: Sequence[Snapshot],
                       times: Sequence[float]) -> List[Snapshot]:
    out = []
    for t in times:
        out.append(min(snapshots, key=lambda s: abs(s.time - t)))
    return out


def plot_contour2d(snapshots: Sequence[Snapshot],
                   times: Optional[Sequence[float]] = None,
                   bandwidth: Optional[float] = None) -> plt.Figure:
    """Filled-contour density panels, one per requested time (2D only)."""
    if not snapshots:
        raise ArtifactError("no snapshots to plot")
    if any(s.dim != 2 for s in snapshots):
        dims = sorted({s.dim for s in snapshots})
        raise ArtifactError(f"contour plot needs 2D snapshots, got dim {dims}")
    chosen = _nearest_snapshots(snapshots, times or CONTOUR_TIMES)

    all_pos = np.vstack([s.positions for s in chosen])
    lo = all_pos.min(axis=0)
    hi = all_pos.max(axis=0)
    pad = 0.05 * np.where(hi > lo, hi - lo, 1.0)
    gx = np.linspace(lo[0] - pad[0], hi[0] + pad[0], 120)
    gy = np.linspace(lo[1] - pad[1], hi[1] + pad[1], 120)
    GX, GY = np.meshgrid(gx, gy)
    grid_pts = np.vstack([GX.ravel(), GY.ravel()])

    n = len(chosen)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.4), squeeze=False)
    for ax, snap in zip(axes[0], chosen):
        kde = gaussian_kde(snap.positions.T, bw_method=bandwidth)
        Z = kde(grid_pts).reshape(GX.shape)
        ax.contourf(GX, GY, Z, levels=12, cmap="viridis")
        ax.set_title(f"t = {snap.time:g}")
        ax.set_xlabel("x0")
        ax.set_ylabel("x1")
        ax.set_aspect("equal")
    fig.tight_layout()
    return fig


def render_job(job: PlotJob) -> Path:
    """Execute one plot job: load inputs, render, save, return the path."""
    apply_style(job.style_seed)
    if job.kind == "density_evolution":
        snaps = load_run_snapshots(job.inputs[0])
        fig = plot_density_evolution(snaps, bandwidth=job.bandwidth)
    elif job.kind in ("loglog_tau", "loglog_n"):
        table = load_sweep_csv(job.inputs[0])
        fig = plot_loglog(table, job.kind, overlay_slope=job.overlay_slope)
    else:
        snaps = load_run_snapshots(job.inputs[0])
        fig = plot_contour2d(snaps, times=job.times, bandwidth=job.bandwidth)
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    # strip embedded metadata (tool version, dates) so identical inputs
    # produce identical bytes
    metadata = ({"Date": None} if out.suffix == ".svg"
                else {"Software": None} if out.suffix == ".png" else None)
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return out
