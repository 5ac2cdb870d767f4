"""Figure rendering for granflow CSV/JSON artifacts."""

from .artifacts import (ArtifactError, Snapshot, SweepTable,
                        load_particles_csv, load_run_snapshots,
                        load_sweep_csv)
from .render import (CONTOUR_TIMES, DEFAULT_SLOPES, PLOT_KINDS, PlotJob,
                     apply_style, plot_contour2d, plot_density_evolution,
                     plot_loglog, render_job)

__version__ = "0.1.0"

__all__ = [
    "ArtifactError", "Snapshot", "SweepTable", "load_particles_csv",
    "load_run_snapshots", "load_sweep_csv", "CONTOUR_TIMES",
    "DEFAULT_SLOPES", "PLOT_KINDS", "PlotJob", "apply_style",
    "plot_contour2d", "plot_density_evolution", "plot_loglog", "render_job",
]
