"""Acceptance gate for the plotting component.

Criterion: the plot scripts regenerate, from the shipped golden CSV/JSON
artifacts, the four figure analogues (density evolution, tau log-log,
N log-log, 2D contour grid) without error and with deterministic image
hashes given a fixed style seed.  Each render runs twice and both byte
hashes must agree; the hashes are also printed so drift between runs of
the suite is visible.
"""

import hashlib
from pathlib import Path

import pytest

from granflow_plots import PlotJob, render_job

GOLDEN = Path(__file__).resolve().parents[1] / "golden"
STYLE_SEED = 20260827

FIGURES = [
    ("density_evolution", "run_1d.json"),
    ("loglog_tau", "sweep_tau.csv"),
    ("loglog_n", "sweep_n.csv"),
    ("contour2d", "run_2d.json"),
]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} -- {detail}")
    assert ok, f"{name}: {detail}"


@pytest.mark.parametrize("kind,artifact", FIGURES,
                         ids=[kind for kind, _ in FIGURES])
def test_secondary_figure_regeneration(kind, artifact, tmp_path):
    src = GOLDEN / artifact
    hashes = []
    for attempt in range(2):
        out = tmp_path / f"{kind}_{attempt}.png"
        result = render_job(PlotJob(inputs=(src,), kind=kind, output=out,
                                    style_seed=STYLE_SEED))
        assert result.exists() and result.stat().st_size > 0
        hashes.append(_sha256(result))
    report(f"secondary:{kind}",
           hashes[0] == hashes[1],
           f"rendered from {artifact}; sha256 {hashes[0][:16]} "
           f"(both renders identical: {hashes[0] == hashes[1]})")
