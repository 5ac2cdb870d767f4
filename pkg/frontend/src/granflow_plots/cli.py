"""Command line for rendering figures from solver artifacts.

Usage:
    granflow-plot density  run.json out.png
    granflow-plot loglog-tau sweep_tau.csv out.png [--slope S]
    granflow-plot loglog-n   sweep_n.csv   out.png [--slope S]
    granflow-plot contour2d  run.json out.png [--times 0.05 0.25 0.45 0.95]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .artifacts import ArtifactError
from .render import PlotJob, render_job

EXIT_OK = 0
EXIT_INPUT = 2

_KIND_BY_COMMAND = {
    "density": "density_evolution",
    "loglog-tau": "loglog_tau",
    "loglog-n": "loglog_n",
    "contour2d": "contour2d",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="granflow-plot",
        description="Render figures from solver CSV/JSON artifacts.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _KIND_BY_COMMAND:
        p = sub.add_parser(command)
        p.add_argument("input", help="artifact path (run JSON or sweep CSV)")
        p.add_argument("output", help="image path (.png or .svg)")
        p.add_argument("--style-seed", type=int, default=0)
        if command.startswith("loglog"):
            p.add_argument("--slope", type=float, default=None,
                           help="overlay slope (default: theory value)")
        else:
            p.add_argument("--bandwidth", type=float, default=None,
                           help="KDE bandwidth factor (default: Scott's rule)")
        if command == "contour2d":
            p.add_argument("--times", type=float, nargs="+", default=None,
                           help="snapshot times to panel (nearest match)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(
        inputs=(Path(args.input),),
        kind=_KIND_BY_COMMAND[args.command],
        output=Path(args.output),
        overlay_slope=getattr(args, "slope", None),
        times=tuple(args.times) if getattr(args, "times", None) else None,
        bandwidth=getattr(args, "bandwidth", None),
        style_seed=args.style_seed,
    )
    try:
        out = render_job(job)
    except ArtifactError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
