"""Readers for the solver CLI's CSV/JSON artifacts.

This package talks to the solver only through its documented file formats:
run records (JSON, optionally embedding per-snapshot particle arrays),
sweep tables (CSV with columns sweep_value, replication, w2, w2_squared,
seed, wall_ms), and particle CSVs (header x0..x{d-1}).  Inputs are never
mutated; every loader returns fresh arrays.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np


class ArtifactError(ValueError):
    """Raised when an input file does not match the documented schema."""


@dataclass(frozen=True)
class Snapshot:
    """Particle positions at one recorded time."""

    time: float
    positions: np.ndarray  # (n, d)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def load_run_snapshots(path: Path) -> List[Snapshot]:
    """Load the (time, positions) snapshots from a run record JSON.

    Requires the record to have been produced with record_positions on;
    otherwise there is nothing to plot and an ArtifactError is raised.
    """
    try:
        record = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"cannot read run record {path}: {e}") from e
    if "positions" not in record:
        raise ArtifactError(
            f"{path} holds no particle snapshots (record_positions was off)")
    times = record.get("times")
    arrays = record["positions"]
    if not isinstance(times, list) or len(times) != len(arrays):
        raise ArtifactError(f"{path}: times and positions disagree")
    snaps = []
    for t, arr in zip(times, arrays):
        P = np.asarray(arr, dtype=float)
        if P.ndim != 2 or not np.all(np.isfinite(P)):
            raise ArtifactError(f"{path}: malformed snapshot at t={t}")
        snaps.append(Snapshot(time=float(t), positions=P))
    if not snaps:
        raise ArtifactError(f"{path}: empty snapshot list")
    return snaps


def load_particles_csv(path: Path) -> np.ndarray:
    """Load one particle CSV (header x0..x{d-1}) as an (n, d) array."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ArtifactError(f"cannot read particle CSV {path}: {e}") from e
    return data


@dataclass(frozen=True)
class SweepTable:
    """Aggregated sweep points: replication means with standard errors."""

    values: np.ndarray      # sweep values, ascending
    mean_w2: np.ndarray
    stderr_w2: np.ndarray
    mean_w2_squared: np.ndarray
    stderr_w2_squared: np.ndarray


_SWEEP_COLUMNS = ("sweep_value", "replication", "w2", "w2_squared",
                  "seed", "wall_ms")


def load_sweep_csv(path: Path) -> SweepTable:
    """Load a sweep CSV and aggregate replications per sweep value."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or any(
                    c not in reader.fieldnames for c in _SWEEP_COLUMNS):
                raise ArtifactError(
                    f"{path}: expected columns {','.join(_SWEEP_COLUMNS)}, "
                    f"got {reader.fieldnames}")
            rows = [(float(r["sweep_value"]), float(r["w2"]),
                     float(r["w2_squared"])) for r in reader]
    except OSError as e:
        raise ArtifactError(f"cannot read sweep CSV {path}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f"{path}: malformed sweep CSV: {e}") from e
    if not rows:
        raise ArtifactError(f"{path}: sweep CSV holds no data rows")

    by_value: dict = {}
    for value, w2, w2sq in rows:
        by_value.setdefault(value, []).append((w2, w2sq))
    values = np.array(sorted(by_value), dtype=float)

    def stats(col: int):
        means, errs = [], []
        for v in values:
            samples = np.array([pair[col] for pair in by_value[v]])
            means.append(samples.mean())
            errs.append(samples.std(ddof=1) / np.sqrt(len(samples))
                        if len(samples) > 1 else 0.0)
        return np.array(means), np.array(errs)

    mean_w2, stderr_w2 = stats(0)
    mean_sq, stderr_sq = stats(1)
    return SweepTable(values=values, mean_w2=mean_w2, stderr_w2=stderr_w2,
                      mean_w2_squared=mean_sq, stderr_w2_squared=stderr_sq)
