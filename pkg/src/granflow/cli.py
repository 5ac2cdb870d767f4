"""Command-line entry point: runs, sweeps, and W2 computations from TOML
configs, exporting CSV/JSON artifacts for downstream plotting.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

try:  # stdlib from 3.11 on
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from .experiments import MODELS, get_model, n_sweep, tau_sweep
from .mixture import GaussianMixture, benchmark_mixture_1d, benchmark_mixture_2d
from .proximal import ProxConfig, ProxError
from .scheme import MODES, SchemeConfig, run_scheme
from .transport import ASSIGNMENT_CAP, w2_assignment, w2_sorted_1d, w2_subsampled

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

THREADS_ENV = "GRANFLOW_THREADS"


class ConfigError(Exception):
    pass


# --- serialization ----------------------------------------------------------


def format_float(x: float) -> str:
    """17-significant-digit decimal; round-trips any finite 64-bit float."""
    if not np.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 0) -> str:
    """JSON text with floats at fixed 17-significant-digit precision."""
    pad, inner = " " * indent, " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps_json(v, indent + 2) for v in obj]
        if not items:
            return "[]"
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        items = [f"{json.dumps(str(k))}: {dumps_json(v, indent + 2)}"
                 for k, v in obj.items()]
        if not items:
            return "{}"
        return "{\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_particles_csv(path: Path, positions: np.ndarray) -> None:
    d = positions.shape[1]
    lines = [",".join(f"x{i}" for i in range(d))]
    for row in positions:
        lines.append(",".join(format_float(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def read_particles_csv(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as e:
        raise ConfigError(str(e)) from e
    except ValueError as e:
        raise ConfigError(f"{path}: not a particle CSV ({e})") from e
    return data


def write_sweep_csv(path: Path, record) -> None:
    lines = ["sweep_value,replication,w2,w2_squared,seed,wall_ms"]
    for p in record.sorted_points():
        lines.append(",".join([
            format_float(p["sweep_value"]), str(p["replication"]),
            format_float(p["w2"]), format_float(p["w2_squared"]),
            str(p["seed"]), format_float(p["wall_ms"]),
        ]))
    atomic_write(path, "\n".join(lines) + "\n")


# --- config parsing ---------------------------------------------------------


def load_toml(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p, "rb") as fh:
            return tomli.load(fh)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


MIXTURE_PRESETS = {
    "paper-1d": benchmark_mixture_1d,
    "paper-2d": benchmark_mixture_2d,
}


def parse_mixture(section: Optional[dict], model_id: str,
                  dim: Optional[int]) -> Optional[GaussianMixture]:
    """Inline mixture, a named preset, or None (model default)."""
    if section is None:
        return None
    if "preset" in section:
        name = section["preset"]
        if name not in MIXTURE_PRESETS:
            raise ConfigError(f"unknown mixture preset {name!r}; "
                              f"choose from {sorted(MIXTURE_PRESETS)}")
        return MIXTURE_PRESETS[name]()
    try:
        weights = section["weights"]
        means = section["means"]
    except KeyError as e:
        raise ConfigError(f"inline mixture missing key {e}") from e
    if "covariances" in section:
        covs = np.asarray(section["covariances"], dtype=float)
    elif "variances" in section:
        covs = np.asarray(section["variances"], dtype=float)
    else:
        raise ConfigError("inline mixture needs 'covariances' or 'variances'")
    try:
        return GaussianMixture(weights, means, covs)
    except ValueError as e:
        raise ConfigError(f"bad mixture: {e}") from e


def _take(cfg: dict, key: str, typ, default=None, required: bool = False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    val = cfg[key]
    if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if typ is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if not isinstance(val, typ):
        raise ConfigError(f"key {key!r} must be {typ.__name__}, got {val!r}")
    return val


def parse_prox(section: Optional[dict], tau: float, lam: float) -> Optional[ProxConfig]:
    if section is None:
        return None
    try:
        return ProxConfig.from_epsilon(
            tau, lam,
            epsilon=_take(section, "epsilon", float),
            shrink=_take(section, "shrink", float, 0.5),
            max_iters=_take(section, "max_iters", int, 500),
        )
    except ValueError as e:
        raise ConfigError(f"bad prox settings: {e}") from e


# --- subcommands ------------------------------------------------------------


def cmd_models(args) -> int:
    rows = []
    for m in MODELS.values():
        v, w = m.build()
        comp = m.v_id if w is None else f"{m.v_id} + {m.w_id}"
        rows.append({
            "id": m.id,
            "potentials": comp,
            "label": m.label,
            "dim": m.dim,
            "lambda_v": v.lambda_convex,
            "q_v": v.growth_q,
            "lambda_w": None if w is None else w.lambda_convex,
            "q_w": None if w is None else w.growth_q,
            "default_mixture": ("three-component 2D benchmark mixture"
                                if m.dim == 2 else
                                "three-component 1D benchmark mixture"),
        })
    if args.json:
        print(dumps_json(rows))
        return EXIT_OK
    print(f"{'id':<3}{'potentials':<12}{'kind':<22}{'dim':<5}"
          f"{'lambda_V':<10}{'q_V':<7}{'lambda_W':<10}{'q_W':<7}")
    for r in rows:
        lw = "-" if r["lambda_w"] is None else f"{r['lambda_w']:g}"
        qw = "-" if r["q_w"] is None else f"{r['q_w']:g}"
        print(f"{r['id']:<3}{r['potentials']:<12}{r['label']:<22}{r['dim']:<5}"
              f"{r['lambda_v']:<10g}{r['q_v']:<7g}{lw:<10}{qw:<7}")
    return EXIT_OK


def _resolve_out(path: str, out_dir: Optional[str]) -> Path:
    p = Path(path)
    if out_dir and not p.is_absolute():
        return Path(out_dir) / p
    return p


def cmd_run(args) -> int:
    cfg = load_toml(args.config)
    model = _get_model_cfg(cfg)
    dim = _take(cfg, "dim", int)
    tau = _take(cfg, "tau", float, required=True)
    n_particles = _take(cfg, "n_particles", int, required=True)
    n_steps = _take(cfg, "n_steps", int)
    t_final = _take(cfg, "t_final", float)
    if (n_steps is None) == (t_final is None):
        raise ConfigError("exactly one of n_steps / t_final is required")
    if n_steps is None:
        n_steps = max(1, round(t_final / tau))
    seed = args.seed if args.seed is not None else _take(cfg, "seed", int, 0)
    mode = _take(cfg, "mode", str, "interacting" if
                 get_model(model).interacting else "local")

    v, w = get_model(model).build(dim)
    mix = parse_mixture(cfg.get("initial"), model, dim)
    if mix is None:
        mix = get_model(model).default_mixture(dim)
    if mix.dim != v.dim:
        raise ConfigError(f"mixture dim {mix.dim} does not match model dim {v.dim}")

    try:
        scheme_cfg = SchemeConfig(
            tau=tau, n_steps=n_steps, n_particles=n_particles, mode=mode,
            perturbation_eps=_take(cfg, "perturbation_eps", float, 0.0),
            prox_cfg=parse_prox(cfg.get("prox"), tau, v.lambda_empirical),
            seed=seed,
            record_every=_take(cfg, "record_every", int, 10),
            record_positions=_take(cfg, "record_positions", bool, False),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e

    # "local" forces particle-wise dynamics even for interacting models;
    # otherwise the model's interaction (if any) enters the joint prox
    use_w = w if mode != "local" else None
    record = run_scheme(v, scheme_cfg, mixture=mix, w=use_w)

    out = cfg.get("output", {})
    record_path = _resolve_out(_take(out, "record", str, "run.json"), args.out_dir)
    atomic_write(record_path, dumps_json(record.to_json_dict()) + "\n")
    if not args.quiet:
        print(f"wrote {record_path}")
    particles_path = _take(out, "particles", str)
    if particles_path:
        p = _resolve_out(particles_path, args.out_dir)
        write_particles_csv(p, record.final_positions)
        if not args.quiet:
            print(f"wrote {p}")
    return EXIT_OK


def _get_model_cfg(cfg: dict) -> str:
    model = _take(cfg, "model", str, required=True)
    try:
        get_model(model)
    except KeyError as e:
        raise ConfigError(str(e)) from e
    return model


def _emit_sweep(record, cfg: dict, args, default_stem: str) -> int:
    out = cfg.get("output", {})
    csv_path = _resolve_out(_take(out, "csv", str, default_stem + ".csv"),
                            args.out_dir)
    json_path = _resolve_out(_take(out, "json", str, default_stem + ".json"),
                             args.out_dir)
    write_sweep_csv(csv_path, record)
    atomic_write(json_path, dumps_json(record.to_json_dict()) + "\n")
    if not args.quiet:
        slope = record.fitted_loglog_slope
        print(f"wrote {csv_path}")
        print(f"wrote {json_path}")
        print("fitted log-log slope: " +
              ("n/a" if slope is None else format_float(slope)))
    return EXIT_OK


def cmd_sweep_tau(args) -> int:
    cfg = load_toml(args.config)
    model = get_model(_get_model_cfg(cfg))
    taus = _take(cfg, "taus", list, required=True)
    seed = args.seed if args.seed is not None else _take(cfg, "seed", int, 0)
    record = tau_sweep(
        model, taus,
        n_particles=_take(cfg, "n_particles", int, required=True),
        t_eval=_take(cfg, "t_eval", float, required=True),
        replications=_take(cfg, "replications", int, 5),
        seed=seed, dim=_take(cfg, "dim", int),
        n_threads=args.threads,
    )
    return _emit_sweep(record, cfg, args, "sweep_tau")


def cmd_sweep_n(args) -> int:
    cfg = load_toml(args.config)
    model = get_model(_get_model_cfg(cfg))
    ns = _take(cfg, "ns", list, required=True)
    seed = args.seed if args.seed is not None else _take(cfg, "seed", int, 0)
    record = n_sweep(
        model, ns,
        tau=_take(cfg, "tau", float, required=True),
        t_eval=_take(cfg, "t_eval", float, required=True),
        replications=_take(cfg, "replications", int, 5),
        reference_n=_take(cfg, "reference_n", int, required=True),
        seed=seed, dim=_take(cfg, "dim", int),
        n_threads=args.threads,
    )
    return _emit_sweep(record, cfg, args, "sweep_n")


def cmd_w2(args) -> int:
    x = read_particles_csv(Path(args.file_a))
    y = read_particles_csv(Path(args.file_b))
    if x.shape[1] != y.shape[1]:
        raise ConfigError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if args.subsample:
        report = w2_subsampled(x, y, size=args.subsample, n_draws=args.draws,
                               seed=args.seed or 0)
    else:
        if x.shape[0] != y.shape[0]:
            raise ConfigError("clouds differ in size; pass --subsample SIZE")
        if x.shape[1] == 1:
            report = w2_sorted_1d(x, y)
        elif x.shape[0] <= ASSIGNMENT_CAP:
            report = w2_assignment(x, y)
        else:
            raise ConfigError(f"more than {ASSIGNMENT_CAP} points; "
                              "pass --subsample SIZE")
    print(dumps_json({
        "w2": report.distance,
        "w2_squared": report.squared,
        "method": report.method,
        "n_points": report.n_points,
        "subsamples": report.subsamples,
    }))
    return EXIT_OK


# --- entry point ------------------------------------------------------------


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="granflow",
        description="Particle solver for confined interacting diffusions: "
                    "proximal drift steps alternated with exact heat kicks.",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out-dir", default=None,
                        help="directory prefix for relative output paths")
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help=f"worker threads for sweeps (default from "
                             f"${THREADS_ENV} or 1)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("models", help="list the model catalog")
    p.add_argument("--json", action="store_true", help="machine-readable list")
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("run", help="run a chain from a TOML config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-tau", help="step-size convergence sweep")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep_tau)

    p = sub.add_parser("sweep-n", help="particle-count convergence sweep")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("w2", help="W2 between two particle CSV files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--subsample", type=int, default=None,
                   help="estimate from exact solves on subsamples of this size")
    p.add_argument("--draws", type=int, default=8,
                   help="subsample draws to average (with --subsample)")
    p.set_defaults(func=cmd_w2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProxError, FloatingPointError, ValueError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
