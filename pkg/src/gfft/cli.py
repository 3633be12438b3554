"""Command-line entry point.

Subcommands:
  run              execute the verification suites from a JSON config
  verify SUITE     shorthand for `run --suite SUITE`
  transform apply  apply one transform to one functional from a JSON config

Exit status: 0 all rows pass, 1 a suite row failed (or quadrature did not
converge in apply mode), 2 invalid configuration.

Per-section wall-clock timings are printed to stdout as `TIMING name value`
lines; they never enter the report files, which stay byte-identical for a
fixed (config, seed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

from .config import ConfigError, RunConfig, load_config
from .cylinder import CylinderFunctional, atom_from_spec, functional_from_spec
from .grid_core import TimeGrid
from .report import (
    combined_rows,
    render_figures,
    write_algebra_csv,
    write_report,
    write_rotation_csv,
    write_summary,
    write_transform_csv,
)
from .suites import run_algebra, run_rotation, run_transform
from .transform import TransformTag, gfft, gfft_general, t_lambda_mc
from .wiener_mc import RngStream, WienerPath


def _check_seed(seed: int) -> int:
    if not (0 <= seed < 2**64):
        raise ConfigError(f"seed must be in [0, 2^64), got {seed}")
    return seed


def _emit_timings(timings: dict[str, float]) -> None:
    for name, dt in timings.items():
        print(f"TIMING {name} {dt:.3f}")


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.suite is not None:
        cfg = replace(cfg, suite=args.suite)
    if args.seed is not None:
        cfg = replace(cfg, seed=_check_seed(args.seed))
    parallel = args.parallel
    if parallel < 1:
        raise ConfigError(f"--parallel must be >= 1, got {parallel}")

    rot_rows, tr_rows, al_rows = [], [], []
    if cfg.suite in ("rotation", "all"):
        rot_rows, t = run_rotation(cfg, parallel)
        _emit_timings(t)
    if cfg.suite in ("transform", "all"):
        tr_rows, t = run_transform(cfg, parallel)
        _emit_timings(t)
    if cfg.suite in ("algebra", "all"):
        al_rows, t = run_algebra(cfg, parallel)
        _emit_timings(t)

    out = args.out
    os.makedirs(out, exist_ok=True)
    if cfg.suite in ("rotation", "all"):
        write_rotation_csv(out, rot_rows)
    if cfg.suite in ("transform", "all"):
        write_transform_csv(out, tr_rows)
    if cfg.suite in ("algebra", "all"):
        write_algebra_csv(out, al_rows)
    rows = combined_rows(rot_rows, tr_rows, al_rows)
    write_report(out, rows)
    summary_path = write_summary(out, rows)
    if args.figures:
        render_figures(out)

    with open(summary_path, "r", encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    return 0 if all(r.passed for r in rows) else 1


def _apply_defaults() -> dict:
    return {"T": 1.0, "N": 1024, "mode": "closed"}


_APPLY_KEYS = {"T", "N", "functional", "q", "h", "mode", "lambda", "n", "seed", "quadrature"}
_APPLY_QUAD_KEYS = {"eps_sequence", "rho", "r_extent", "r_points", "tol", "box_factor"}


def _load_apply_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path!r} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("apply config must be a JSON object")
    unknown = set(raw) - _APPLY_KEYS
    if unknown:
        raise ConfigError(f"unknown apply config keys: {sorted(unknown)}")
    cfg = _apply_defaults()
    cfg.update(raw)
    for key in ("functional", "q", "h"):
        if key not in cfg:
            raise ConfigError(f"apply config needs {key!r}")
    if cfg["mode"] not in ("closed", "quadrature", "mc"):
        raise ConfigError(f"mode must be closed/quadrature/mc, got {cfg['mode']!r}")
    quad = cfg.get("quadrature", {})
    if not isinstance(quad, dict):
        raise ConfigError("'quadrature' must be an object")
    unknown = set(quad) - _APPLY_QUAD_KEYS
    if unknown:
        raise ConfigError(f"unknown quadrature keys: {sorted(unknown)}")
    return cfg


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _tag_dict(q: float, h) -> dict:
    tag = TransformTag.from_parts(q, h)
    if tag.kind == "identity":
        return {"kind": "identity"}
    return {"kind": "forward", "q": tag.q}


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _apply_closed(cfg: dict, F: CylinderFunctional, h, out: str) -> int:
    try:
        G = gfft(F, float(cfg["q"]), h)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"closed mode rejected the inputs: {e}") from e
    result = {
        "mode": "closed",
        "tag": _tag_dict(float(cfg["q"]), h),
        "factors": [
            {"coeffs": [_pair(c) for c in f.coeffs], "a": _pair(f.a), "b": _pair(f.b)}
            for f in G.f.factors
        ],
    }
    path = os.path.join(out, "functional.json")
    _write_json(path, result)
    print(f"wrote {path}")
    return 0


def _apply_quadrature(cfg: dict, F: CylinderFunctional, h, out: str) -> int:
    quad = cfg.get("quadrature", {})
    eps_sequence = quad.get("eps_sequence", [1e-2, 1e-3, 1e-4])
    try:
        res = gfft_general(
            F,
            float(cfg["q"]),
            h,
            eps_sequence,
            rho=float(quad.get("rho", 1.0)),
            r_extent=quad.get("r_extent"),
            r_points=int(quad.get("r_points", 257)),
            tol=float(quad.get("tol", 1e-3)),
            box_factor=float(quad.get("box_factor", 1.0)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"quadrature mode rejected the inputs: {e}") from e
    import csv as _csv

    import numpy as np

    csv_path = os.path.join(out, "quadrature.csv")
    n = len(res.axes)
    mesh = res.meshgrid().reshape(-1, n)
    flat = res.values.reshape(-1)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = _csv.writer(fh, lineterminator="\n")
        w.writerow([f"r{j + 1}" for j in range(n)] + ["re", "im"])
        for point, val in zip(mesh, flat):
            w.writerow([format(float(r), ".17g") for r in point]
                       + [format(float(np.real(val)), ".17g"), format(float(np.imag(val)), ".17g")])
    conv_path = os.path.join(out, "convergence.json")
    _write_json(
        conv_path,
        {
            "mode": "quadrature",
            "tag": _tag_dict(float(cfg["q"]), h),
            "eps_sequence": [float(e) for e in res.eps_sequence],
            "l2_diffs": [float(d) for d in res.l2_diffs],
            "l2_norm": float(res.l2_norm),
            "tol": float(res.tol),
            "converged": bool(res.converged),
        },
    )
    print(f"wrote {csv_path}")
    print(f"wrote {conv_path}")
    if not res.converged:
        print("quadrature did not converge within tol", file=sys.stderr)
        return 1
    return 0


def _apply_mc(cfg: dict, F: CylinderFunctional, h, grid: TimeGrid, out: str) -> int:
    if "lambda" not in cfg:
        raise ConfigError("mc mode needs 'lambda'")
    lam = float(cfg["lambda"])
    if not (lam > 0 and math.isfinite(lam)):
        raise ConfigError(f"'lambda' must be a positive real, got {lam}")
    n = int(cfg.get("n", 100000))
    if n < 2:
        raise ConfigError(f"'n' must be >= 2, got {n}")
    seed = _check_seed(int(cfg.get("seed", 0)))
    try:
        est = t_lambda_mc(F, lam, h, WienerPath.zero(grid), n, RngStream(seed, 0))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"mc mode rejected the inputs: {e}") from e
    path = os.path.join(out, "estimate.json")
    _write_json(
        path,
        {
            "mode": "mc",
            "tag": _tag_dict(float(cfg["q"]), h),
            "lambda": lam,
            "n": est.n,
            "estimate": _pair(est.mean),
            "stderr": float(est.stderr),
            "seed": seed,
        },
    )
    print(f"wrote {path}")
    return 0


def _cmd_apply(args: argparse.Namespace) -> int:
    cfg = _load_apply_config(args.config)
    try:
        grid = TimeGrid(float(cfg["T"]), int(cfg["N"]))
        F = functional_from_spec(cfg["functional"], grid)
        h = atom_from_spec(cfg["h"], grid)
        q = float(cfg["q"])
        if not (q != 0 and math.isfinite(q)):
            raise ValueError(f"q must be a nonzero finite real, got {q}")
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"invalid apply config: {e}") from e
    out = args.out
    os.makedirs(out, exist_ok=True)
    if cfg["mode"] == "closed":
        return _apply_closed(cfg, F, h, out)
    if cfg["mode"] == "quadrature":
        return _apply_quadrature(cfg, F, h, out)
    return _apply_mc(cfg, F, h, grid, out)


def _add_run_flags(p: argparse.ArgumentParser, with_suite: bool) -> None:
    p.add_argument("--config", default=None, help="JSON config path (default: built-in config)")
    if with_suite:
        p.add_argument("--suite", choices=["rotation", "transform", "algebra", "all"], default=None)
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", default="gfft-out", help="report directory (default: gfft-out)")
    p.add_argument("--parallel", type=int, default=1, metavar="K", help="worker processes for MC cases")
    p.add_argument(
        "--no-figures", dest="figures", action="store_false", help="skip PNG rendering from the report CSVs"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfft", description="Gaussian-process transform verification suites")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the verification suites")
    _add_run_flags(run_p, with_suite=True)

    verify_p = sub.add_parser("verify", help="run one suite (shorthand for run --suite)")
    verify_p.add_argument("suite", choices=["rotation", "transform", "algebra", "all"])
    _add_run_flags(verify_p, with_suite=False)

    tr_p = sub.add_parser("transform", help="single-functional operations")
    tr_sub = tr_p.add_subparsers(dest="transform_command", required=True)
    apply_p = tr_sub.add_parser("apply", help="apply one transform from a JSON config")
    apply_p.add_argument("--config", required=True, help="JSON apply config path")
    apply_p.add_argument("--out", default="gfft-out", help="output directory (default: gfft-out)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("run", "verify"):
            return _cmd_run(args)
        return _cmd_apply(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
