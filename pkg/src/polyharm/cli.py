"""Command-line front end.

Every JSON report has the shape::

    {"schema_version": 1, "command": ..., "config": {...}, "result": {...},
     "timestamp": "..."}

Keys are sorted, so two runs with the same configuration differ only in
``timestamp``.  Exit codes: 0 decisive verdict / PASS, 1 error / FAIL,
2 Inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .barrier import cutoff_derivative_bound, cutoff_integral_estimate, polysuperharmonic_check
from .builder import Construction, construct, verify_supersolution
from .classifier import (INCONCLUSIVE, InvalidParameters, ProblemParams, Status, SystemSpec,
                         classify_single, classify_system, region_boundary_csv)
from .profiles import Bump, Indicator, Plateau, SampledProfile, log_grid
from .radial_expr import RadialExpr
from .riesz import chain_tail_constants, decay_fit, newtonian_potential_chain

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2

COMMANDS = ("classify", "classify-system", "construct", "verify", "decay-fit", "region-csv",
            "potential", "barrier-report")

# per-command defaults for the grid flags
GRID_DEFAULTS = {
    "verify": (1e-2, 1e4, 200),
    "construct": (1e-2, 1e4, 200),
    "barrier-report": (1e-2, 1e4, 200),
    "potential": (1e-3, 1e5, 512),
}


class ConfigError(ValueError):
    pass


def _threads() -> int:
    raw = os.environ.get("POLYHARM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"POLYHARM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("POLYHARM_THREADS must be >= 1")
    return n


def _load_input(path) -> dict:
    if path is None:
        raise ConfigError("--input is required for this command")
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
    return data


def _field(d: dict, name: str, kind=float):
    if name not in d:
        raise ConfigError(f"missing field '{name}'")
    try:
        return kind(d[name])
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}' must be {kind.__name__}, got {d[name]!r}") from None


def resolve_config(args) -> dict:
    lo, hi, pts = GRID_DEFAULTS.get(args.command, (None, None, None))
    cfg = {
        "command": args.command,
        "input": args.input,
        "output": args.output,
        "grid_min": args.grid_min if args.grid_min is not None else lo,
        "grid_max": args.grid_max if args.grid_max is not None else hi,
        "grid_points": args.grid_points if args.grid_points is not None else pts,
        "tol": args.tol,
        "threads": _threads(),
        "version": __version__,
    }
    if cfg["tol"] <= 0:
        raise ConfigError("--tol must be positive")
    if cfg["grid_min"] is not None:
        if not 0 < cfg["grid_min"] < cfg["grid_max"]:
            raise ConfigError("grid bounds must satisfy 0 < grid-min < grid-max")
        if cfg["grid_points"] < 2:
            raise ConfigError("--grid-points must be >= 2")
    return cfg


def _grid(cfg) -> np.ndarray:
    return log_grid(cfg["grid_min"], cfg["grid_max"], cfg["grid_points"])


def _report(cfg: dict, result) -> str:
    body = {"schema_version": SCHEMA_VERSION, "command": cfg["command"], "config": cfg,
            "result": result, "timestamp": datetime.now(timezone.utc).isoformat()}
    return json.dumps(body, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _profile_from_spec(d: dict):
    """Radial profile from ``{"variant": ...}``: plateau, indicator, bump, shifted-power, expr, csv."""
    variant = d.get("variant")
    if variant == "plateau":
        return Plateau(_field(d, "R"))
    if variant == "indicator":
        return Indicator(float(d.get("radius", 1.0)), float(d.get("value", 1.0)))
    if variant == "bump":
        return Bump(float(d.get("radius", 1.0)))
    if variant == "shifted-power":
        return RadialExpr.shifted_power(_field(d, "a"), _field(d, "s"))
    if variant == "expr":
        return RadialExpr.from_json_list(d["terms"])
    if variant == "csv":
        tail = d.get("tail_exponent")
        return SampledProfile.from_csv(_field(d, "path", str), None if tail is None else float(tail))
    raise ConfigError(f"unknown profile variant {variant!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg, data):
    verdict = classify_single(ProblemParams.from_json_dict(data))
    code = EXIT_INCONCLUSIVE if verdict.status is Status.INCONCLUSIVE else EXIT_OK
    return verdict.to_json_dict(), code


def cmd_classify_system(cfg, data):
    verdict = classify_system(SystemSpec.from_json_dict(data))
    code = EXIT_INCONCLUSIVE if verdict.structure == INCONCLUSIVE else EXIT_OK
    return verdict.to_json_dict(), code


def _params(data) -> ProblemParams:
    if "kernel" not in data:
        data = dict(data, kernel={"variant": "riesz", "alpha": _field(data, "alpha")})
    data = dict(data, sign=data.get("sign", "plus"))
    return ProblemParams.from_json_dict(data)


def cmd_construct(cfg, data):
    if not cfg["output"]:
        raise ConfigError("construct needs --output DIR")
    cons = construct(_params(data))
    out_dir = Path(cfg["output"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "construction.json").write_text(cons.dumps() + "\n")
    cons.sample_u(_grid(cfg)).to_csv(out_dir / "u_profile.csv")
    summary = {k: v for k, v in cons.to_json_dict().items() if k not in ("chain",)}
    summary["files"] = ["construction.json", "u_profile.csv"]
    return summary, EXIT_OK, str(out_dir / "report.json")


def cmd_verify(cfg, data):
    cons = Construction.from_json_dict(data)
    cert = verify_supersolution(cons, _grid(cfg), cfg["tol"])
    return cert.to_json_dict(), EXIT_OK if cert.passed else EXIT_FAIL


def cmd_decay_fit(cfg, data):
    N = _field(data, "N", int)
    alpha = _field(data, "alpha")
    if "beta" in data:
        f = RadialExpr.shifted_power(1.0, _field(data, "beta") / 2)
    else:
        f = _profile_from_spec(data.get("profile") or {})
    window = tuple(data.get("window", (1e2, 1e6)))
    fit = decay_fit(alpha, f, N, window=window, points=int(data.get("points", 33)))
    return fit.to_json_dict(), EXIT_OK


def cmd_region_csv(cfg, data):
    samples = _field(data, "samples", int)
    if samples < 1:
        raise ConfigError("field 'samples' must be >= 1")
    p_range = (_field(data, "p_min"), _field(data, "p_max"))
    rows = region_boundary_csv(_field(data, "N", int), _field(data, "m", int), _field(data, "alpha"),
                               p_range, samples)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["p", "q", "q_min_bound", "q_sum_bound", "verdict"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue(), EXIT_OK


def cmd_potential(cfg, data):
    N, m = _field(data, "N", int), _field(data, "m", int)
    source = _profile_from_spec(data.get("source") or {})
    chain = newtonian_potential_chain(source, N, m, _grid(cfg))
    result = {"tails": chain_tail_constants(chain, N), "levels": len(chain)}
    if cfg["output"]:
        base = Path(cfg["output"])
        base.mkdir(parents=True, exist_ok=True)
        for k, w in enumerate(chain, start=1):
            w.to_csv(base / f"W{k}.csv")
        result["files"] = [f"W{k}.csv" for k in range(1, m + 1)]
        return result, EXIT_OK, str(base / "report.json")
    return result, EXIT_OK


def cmd_barrier_report(cfg, data):
    if "chain" in data:
        cons = Construction.from_json_dict(data)
    else:
        cons = construct(_params(data))
    N, m = cons.N, cons.m
    ps = polysuperharmonic_check(cons, N, m, _grid(cfg))
    ladder = cutoff_integral_estimate(cons.U(), N, m, cons.p, cons.q,
                                      data.get("R_values") if isinstance(data.get("R_values"), list) else None)
    result = {"polysuperharmonic": ps.to_json_dict(), "cutoff_ladder": ladder.to_json_dict(),
              "cutoff_derivative": cutoff_derivative_bound(N, m)}
    if cfg["output"]:
        base = Path(cfg["output"])
        base.mkdir(parents=True, exist_ok=True)
        (base / "cutoff_ladder.csv").write_text(ladder.to_csv())
        result["files"] = ["cutoff_ladder.csv"]
        code = EXIT_OK if ps.passed and ladder.status == "Bounded" else EXIT_FAIL
        return result, code, str(base / "report.json")
    return result, EXIT_OK if ps.passed and ladder.status == "Bounded" else EXIT_FAIL


HANDLERS = {
    "classify": cmd_classify,
    "classify-system": cmd_classify_system,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "decay-fit": cmd_decay_fit,
    "region-csv": cmd_region_csv,
    "potential": cmd_potential,
    "barrier-report": cmd_barrier_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyharm",
                                     description="Verdicts, constructions and diagnostics for "
                                                 "polyharmonic Choquard inequalities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", "-i", help="parameter JSON file")
        p.add_argument("--output", "-o", help="output file (directory for construct, potential, "
                                              "barrier-report); stdout when omitted")
        p.add_argument("--grid-min", type=float)
        p.add_argument("--grid-max", type=float)
        p.add_argument("--grid-points", type=int)
        p.add_argument("--tol", type=float, default=1e-8)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        data = _load_input(args.input)
        out = HANDLERS[args.command](cfg, data)
    except (ConfigError, InvalidParameters, ValueError, KeyError, ArithmeticError, OSError) as exc:
        msg = f"missing field {exc.args[0]!r}" if isinstance(exc, KeyError) else str(exc)
        print(f"polyharm {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_FAIL
    result, code = out[0], out[1]
    target = out[2] if len(out) > 2 else cfg["output"]
    if isinstance(result, str):
        _emit(result, target)
    else:
        _emit(_report(cfg, result), target)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
