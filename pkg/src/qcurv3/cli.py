"""Command-line interface: solve, verify and sweep with flat-file IO.

Exit codes: 0 success, 1 configuration or input error, 2 convergence (or
verification) failure, 3 partially failed sweep.  All floating-point
output is printed with 17 significant digits so values round-trip
exactly.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, QCurvError
from .euclidean import RadialProfile
from .minimizer import SolverConfig
from .pipeline import (
    KIND_CONSTRUCTED,
    KIND_SPHERICAL,
    SolutionRecord,
    build_record,
    solve_record,
    spherical_record,
)
from .report import profile_figure, sweep_figure
from .sphere import SPHERE_VOLUME, ZonalField
from .verify import CheckTolerances, report_for_record

PROFILE_COLUMNS = ("r", "u", "v", "delta_u", "scalar_curvature")
SWEEP_COLUMNS = ("mu", "V", "alpha", "pohozaev_lhs", "pohozaev_rhs",
                 "el_residual", "volume_margin")
SOLUTION_SCHEMA = "qcurv3.solution.v1"
REPORT_SCHEMA = "qcurv3.report.v1"
THREADS_ENV = "QCURV3_SWEEP_THREADS"

_INT_KEYS = {"degree_cap", "grid_size", "max_iter", "seed", "n_starts"}
_FLOAT_KEYS = {"mu", "gaussian_a", "tol_grad", "spherical_lambda"}
_STR_KEYS = {"out"}
_CHECK_KEYS = {f"check_{f.name}": f.name for f in dc_fields(CheckTolerances)}


def fmt(x) -> str:
    """Render one number with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits (non-finite rejected)."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {dumps_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + dumps_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    value = float(obj)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value in JSON output: {value}")
    return fmt(value)


def parse_config_file(path) -> dict:
    """Flat key=value config; '#' comments; unknown keys rejected."""
    known = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | set(_CHECK_KEYS)
    raw = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key=value, got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, value: str):
    try:
        if key in _INT_KEYS or _CHECK_KEYS.get(key) == "beckner_samples":
            return int(value)
        if key in _STR_KEYS:
            return value
        return float(value)
    except ValueError:
        raise ValueError(f"key {key!r}: cannot parse {value!r}") from None


def tolerances_from_config(raw: dict) -> CheckTolerances:
    """Check-threshold overrides from a parsed config (solver keys ignored)."""
    values = {key: _convert(key, val) for key, val in raw.items()}
    overrides = {_CHECK_KEYS[k]: v for k, v in values.items() if k in _CHECK_KEYS}
    return CheckTolerances(**overrides)


def build_run(raw: dict):
    """Split a parsed config into (SolverConfig|None, lam|None, tolerances, extras)."""
    values = {key: _convert(key, val) for key, val in raw.items()}
    overrides = {_CHECK_KEYS[k]: v for k, v in values.items() if k in _CHECK_KEYS}
    tolerances = CheckTolerances(**overrides)
    extras = {"out": values.get("out")}
    lam = values.get("spherical_lambda")
    cfg_kwargs = {k: values[k] for k in
                  ("degree_cap", "grid_size", "tol_grad", "max_iter", "seed", "n_starts")
                  if k in values}
    if lam is not None:
        if lam <= 0.0:
            raise ValueError("key 'spherical_lambda': must be positive")
        return None, lam, tolerances, extras | {"cfg_kwargs": cfg_kwargs}
    for required in ("mu", "gaussian_a"):
        if required not in values:
            raise ValueError(f"key {required!r}: missing")
    try:
        config = SolverConfig(mu=values["mu"], gaussian_a=values["gaussian_a"], **cfg_kwargs)
        config.require_minimizable()
    except ValueError as err:
        raise ValueError(_name_offender(str(err))) from None
    if config.gaussian_a == 0.0:
        raise ValueError("key 'gaussian_a': must be positive for a constructed solve")
    return config, None, tolerances, extras | {"cfg_kwargs": cfg_kwargs}


def _name_offender(message: str) -> str:
    for field in ("mu", "gaussian_a", "degree_cap", "grid_size", "tol_grad",
                  "max_iter", "seed", "n_starts"):
        if field in message:
            return f"key {field!r}: {message}"
    return message


def record_to_json(record: SolutionRecord) -> dict:
    cfg = record.config
    return {
        "schema": SOLUTION_SCHEMA,
        "kind": record.kind,
        "config": {
            "mu": cfg.mu,
            "gaussian_a": cfg.gaussian_a,
            "degree_cap": cfg.degree_cap,
            "grid_size": cfg.grid_size,
            "tol_grad": cfg.tol_grad,
            "max_iter": cfg.max_iter,
            "seed": cfg.seed,
            "n_starts": cfg.n_starts,
            "spherical_lambda": record.spherical_lambda,
        },
        "coefficients": list(record.field.coeffs),
        "normalization_constant": record.normalization,
        "objective": record.objective,
        "el_residual": record.el_residual,
        "alpha": record.alpha,
        "volume": record.volume,
        "volume_analytic": record.volume_analytic,
        "pohozaev_lhs": record.pohozaev_lhs,
        "pohozaev_rhs": record.pohozaev_rhs,
        "pohozaev_defect": record.pohozaev_defect,
        "spectral_tail_ratio": record.spectral_tail_ratio,
        "converged": record.converged,
    }


def record_from_json(doc: dict) -> SolutionRecord:
    """Rebuild a record from its JSON form.

    Only the coefficients, the configuration and the kind are trusted;
    every diagnostic (residual, volume, defects, profiles) is recomputed
    so verification never relies on self-reported numbers.
    """
    if doc.get("schema") != SOLUTION_SCHEMA:
        raise ValueError(f"unrecognized solution schema {doc.get('schema')!r}")
    cfg_doc = doc["config"]
    config = SolverConfig(
        mu=cfg_doc["mu"],
        gaussian_a=cfg_doc["gaussian_a"],
        degree_cap=cfg_doc["degree_cap"],
        grid_size=cfg_doc["grid_size"],
        tol_grad=cfg_doc["tol_grad"],
        max_iter=cfg_doc["max_iter"],
        seed=cfg_doc["seed"],
        n_starts=cfg_doc.get("n_starts", 1),
    )
    if doc["kind"] not in (KIND_SPHERICAL, KIND_CONSTRUCTED):
        raise ValueError(f"unrecognized solution kind {doc['kind']!r}")
    field = ZonalField(np.asarray(doc["coefficients"], dtype=float))
    return build_record(
        field,
        config,
        doc["kind"],
        normalization=float(doc["normalization_constant"]),
        spherical_lambda=cfg_doc.get("spherical_lambda"),
    )


def write_profiles_csv(profile: RadialProfile, path):
    lines = [",".join(PROFILE_COLUMNS)]
    for i, r in enumerate(profile.radii):
        row = [r] + [profile[name][i] for name in PROFILE_COLUMNS[1:]]
        lines.append(",".join(fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def report_to_json(report) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "overall_pass": report.overall_pass,
        "classification": report.classification,
        "checks": [
            {
                "name": c.name,
                "measured": None if not math.isfinite(c.measured) else c.measured,
                "reference": c.reference,
                "tolerance": c.tolerance,
                "passed": c.passed,
                "note": c.note,
            }
            for c in report.checks
        ],
    }


def cmd_solve(args) -> int:
    try:
        raw = parse_config_file(args.config)
        config, lam, _tol, extras = build_run(raw)
    except (OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    out_dir = Path(args.out if args.out is not None else extras.get("out") or "results")
    try:
        if lam is not None:
            kwargs = extras.get("cfg_kwargs", {})
            record = spherical_record(lam, degree_cap=kwargs.get("degree_cap", 64),
                                      grid_size=kwargs.get("grid_size", 256))
        else:
            record = solve_record(config, strict=True)
    except ConvergenceError as err:
        print(f"convergence failure: residual {err.residual:.3e} "
              f"after {err.iterations} iterations", file=sys.stderr)
        return 2
    except QCurvError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    out_dir.mkdir(parents=True, exist_ok=True)
    solution_path = out_dir / "solution.json"
    solution_path.write_text(dumps_json(record_to_json(record)) + "\n")
    csv_path = out_dir / "profiles.csv"
    write_profiles_csv(record.profiles, csv_path)
    fig_path = out_dir / "profiles.png"
    profile_figure(record.profiles, fig_path,
                   title=f"{record.kind} solution, mu={fmt(record.config.mu)}")
    print(f"wrote {solution_path}")
    print(f"wrote {csv_path}")
    print(f"wrote {fig_path}")
    return 0


def cmd_verify(args) -> int:
    import json

    tolerances = None
    try:
        if args.config is not None:
            tolerances = tolerances_from_config(parse_config_file(args.config))
        doc = json.loads(Path(args.solution).read_text())
        record = record_from_json(doc)
    except (OSError, ValueError, KeyError, TypeError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return 1
    if args.spherical:
        record.kind = KIND_SPHERICAL
    report = report_for_record(record, tolerances)
    out_path = Path(args.out) if args.out else Path(args.solution).parent / "report.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(dumps_json(report_to_json(report)) + "\n")
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"{check.name:20s} {status}  measured={fmt(check.measured)} "
              f"reference={fmt(check.reference)} tol={fmt(check.tolerance)}")
    print(f"overall: {'pass' if report.overall_pass else 'FAIL'} "
          f"({report.classification}); wrote {out_path}")
    return 0 if report.overall_pass else 2


def _sweep_row(mu: float, gaussian_a: float) -> dict:
    config = SolverConfig(mu=mu, gaussian_a=gaussian_a)
    try:
        record = solve_record(config, strict=True)
        return {
            "mu": mu,
            "V": record.volume,
            "alpha": record.alpha,
            "pohozaev_lhs": record.pohozaev_lhs,
            "pohozaev_rhs": record.pohozaev_rhs,
            "el_residual": record.el_residual,
            "volume_margin": SPHERE_VOLUME - record.volume,
            "failed": False,
        }
    except QCurvError:
        nan = float("nan")
        return {"mu": mu, "V": nan, "alpha": nan, "pohozaev_lhs": nan,
                "pohozaev_rhs": nan, "el_residual": nan, "volume_margin": nan,
                "failed": True}


def cmd_sweep(args) -> int:
    try:
        mus = [float(tok) for tok in args.mu.split(",") if tok.strip()]
    except ValueError:
        print(f"config error: cannot parse mu list {args.mu!r}", file=sys.stderr)
        return 1
    if not mus:
        print("config error: empty mu list", file=sys.stderr)
        return 1
    if any(not (0.0 < mu < 1.0) for mu in mus):
        print("config error: every mu must lie in (0, 1)", file=sys.stderr)
        return 1
    if args.a <= 0.0:
        print("config error: a must be positive", file=sys.stderr)
        return 1
    mus = sorted(mus)

    threads = int(os.environ.get(THREADS_ENV, "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda m: _sweep_row(m, args.a), mus))
    else:
        rows = [_sweep_row(mu, args.a) for mu in mus]

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(fmt(row[col]) for col in SWEEP_COLUMNS))
    out_path.write_text("\n".join(lines) + "\n")
    fig_path = out_path.with_suffix(".png")
    sweep_figure(rows, fig_path)
    print(f"wrote {out_path}")
    print(f"wrote {fig_path}")
    if any(row["failed"] for row in rows):
        print("one or more sweep rows failed (marked nan)", file=sys.stderr)
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcurv3",
        description="Construct and verify constant Q-curvature conformal metrics on R^3.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one configuration and write outputs")
    p_solve.add_argument("--config", required=True, help="flat key=value config file")
    p_solve.add_argument("--out", default=None, help="output directory")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="verify a solution JSON")
    p_verify.add_argument("--solution", required=True, help="solution.json path")
    p_verify.add_argument("--out", default=None, help="report JSON path")
    p_verify.add_argument("--config", default=None,
                          help="config file supplying check_* tolerance overrides")
    p_verify.add_argument("--spherical", action="store_true",
                          help="treat the solution as a spherical reference")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="sweep mu values at fixed a")
    p_sweep.add_argument("--mu", required=True, help="comma-separated mu list")
    p_sweep.add_argument("--a", required=True, type=float, help="Gaussian coefficient a")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
