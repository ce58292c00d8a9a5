"""Command-line entry point: ``nlslab {run,verify,smoothing,convergence,variational}``.

Exit codes: 0 success, 1 analysis failure or failed verification, 2 config
error, 3 solver abort.  Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .analysis.smoothing import EnsembleError, empirical_constant, write_smoothing_csv
from .analysis.variational import center_of_mass_report, write_variational_csv
from .conservation import invariant_drift, write_diagnostics
from .config import ConfigError, RunConfig, load_config, load_ensemble
from .dynamics import SolverError, evolve
from .spectral import write_snapshot
from .studies import convergence_study
from .verify import format_table, run_verify

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _error(kind: str, **fields) -> None:
    print(json.dumps({"error": kind, **fields}, sort_keys=True), file=sys.stderr)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g") if math.isfinite(v) else "null"
    return json.dumps(v)


def write_summary(path: Path, values: dict) -> None:
    """Flat JSON object, sorted keys, floats with 17 significant digits (NaN as null)."""
    body = ",\n".join(f"  {json.dumps(k)}: {_fmt(values[k])}" for k in sorted(values))
    path.write_text("{\n" + body + "\n}\n")


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> RunConfig:
    return load_config(args.config, dealias=True if args.dealias else None)


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    traj = evolve(cfg.initial_field(), cfg.params, cfg.solver)
    drift = invariant_drift(traj, cfg.params)
    diag = out / cfg.diagnostics_path
    diag.parent.mkdir(parents=True, exist_ok=True)
    write_diagnostics(diag, drift.quantities)
    if args.dump_fields:
        fields = out / (cfg.fields_dir or "fields")
        fields.mkdir(parents=True, exist_ok=True)
        for i, u in enumerate(traj.states):
            write_snapshot(fields / f"field_{i:06d}.csv", u)
    print(f"records={len(traj)} t_final={traj.times[-1]:.17g}")
    print(f"drift mass={drift.mass:.3e} momentum={drift.momentum:.3e} energy={drift.energy:.3e}")
    print(f"diagnostics: {diag}")
    return 0


def cmd_verify(args) -> int:
    result = run_verify(mutate_phase_sign=args.mutate_phase_sign)
    print(format_table(result))
    return 0 if result.passed else EXIT_FAILURE


def cmd_smoothing(args) -> int:
    cfg = _load(args)
    if not args.ensemble:
        raise ConfigError("--ensemble", "smoothing needs an ensemble file")
    spec = load_ensemble(args.ensemble, seed=args.seed)
    out = _out_dir(args)
    summary = {"x0": float(args.x0), "seed": spec.seed}
    for label, params in (("", cfg.params), ("_linear", replace(cfg.params, linear=True))):
        res = empirical_constant(spec, cfg.grid, params, cfg.solver, x0=args.x0)
        write_smoothing_csv(out / f"smoothing{label}.csv", res.rows)
        summary[f"empirical_constant{label}"] = float(res.constant)
        summary[f"excluded{label}"] = list(res.excluded)
        print(f"empirical_constant{label} = {res.constant:.17g} ({len(res.rows)} members, {len(res.excluded)} excluded)")
    write_summary(out / "smoothing_summary.json", summary)
    return 0


def cmd_convergence(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    exact = cfg.exact_solution if args.reference == "exact" else None
    if args.reference == "exact" and cfg.exact_solution(0.0) is None:
        raise ConfigError("initial", "no closed-form solution for --reference exact")
    study = convergence_study(cfg.initial_field(), cfg.params, cfg.solver, args.halvings, exact=exact)
    lines = ["dt,error,order"]
    print(f"integrator={cfg.solver.integrator} reference={study.reference}")
    print(f"{'dt':>14} {'error':>14} {'order':>8}")
    for dt, err, order in study.rows():
        lines.append(",".join(format(v, ".17g") for v in (dt, err, order)))
        print(f"{dt:14.6e} {err:14.6e} {order:8.4f}")
    print(f"fitted order = {study.order:.4f}")
    (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_variational(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    traj = evolve(cfg.initial_field(), cfg.params, cfg.solver)
    rep = center_of_mass_report(traj, cfg.params)
    write_variational_csv(out / "variational.csv", rep)
    summary = {
        "action": rep.action,
        "xcm_accel_max": rep.xcm_accel_max,
        "xcm_slope": rep.xcm_slope,
        "eq32_residual_max": rep.eq32_residual_max,
        "mass": rep.mass,
    }
    write_summary(out / "variational_summary.json", summary)
    for k in sorted(summary):
        print(f"{k} = {summary[k]:.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlslab", description="1D cubic NLS simulation and verification lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="run configuration (JSON)")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--dealias", action="store_true", help="apply the 2/3-rule mask")

    p = sub.add_parser("run", help="evolve a configuration and write diagnostics")
    common(p)
    p.add_argument("--dump-fields", action="store_true", help="write x,re,im snapshots at recorded times")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--mutate-phase-sign", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("smoothing", help="empirical local smoothing constant over an ensemble")
    common(p)
    p.add_argument("--ensemble", help="ensemble specification (JSON)")
    p.add_argument("--x0", type=float, default=0.0, help="observation point (default 0)")
    p.add_argument("--seed", type=int, help="override the ensemble seed")
    p.set_defaults(func=cmd_smoothing)

    p = sub.add_parser("convergence", help="time-step convergence order")
    common(p)
    p.add_argument("--halvings", type=int, default=3)
    p.add_argument("--reference", choices=("self", "exact"), default="self")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("variational", help="center of mass, action and Newton-type relation")
    common(p)
    p.set_defaults(func=cmd_variational)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not (0 <= args.seed < 2**64):
        _error("config", key="--seed", message="must be an unsigned 64-bit integer")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        _error("config", key=exc.key, message=exc.message)
        return EXIT_CONFIG
    except SolverError as exc:
        _error("solver", last_good_time=format(exc.last_good_time, ".17g"), message=str(exc))
        return EXIT_SOLVER
    except EnsembleError as exc:
        if isinstance(exc.cause, SolverError):
            _error("solver", member=exc.member_id, last_good_time=format(exc.cause.last_good_time, ".17g"), message=str(exc))
            return EXIT_SOLVER
        _error("analysis", member=exc.member_id, message=str(exc))
        return EXIT_FAILURE
    except ValueError as exc:
        _error("analysis", message=str(exc))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
