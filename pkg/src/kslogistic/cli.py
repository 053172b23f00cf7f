"""Command-line front end.

Subcommands:
  run          one configured run + all bound checks (exit 0 iff they pass)
  sweep        a (chi, mu) grid of runs with a summary table and digest
  blowup       two-mass study in the undamped regime (exit 0 either way)
  bounds       print every derived constant for given parameters and norms
  gn-estimate  sample the interpolation-constant estimator on a grid

Exit codes: 0 success, 1 failed checks, 2 configuration error, 3 solver
error.  All floating-point output carries 17 significant digits, and every
file output embeds the config that produced it.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import solver
from .bounds import (
    InitialNorms,
    ModelParams,
    MuNonpositiveError,
    compute_constants,
    estimate_gn_constant,
)
from .config import (
    ConfigError,
    blowup_from_dict,
    experiment_from_dict,
    load_json,
    sweep_from_dict,
)
from .experiment import blowup_study, fmt17, run_experiment, sweep_grid
from .field import Domain2D

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _flat_json(pairs: list[tuple[str, object]]) -> str:
    """Deterministic flat JSON with 17-digit floats; non-finite as strings."""
    parts = []
    for key, val in pairs:
        if isinstance(val, float):
            txt = fmt17(val) if math.isfinite(val) else f'"{val!r}"'
        elif isinstance(val, bool):
            txt = "true" if val else "false"
        elif isinstance(val, (int, str)):
            txt = f'"{val}"' if isinstance(val, str) else str(val)
        else:
            raise TypeError(f"unexpected value for {key}: {val!r}")
        parts.append(f'  "{key}": {txt}')
    return "{\n" + ",\n".join(parts) + "\n}"


def _prepare_out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def cmd_run(args) -> int:
    try:
        cfg = experiment_from_dict(load_json(args.config))
        if args.seed is not None:
            from dataclasses import replace

            cfg = replace(cfg, seed=args.seed)
        if not cfg.params.mu > 0:
            raise ConfigError(
                f"run checks require mu > 0 (got mu={cfg.params.mu}); "
                "use the blowup command for the mu = 0 regime"
            )
        if cfg.solver.t_end < cfg.tau:
            raise ConfigError(
                f"t_end={cfg.solver.t_end} is shorter than the window tau={cfg.tau}; "
                "the space-time checks need at least one full window"
            )
        out_dir = _prepare_out_dir(args.out or cfg.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = run_experiment(cfg, out_dir=out_dir)
    print(f"status: {result.outcome.status}")
    for entry in result.checks:
        print(f"  {entry.name}: {entry.verdict} (margin {fmt17(entry.margin)})")
    if result.outcome.status != solver.COMPLETED:
        print(
            f"solver exited early at t={result.outcome.event_time}", file=sys.stderr
        )
        return EXIT_SOLVER
    return EXIT_OK if result.checks_pass else EXIT_CHECK_FAILED


def cmd_sweep(args) -> int:
    try:
        spec = sweep_from_dict(load_json(args.config))
        if args.seed is not None:
            from dataclasses import replace

            spec = replace(spec, base=replace(spec.base, seed=args.seed))
        out_dir = _prepare_out_dir(args.out or spec.base.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = sweep_grid(spec, out_dir, workers=args.workers)
    for row in rows:
        print(
            f"chi={row['chi']:g} mu={row['mu']:g} status={row['status']} "
            f"sup_u={fmt17(row['sup_u_linf'])} ratio_u={fmt17(row['ratio_u'])}"
        )
    print(f"summary: {out_dir / 'summary.csv'}")
    return EXIT_OK


def cmd_blowup(args) -> int:
    try:
        spec = blowup_from_dict(load_json(args.config))
        if args.seed is not None:
            from dataclasses import replace

            spec = replace(spec, base=replace(spec.base, seed=args.seed))
        out_dir = _prepare_out_dir(args.out or spec.base.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = blowup_study(spec, out_dir)
    print(f"critical mass 4*pi/chi = {fmt17(report['critical_mass'])}")
    for entry in report["runs"]:
        when = "" if entry["detected_at"] is None else f" at t={fmt17(entry['detected_at'])}"
        print(
            f"mass {fmt17(entry['mass'])}: {entry['status']}{when} "
            f"(sup |u|_inf = {fmt17(entry['sup_u_linf'])})"
        )
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        params = ModelParams(chi=args.chi, mu=args.mu, r=args.r, omega_measure=args.omega)
        u0_l2_sq = args.u0_l2_sq
        if u0_l2_sq is None:
            # Holder floor: the smallest L2 consistent with the given L1
            u0_l2_sq = args.u0_l1**2 / args.omega
        ic = InitialNorms(
            u0_l1=args.u0_l1,
            u0_l2_sq=u0_l2_sq,
            u0_l3_cubed=args.u0_l3_cubed,
            u0_linf=args.u0_linf,
            gradv0_l2_sq=args.gradv0_l2_sq,
        )
        consts = compute_constants(params, ic, args.c_gn, args.tau)
    except (MuNonpositiveError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    pairs = [(k, v) for k, v in consts.as_dict().items()]
    pairs.append(("overflow", consts.overflow))
    print(_flat_json(pairs))
    return EXIT_OK


def cmd_gn_estimate(args) -> int:
    try:
        d = Domain2D(Lx=args.lx, Ly=args.ly, nx=args.nx, ny=args.ny)
        estimate = estimate_gn_constant(d, args.samples, args.seed or 0)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(
        _flat_json(
            [
                ("estimate", estimate),
                ("safety_factor", args.safety),
                ("recommended", estimate * args.safety),
                ("samples", args.samples),
                ("seed", args.seed or 0),
            ]
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kslog",
        description="Keller-Segel-logistic simulation and bound verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_run = sub.add_parser("run", help="single run plus bound checks")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="(chi, mu) grid of runs")
    add_common(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=None, help="parallel cell runs")
    p_sweep.set_defaults(func=cmd_sweep)

    p_blow = sub.add_parser("blowup", help="two-mass study at mu = 0")
    add_common(p_blow)
    p_blow.set_defaults(func=cmd_blowup)

    p_bounds = sub.add_parser("bounds", help="print all derived constants as JSON")
    p_bounds.add_argument("--chi", type=float, required=True)
    p_bounds.add_argument("--mu", type=float, required=True)
    p_bounds.add_argument("--r", type=float, default=0.0)
    p_bounds.add_argument("--omega", type=float, required=True, help="domain measure")
    p_bounds.add_argument("--u0-l1", type=float, required=True, dest="u0_l1")
    p_bounds.add_argument(
        "--u0-l2-sq", type=float, default=None, dest="u0_l2_sq",
        help="defaults to the Holder floor u0_l1^2/omega",
    )
    p_bounds.add_argument("--u0-l3-cubed", type=float, default=0.0, dest="u0_l3_cubed")
    p_bounds.add_argument("--u0-linf", type=float, default=0.0, dest="u0_linf")
    p_bounds.add_argument("--gradv0-l2-sq", type=float, default=0.0, dest="gradv0_l2_sq")
    p_bounds.add_argument("--c-gn", type=float, required=True, dest="c_gn")
    p_bounds.add_argument("--tau", type=float, default=1.0)
    p_bounds.set_defaults(func=cmd_bounds)

    p_gn = sub.add_parser("gn-estimate", help="estimate the interpolation constant")
    p_gn.add_argument("--nx", type=int, required=True)
    p_gn.add_argument("--ny", type=int, required=True)
    p_gn.add_argument("--lx", type=float, default=1.0)
    p_gn.add_argument("--ly", type=float, default=1.0)
    p_gn.add_argument("--samples", type=int, default=500)
    p_gn.add_argument("--seed", type=int, default=0)
    p_gn.add_argument("--safety", type=float, default=2.0)
    p_gn.set_defaults(func=cmd_gn_estimate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
