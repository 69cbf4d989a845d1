"""Command-line interface.

Subcommands: ``power`` (single scenario), ``sweep`` (grid over one
parameter), ``validate`` (checks only), ``oracle`` (verification
comparisons), ``serve`` (HTTP API). Exit codes: 0 success, 2 validation
error, 1 internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .design import parse_design
from .engine import (
    ScenarioSpec,
    SWEEP_PARAMS,
    compute_power,
    sweep_power,
    validate_scenario,
)
from .errors import SwdpwrError, ValidationError
from .kernels import active_backend
from .version import __version__


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--design", required=True, help="design file (tabular or 0/1 matrix)")
    p.add_argument(
        "--design-format",
        choices=("auto", "tabular", "matrix"),
        default="auto",
        help="design file layout (default: auto-detect)",
    )
    p.add_argument("--k", type=int, required=True, help="individuals per cluster-period")
    p.add_argument("--family", choices=("binomial", "gaussian"), default="binomial")
    p.add_argument("--model", choices=("conditional", "marginal"), default="conditional")
    p.add_argument("--link", choices=("identity", "log", "logit"), default="identity")
    p.add_argument("--type", choices=("cross-sectional", "cohort"), default="cross-sectional")
    p.add_argument("--meanresponse-start", type=float, default=None)
    p.add_argument("--meanresponse-end0", type=float, default=None)
    p.add_argument("--meanresponse-end1", type=float, default=None)
    p.add_argument("--effectsize-beta", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--type-i-error", type=float, default=0.05)
    p.add_argument("--alpha0", type=float, default=0.1)
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument(
        "--quad-nodes",
        type=int,
        default=None,
        help="Gauss-Hermite node count (default 30; env SWDPWR_QUAD_NODES)",
    )


def _spec_from_args(args) -> ScenarioSpec:
    with open(args.design, "r", encoding="utf-8") as fh:
        design = parse_design(fh.read(), format=args.design_format)
    return ScenarioSpec(
        K=args.k,
        design=design,
        family=args.family,
        model=args.model,
        link=args.link,
        type=args.type,
        meanresponse_start=args.meanresponse_start,
        meanresponse_end0=args.meanresponse_end0,
        meanresponse_end1=args.meanresponse_end1,
        effectsize_beta=args.effectsize_beta,
        sigma2=args.sigma2,
        typeIerror=args.type_i_error,
        alpha0=args.alpha0,
        alpha1=args.alpha1,
        alpha2=args.alpha2,
        quad_nodes=args.quad_nodes,
    )


def _print_warnings(warnings) -> None:
    for w in warnings:
        print(f"Warning [{w.code}]: {w.message}", file=sys.stderr)


def _cmd_power(args) -> int:
    report = compute_power(_spec_from_args(args))
    _print_warnings(report.warnings)
    if args.output == "json":
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.text())
    return 0


def _cmd_validate(args) -> int:
    sc = validate_scenario(_spec_from_args(args))
    _print_warnings(sc.warnings)
    print("ok")
    return 0


def _grid_from_args(args) -> list[float]:
    if args.grid:
        try:
            return [float(v) for v in args.grid.split(",") if v.strip() != ""]
        except ValueError:
            raise ValidationError("E-ENUM", f"could not parse grid {args.grid!r}")
    if args.from_ is None or args.to is None or args.steps is None:
        raise ValidationError(
            "E-MISSING", "sweep needs --grid or all of --from/--to/--steps"
        )
    if args.steps < 2:
        raise ValidationError("E-MISSING", "--steps must be at least 2")
    step = (args.to - args.from_) / (args.steps - 1)
    return [args.from_ + i * step for i in range(args.steps)]


def _cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    points = sweep_power(spec, args.param, _grid_from_args(args))
    if args.output == "json":
        print(json.dumps([pt.as_dict() for pt in points], indent=2))
        return 0
    print("param,value,power,var_beta,beta,error_code,error_message")
    for pt in points:
        if pt.report is not None:
            r = pt.report
            print(f"{args.param},{pt.value!r},{r.power!r},{r.var_beta!r},{r.beta!r},,")
        else:
            msg = (pt.error_message or "").replace('"', "'")
            print(f'{args.param},{pt.value!r},,,,{pt.error_code},"{msg}"')
    return 0


def _cmd_oracle(args) -> int:
    from . import oracle
    from .engine import validate_scenario
    from .correlation import block_eigenvalues, dense_correlation, inverse_block_correlation
    import numpy as np

    spec = _spec_from_args(args)
    sc = validate_scenario(spec)
    _print_warnings(sc.warnings)
    rows = [("check", "quantity", "analytic", "oracle", "abs_diff")]

    eig = block_eigenvalues(sc.alpha0, sc.alpha1, sc.alpha2, sc.design.J, sc.K)
    rinv = inverse_block_correlation(eig, sc.design.J, sc.K)
    if sc.design.J * sc.K <= 2000:
        R = dense_correlation(sc.alpha0, sc.alpha1, sc.alpha2, sc.design.J, sc.K)
        ident = R @ rinv.dense()
        gap = float(np.max(np.abs(ident - np.eye(sc.design.J * sc.K))))
        rows.append(("correlation-inverse", "max|R.Rinv - I|", "0", repr(gap), repr(gap)))
        trace = float(np.dot(eig.values, eig.mults))
        rows.append(
            ("eigen-trace", "sum mult*lambda", repr(float(sc.design.J * sc.K)), repr(trace),
             repr(abs(trace - sc.design.J * sc.K)))
        )

    if sc.family == "gaussian":
        closed, dense = oracle.dense_variance_crosscheck(
            sc.design, sc.K, sc.sigma2, sc.alpha0, sc.alpha1, sc.alpha2, sc.time_effects
        )
        rows.append(
            ("dense-variance", "var_beta", repr(closed), repr(dense), repr(abs(closed - dense)))
        )
        mc = oracle.mc_empirical_power_continuous(
            sc.design, sc.K, sc.sigma2, sc.alpha0, sc.alpha1, sc.alpha2,
            sc.params.beta, sc.time_effects, sc.typeIerror,
            replicates=args.replicates, seed=args.seed,
        )
        rows.append(
            ("mc-continuous", "var_beta", repr(mc.analytic_var), repr(mc.empirical_var),
             repr(abs(mc.analytic_var - mc.empirical_var)))
        )
        rows.append(
            ("mc-continuous", "power", repr(mc.analytic_power), repr(mc.empirical_power),
             repr(abs(mc.analytic_power - mc.empirical_power)))
        )
    elif sc.model == "conditional":
        from .links import get_link

        mc = oracle.mc_score_information(
            sc.design, sc.params, sc.K, get_link(sc.link), sc.quad, sc.time_effects,
            replicates=max(args.replicates, 10_000), seed=args.seed,
        )
        rows.append(
            ("mc-information", "max|z|", "0", repr(mc.max_abs_z), repr(mc.max_abs_z))
        )
    for row in rows:
        print(",".join(row))
    return 0


def _cmd_serve(args) -> int:
    from .server import serve_api

    bind = args.bind or os.environ.get("SWDPWR_BIND", "127.0.0.1:8750")
    serve_api(bind, cors_origin=args.cors_origin, time_budget=args.time_budget)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swdpwr",
        description="Power calculation for stepped wedge cluster randomized trials",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_power = sub.add_parser("power", help="compute power for one scenario")
    _add_scenario_flags(p_power)
    p_power.add_argument("--output", choices=("text", "json"), default="text")
    p_power.set_defaults(fn=_cmd_power)

    p_sweep = sub.add_parser("sweep", help="compute power across a parameter grid")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p_sweep.add_argument("--grid", default=None, help='comma-separated values, e.g. "0.1,0.2"')
    p_sweep.add_argument("--from", dest="from_", type=float, default=None)
    p_sweep.add_argument("--to", type=float, default=None)
    p_sweep.add_argument("--steps", type=int, default=None)
    p_sweep.add_argument("--output", choices=("csv", "json"), default="csv")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_val = sub.add_parser("validate", help="validate a scenario without computing")
    _add_scenario_flags(p_val)
    p_val.set_defaults(fn=_cmd_validate)

    p_orc = sub.add_parser("oracle", help="run verification oracles for a scenario")
    _add_scenario_flags(p_orc)
    p_orc.add_argument("--replicates", type=int, default=5000)
    p_orc.add_argument("--seed", type=int, default=20240801)
    p_orc.set_defaults(fn=_cmd_oracle)

    p_srv = sub.add_parser("serve", help="start the HTTP API")
    p_srv.add_argument("--bind", default=None, help="host:port (env SWDPWR_BIND)")
    p_srv.add_argument("--cors-origin", default="*")
    p_srv.add_argument("--time-budget", type=float, default=60.0,
                       help="per-request compute budget in seconds")
    p_srv.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ValidationError as err:
        print(f"Error [{err.code}]: {err.message}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"Error: {err}", file=sys.stderr)
        return 2
    except SwdpwrError as err:
        print(f"Error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
