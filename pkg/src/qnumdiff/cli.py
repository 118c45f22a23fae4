"""Command-line front end.

Subcommands:
  stencil   exact difference coefficients as rationals
  schedule  derived accuracy schedule for a Gevrey specification
  estimate  run a configured derivative estimation (JSON/CSV report)
  sweep     per-trial rows over an accuracy ladder (CSV)
  audit     numeric bound audits on explicit grids
  table1    method-comparison table with fitted query exponents (CSV)

Exit codes: 0 success, 1 usage or configuration error, 2 accuracy or
bound failure.  The QNUMDIFF_SEED environment variable overrides the
configured seed (an explicit --seed flag wins over both).
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from .audits import SELECTORS, audit_bounds
from .experiments import (
    ConfigError,
    audit_payload,
    load_config,
    run_experiment,
    run_sweep,
    table1_report,
)
from .pipeline import EncodingError, PrecisionInfeasibleError
from .schedule import (
    GevreySpec,
    SchedulePreconditionError,
    ScheduleRangeError,
    eps_prime,
    eps_tilde,
    h_min,
    h_th,
    n_th,
    qubit_estimate,
)
from .stencil import StencilKey, compute_stencil

STENCIL_SCHEMA = "qnumdiff.stencil/1"
SCHEDULE_SCHEMA = "qnumdiff.schedule/1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2


def _print_json(payload):
    print(json.dumps(payload, sort_keys=True, indent=2))


def _cmd_stencil(args):
    try:
        stc = compute_stencil(StencilKey(args.m, args.n))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    offsets = sorted(stc.coeffs)
    if args.format == "csv":
        print("j,numerator,denominator")
        for j in offsets:
            c = stc.coeffs[j]
            print(f"{j},{c.numerator},{c.denominator}")
        print(f"D,{stc.abs_sum.numerator},{stc.abs_sum.denominator}")
    else:
        _print_json({
            "schema": STENCIL_SCHEMA,
            "m": args.m,
            "n": args.n,
            "coefficients": [
                {"j": j,
                 "numerator": str(stc.coeffs[j].numerator),
                 "denominator": str(stc.coeffs[j].denominator)}
                for j in offsets
            ],
            "absSum": {"numerator": str(stc.abs_sum.numerator),
                       "denominator": str(stc.abs_sum.denominator)},
            "nonzeroOffsets": list(stc.nonzero_offsets()),
        })
    return EXIT_OK


def _cmd_schedule(args):
    try:
        g = GevreySpec(args.A, args.c, args.sigma)
        if args.mode == "minimal":
            n = (args.m + 1) // 2
            h = h_min(g, args.m, args.eps)
        else:
            n = n_th(g, args.m, args.eps)
            h = h_th(g, args.m, n)
        stc = compute_stencil(StencilKey(args.m, n))
        step = eps_tilde(stc, h, args.eps)
        payload = {
            "schema": SCHEDULE_SCHEMA,
            "A": args.A, "c": args.c, "sigma": args.sigma,
            "m": args.m, "eps": args.eps, "mode": args.mode,
            "epsPrime": eps_prime(g, args.m, args.eps),
            "n": n,
            "h": h,
            "epsTilde": step,
            "qubitEstimate": qubit_estimate(step, args.A + 1.0),
        }
    except (SchedulePreconditionError, ScheduleRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _print_json(payload)
    return EXIT_OK


def _apply_seed_override(config, args):
    env = os.environ.get("QNUMDIFF_SEED")
    seed = None
    if env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise ConfigError(f"QNUMDIFF_SEED must be an integer, got {env!r}") from exc
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if seed is None:
        return config
    return replace(config, seed=seed, qae=replace(config.qae, seed=seed))


def _load(args):
    config = load_config(args.config)
    config = _apply_seed_override(config, args)
    if getattr(args, "trials", None) is not None:
        config = replace(config, trials=args.trials)
    if getattr(args, "output", None) is not None:
        config = replace(config, output=args.output)
    if getattr(args, "format", None) is not None:
        config = replace(config, format=args.format)
    return config


def _cmd_estimate(args):
    config = _load(args)
    code, blob = run_experiment(config)
    sys.stdout.write(blob.decode())
    return code


def _cmd_sweep(args):
    config = _load(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",") if tok]
    _, blob = run_sweep(config, eps_list, trials=args.trials)
    if config.output:
        with open(config.output, "wb") as fh:
            fh.write(blob)
    sys.stdout.write(blob.decode())
    return EXIT_OK


def _cmd_table1(args):
    config = _load(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",") if tok]
    _, blob = table1_report(config, eps_list, qubit_budget=args.qubit_budget)
    if config.output:
        with open(config.output, "wb") as fh:
            fh.write(blob)
    sys.stdout.write(blob.decode())
    return EXIT_OK


def _cmd_audit(args):
    grid = {}
    if args.grid:
        try:
            grid = json.loads(args.grid)
        except json.JSONDecodeError as exc:
            print(f"error: --grid is not valid JSON: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if not isinstance(grid, dict):
            print("error: --grid must be a JSON object", file=sys.stderr)
            return EXIT_USAGE
    try:
        reports = audit_bounds(args.lemma, **grid)
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = audit_payload(reports)
    _print_json(payload)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qnumdiff",
        description="Estimate derivatives of expected values by "
                    "amplitude-encoded difference stencils.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stencil", help="print exact stencil coefficients")
    p.add_argument("--m", type=int, required=True, help="derivative order")
    p.add_argument("--n", type=int, required=True, help="stencil half-width")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=_cmd_stencil)

    p = sub.add_parser("schedule", help="derive (n, h, eps~) from a Gevrey spec")
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mode", choices=("minimal", "threshold"), default="threshold")
    p.set_defaults(fn=_cmd_schedule)

    p = sub.add_parser("estimate", help="run a configured estimation job")
    p.add_argument("--config", required=True, help="TOML experiment file")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("sweep", help="per-trial rows over an eps ladder (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--eps-list", required=True,
                   help="comma-separated absolute accuracies")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("audit", help="run numeric bound audits")
    p.add_argument("--lemma", choices=SELECTORS + ("all",), default="all")
    p.add_argument("--grid", help="JSON object of grid overrides")
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("table1", help="method comparison over an eps ladder (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--eps-list", required=True)
    p.add_argument("--qubit-budget", choices=("large", "small"), default="small")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(fn=_cmd_table1)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; the documented convention is
        # 1 for usage problems (2 is reserved for accuracy failures).
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionInfeasibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EncodingError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
