"""Command line entry point.

    riesz-verify <suite> [--system S --alpha A --beta B --d D --N N
                          --p P1,P2 --trials T --seed X --out DIR
                          --tol KEY=VALUE ...]

Runs the requested verification suite, writes ``report.json``,
``report.csv`` and any ``plotdata_*.csv`` files into the output directory,
and exits 0 when every check passes, 1 on a violation, 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from .harness import DEFAULT_SYSTEMS, SUITES, SuiteConfig, emit, run

_NEEDS_ALPHA = {"laguerre-poly", "jacobi-poly", "laguerre-func-h",
                "laguerre-func-conv", "jacobi-func"}
_NEEDS_BETA = {"jacobi-poly", "jacobi-func"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riesz-verify",
        description="numerical verification suites for vector Riesz "
                    "transforms of orthogonal expansions")
    parser.add_argument("suite", choices=SUITES)
    parser.add_argument("--system", action="append", default=None,
                        help="system tag (repeatable); default: all seven")
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--d", type=int, default=2)
    parser.add_argument("--N", type=int, default=6)
    parser.add_argument("--p", default="1.5,2,3,6",
                        help="comma-separated exponents")
    parser.add_argument("--trials", type=int, default=25)
    parser.add_argument("--seed", type=int, default=20230517)
    parser.add_argument("--out", default="reports")
    parser.add_argument("--tol", action="append", default=[],
                        metavar="KEY=VALUE", help="tolerance override (repeatable)")
    return parser


def _systems_from_args(args) -> tuple:
    if not args.system:
        return DEFAULT_SYSTEMS
    systems = []
    for tag in args.system:
        params = {}
        if tag in _NEEDS_ALPHA:
            if args.alpha is None:
                defaults = dict(DEFAULT_SYSTEMS)
                params["alpha"] = defaults[tag]["alpha"]
            else:
                params["alpha"] = args.alpha
        if tag in _NEEDS_BETA:
            if args.beta is None:
                defaults = dict(DEFAULT_SYSTEMS)
                params["beta"] = defaults[tag]["beta"]
            else:
                params["beta"] = args.beta
        systems.append((tag, params))
    return tuple(systems)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        tols = []
        for item in args.tol:
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"bad --tol {item!r}, expected KEY=VALUE")
            tols.append((key, float(value)))
        cfg = SuiteConfig(
            suite=args.suite,
            systems=_systems_from_args(args),
            d=args.d,
            N=args.N,
            p_list=tuple(float(x) for x in args.p.split(",") if x),
            trials=args.trials,
            seed=args.seed,
            tolerances=tuple(tols),
            output_dir=args.out,
        )
    except (ValueError, KeyError) as exc:
        print(f"riesz-verify: configuration error: {exc}", file=sys.stderr)
        return 2

    report, code = run(cfg)
    files = emit(report, cfg.output_dir)
    for rec in report.records:
        status = "PASS" if rec.passed else "FAIL"
        print(f"[{status}] {rec.check_id}: value={rec.value:.6g} "
              f"target={rec.target:.6g} ({rec.anchor})")
    s = report.summary
    print(f"{s['n_passed']}/{s['n_checks']} checks passed "
          f"in {report.wall_time:.1f} s; reports: {', '.join(files)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
