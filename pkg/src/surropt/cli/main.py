"""Command-line entry point for experiment batteries and reports."""

from __future__ import annotations

import argparse
import sys

from .. import kvdoc
from ..exceptions import ConfigError
from .approx import approx_compare_from_doc
from .config import apply_overrides, load_spec, spec_from_doc
from .registries import list_algorithms, list_models
from .runner import run_experiment
from .selfcheck import format_report, run_selfcheck


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surropt",
        description="Simulation-optimization benchmark harness.",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="replace the config's seed list with this one seed")
    parser.add_argument("--out", type=str, default=None,
                        help="output directory root")
    parser.add_argument("--workers", type=int, default=1,
                        help="concurrent experiment cells")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="set a config key; repeatable")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run a seeded experiment battery")
    p_opt.add_argument("config", help="experiment config file")

    p_approx = sub.add_parser(
        "approx-compare",
        help="compare low-rank posterior variants against the exact posterior",
    )
    p_approx.add_argument("config", nargs="?", default=None,
                          help="comparison config file (optional)")

    sub.add_parser("selfcheck", help="run the fast invariant battery")
    sub.add_parser("list-models", help="print registered model ids")
    sub.add_parser("list-algorithms", help="print registered algorithm ids")
    return parser


def _cmd_optimize(args) -> int:
    spec = load_spec(args.config, args.override)
    if args.seed is not None:
        spec.seeds = [int(args.seed)]
    if args.out is not None:
        spec.out_dir = args.out
    spec.validate()
    bundle = run_experiment(spec, workers=args.workers)
    print(f"experiment {bundle.spec_hash} -> {bundle.directory}")
    sys.stdout.write(bundle.summary_table())
    if bundle.failed:
        failures = [c for c in bundle.cells if c.error is not None]
        print(f"{len(failures)} of {len(bundle.cells)} cells failed", file=sys.stderr)
        return 1
    return 0


def _cmd_approx(args) -> int:
    doc: dict = {}
    if args.config is not None:
        with open(args.config) as fh:
            doc = kvdoc.parse(fh.read())
    apply_overrides(doc, args.override)
    if args.seed is not None:
        doc["seed"] = int(args.seed)
    report = approx_compare_from_doc(doc)
    sys.stdout.write(report.table())
    return 0


def _cmd_selfcheck(args) -> int:
    results = run_selfcheck(seed=0 if args.seed is None else args.seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "optimize":
            return _cmd_optimize(args)
        if args.command == "approx-compare":
            return _cmd_approx(args)
        if args.command == "selfcheck":
            return _cmd_selfcheck(args)
        if args.command == "list-models":
            print("\n".join(list_models()))
            return 0
        if args.command == "list-algorithms":
            print("\n".join(list_algorithms()))
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
