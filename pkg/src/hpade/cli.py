"""Command line entry point: run, report, verify.

Exit codes: 0 success, 2 config error, 3 numeric failure,
4 detector hypothesis unmet.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (ConfigError, HypothesisUnmet, RootFindingError,
                     SolveError, StructureError, WindowError)
from .runner import RunConfig, report, run, verify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_HYPOTHESIS = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hpade",
        description="Hermite-Pade row sweeps: solve, analyze, verify.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a sweep from a JSON config")
    p_run.add_argument("config", help="path to the run configuration")
    p_run.add_argument("--output-dir", default=None,
                       help="override the config output directory")
    p_rep = sub.add_parser("report", help="re-derive reports from records")
    p_rep.add_argument("run_dir")
    p_rep.add_argument("--format", default="json",
                       choices=("csv", "json", "plotdata"))
    p_ver = sub.add_parser("verify", help="re-check run invariants")
    p_ver.add_argument("run_dir")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = RunConfig.from_file(args.config)
            manifest = run(config, run_dir=args.output_dir)
            n_ok = len(manifest["records"])
            print(f"run complete: {n_ok} records in "
                  f"{args.output_dir or config.output_dir}")
            for n, msg in sorted(manifest["failures"].items(),
                                 key=lambda kv: int(kv[0])):
                print(f"  n={n} failed: {msg}")
            for note in manifest["notes"]:
                print(f"  note: {note}")
            for name, msg in sorted(manifest["analysis_errors"].items()):
                print(f"  analysis {name}: {msg}")
            if any("hypothesis" in m or "ambiguous" in m
                   for m in manifest["analysis_errors"].values()):
                return EXIT_HYPOTHESIS
            if manifest["failures"]:
                return EXIT_NUMERIC
            return EXIT_OK
        if args.command == "report":
            paths = report(args.run_dir, args.format)
            for p in paths:
                print(p)
            return EXIT_OK
        if args.command == "verify":
            failures = verify(args.run_dir)
            if failures:
                for f in failures:
                    print(f"FAIL {f}")
                return EXIT_NUMERIC
            print("all invariants hold")
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisUnmet as exc:
        print(f"hypothesis unmet: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (SolveError, RootFindingError, StructureError, WindowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
