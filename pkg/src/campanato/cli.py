"""Command line entry point: `lab run | list-checks | export`.

Exit codes: 0 success / all hard checks pass, 1 hard-check failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import ScenarioError, export_plot_data, list_checks, run_scenario


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lab", description="Run verification scenarios and export plot data."
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="execute the checks of a scenario config")
    run_p.add_argument("config", help="path to a scenario JSON file")
    run_p.add_argument("--out", default=None, help="output directory for reports")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")

    sub.add_parser("list-checks", help="list known check ids")

    exp_p = sub.add_parser("export", help="convert a check report to CSV")
    exp_p.add_argument("report", help="path to a check report JSON")
    exp_p.add_argument(
        "--kind",
        required=True,
        choices=["ratio_table", "kernel_slice", "norm_profile"],
        help="expected export kind of the report",
    )
    exp_p.add_argument("--out", default=None, help="output CSV path")

    args = parser.parse_args(argv)
    if args.command == "run":
        return run_scenario(args.config, out_dir=args.out, seed=args.seed)
    if args.command == "list-checks":
        for name, kind in list_checks():
            print(f"{name:22s} {kind}")
        return 0
    if args.command == "export":
        try:
            out = export_plot_data(args.report, args.kind, args.out)
        except (ScenarioError, OSError, KeyError, ValueError) as exc:
            print(f"export error: {exc}", file=sys.stderr)
            return 2
        print(out)
        return 0
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
