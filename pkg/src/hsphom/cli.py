"""Command-line front end: ``hsphom run | validate | presets list``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import DomainError
from .phasematch import PRESETS, available_presets
from .runner import run_scenario
from .scenario import ScenarioError, shipped_scenarios, validate_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsphom", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("scenario", help="scenario file, or the name of a shipped scenario")
    run.add_argument("--out-dir", type=Path, help="output directory (overrides the scenario)")
    run.add_argument("--grid-points", type=int, help="JSA grid points per axis (overrides grid.points)")
    run.add_argument("--seed-metadata", help="free-form tag echoed into the manifest")
    run.add_argument("--workers", type=int, default=1, help="threads for sweep points (default 1)")

    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("scenario")

    presets = sub.add_parser("presets", help="crystal presets and shipped scenarios")
    presets.add_argument("action", choices=["list"])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "presets":
        for name in available_presets():
            print(f"{name}\t{PRESETS[name].description}")
        print("shipped scenarios: " + ", ".join(shipped_scenarios()))
        return EXIT_OK

    if args.command == "validate":
        diags = validate_scenario(args.scenario)
        for d in diags:
            print(d)
        if diags:
            return EXIT_CONFIG
        print("ok")
        return EXIT_OK

    if args.grid_points is not None and args.grid_points < 3:
        print("--grid-points must be at least 3", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("--workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(
            args.scenario,
            out_dir=args.out_dir,
            grid_points=args.grid_points,
            seed_metadata=args.seed_metadata,
            workers=args.workers,
        )
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"physics error in module {exc.module}: {exc.detail}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in report.outputs:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
