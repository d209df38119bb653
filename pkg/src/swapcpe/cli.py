"""Command-line entry point: ``swapcpe run`` and ``swapcpe describe``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from swapcpe.environments import ReplayExhaustedError
from swapcpe.experiment import describe_instance, load_config, run_experiment, with_overrides
from swapcpe.model import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swapcpe", description="Strong/weak pull bandit experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run a configured sweep and write result files"),
                            ("describe", "print the difficulty report of the configured instance")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config (or a manifest.json from a previous run)")
        p.add_argument("--seed", type=int, help="override the base seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--threads", type=int, help="worker processes for trials")
        p.add_argument("--budget-cap", type=float, help="override the per-run cost cap")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        out = None if args.out is None else str(Path(args.out).resolve())
        config = with_overrides(config, seed=args.seed, out=out, threads=args.threads,
                                budget_cap=args.budget_cap)
        if args.command == "describe":
            sys.stdout.write(describe_instance(config))
        else:
            out = run_experiment(config)
            print(f"wrote results to {out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ReplayExhaustedError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
