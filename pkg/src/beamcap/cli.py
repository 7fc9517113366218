"""Command-line entry point.

``beamcap <subcommand> [--config FILE] [options]`` runs one experiment (or
``all`` of them) and writes CSV datasets, figures, a JSON summary and a
manifest into the output directory. Flags override individual config keys;
a missing config file means the built-in defaults for the reference system.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import ConfigError, load_config
from .runner import SUBCOMMANDS, StageError, run

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamcap",
        description="Near-field LOS MIMO capacity in a truncated Hermite-Gaussian beam space.",
    )
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    descriptions = {
        "link-budget": "noise power and per-pair free-space loss summary",
        "native": "antenna-domain channel and its singular spectrum",
        "capture": "captured-power sweep over aperture size per mode",
        "project": "projection residuals of singular modes vs beam-space size",
        "beamspace": "beam-domain channel singular values (and estimation error)",
        "capacity": "iterative beam-space capacity run with trace and allocation",
        "all": "every experiment above",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=descriptions[name])
        p.add_argument("--config", help="YAML config file (defaults used when omitted)")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--seed", type=int, help="noise seed (overrides algorithm.seed)")
        p.add_argument(
            "--epsilon",
            type=float,
            help="absolute capacity convergence tolerance in bits/s/Hz",
        )
        p.add_argument(
            "--lmax-cap",
            type=int,
            dest="lmax_cap",
            help="hard cap on the maximum mode index of the capacity iteration",
        )
        p.add_argument(
            "--estimation",
            choices=("noiseless", "ls"),
            help="beam-domain channel construction: ideal compression or LS sounding",
        )
        p.add_argument(
            "--pattern",
            choices=("isotropic", "directional"),
            help="per-element gain pattern",
        )
        p.add_argument(
            "--mcs-cap",
            type=float,
            dest="mcs_cap",
            help="per-mode rate clamp in bits/s/Hz (modulation-order ceiling)",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_help()
        return _EXIT_CONFIG
    overrides = {
        "output.directory": args.out,
        "algorithm.seed": args.seed,
        "algorithm.epsilon": args.epsilon,
        "algorithm.hard_cap": args.lmax_cap,
        "algorithm.estimation": args.estimation,
        "algorithm.pattern": args.pattern,
        "algorithm.mcs_cap": args.mcs_cap,
    }
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"beamcap: config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    try:
        bundle = run(args.subcommand, config)
    except StageError as exc:
        print(f"beamcap: numerical error: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    print(f"wrote {len(bundle.files)} files to {bundle.out_dir}")
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
