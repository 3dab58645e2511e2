"""
Command-line entry point.

Every experiment subcommand takes ``key=value`` assignments with the same
syntax as a configuration file, for example::

    qlink transfer length=30m kappa="1 MHz" eta=1,4

A value list sweeps that key. ``qlink sweep FILE`` runs a configuration
file. Exit codes: 0 success, 1 configuration error, 2 every point failed,
3 input/output error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .config import (EXPERIMENTS, FORMATS, build_config, load_config,
                     parse_assignments, parse_quantity)
from .errors import ConfigurationError
from .sweep import emit, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_ALL_FAILED, EXIT_IO = 0, 1, 2, 3


def _global_flags() -> argparse.ArgumentParser:
    # default=SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--tolerance", type=float, default=s,
                   help="integrator relative tolerance (default 1e-10)")
    p.add_argument("--workers", type=int, default=s, help="worker processes (default 1)")
    p.add_argument("--format", choices=FORMATS, default=s, help="dataset format (default csv)")
    p.add_argument("--out", default=s, help="dataset path (default stdout)")
    p.add_argument("--no-lamb-compensation", action="store_true", default=s,
                   help="do not detune the qubits by the Lamb shift")
    p.add_argument("--off-resonant", action="store_true", default=s,
                   help="place the nodes half a free spectral range off the link modes")
    return p


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = argparse.ArgumentParser(
        prog="qlink", parents=[flags],
        description="Single-photon protocols over a multimode waveguide link.")
    parser.add_argument("--version", action="version", version=f"qlink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENTS:
        p = sub.add_parser(kind, parents=[flags], help=f"run the {kind} experiment")
        p.add_argument("assignments", nargs="*", metavar="KEY=VALUE")
    p = sub.add_parser("sweep", parents=[flags], help="run a configuration file")
    p.add_argument("config", help="configuration file")
    return parser


def resolve(args: argparse.Namespace):
    """Turn parsed arguments into a ``SweepConfig``, flags overriding the file."""
    if args.command == "sweep":
        config = load_config(args.config)
        entries = None
    else:
        entries = parse_assignments(args.assignments, source="<command line>",
                                    allow_settings=False)
    overrides = {}
    if hasattr(args, "tolerance"):
        overrides["tolerance"] = (repr(args.tolerance), 0)
    if getattr(args, "no_lamb_compensation", False):
        overrides["lamb_compensation"] = ("false", 0)
    if getattr(args, "off_resonant", False):
        overrides["resonant"] = ("false", 0)
    if entries is not None:
        entries.update(overrides)
        config = build_config(entries, experiment=args.command, source="<command line>")
    elif overrides:
        fixed = dict(config.fixed)
        fixed.update({k: parse_quantity(k, v) for k, (v, _) in overrides.items()})
        axes = tuple((k, v) for k, v in config.axes if k not in overrides)
        config = type(config)(config.experiment, fixed, axes, config.out,
                              config.format, config.workers)
    out = getattr(args, "out", config.out)
    fmt = getattr(args, "format", config.format)
    workers = getattr(args, "workers", config.workers)
    if workers < 1:
        raise ConfigurationError("--workers must be >= 1")
    return type(config)(config.experiment, config.fixed, config.axes, out, fmt, workers)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve(args)
    except ConfigurationError as exc:
        print(f"qlink: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qlink: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_IO
    records = run_sweep(config)
    for r in records:
        if r.failed:
            print(f"qlink: point failed: {r.values['error']}", file=sys.stderr)
    try:
        emit(records, config.format, config.out, config)
    except OSError as exc:
        print(f"qlink: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if all(r.failed for r in records):
        return EXIT_ALL_FAILED
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
