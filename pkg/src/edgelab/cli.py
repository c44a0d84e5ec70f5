"""Command-line entry point.

    edgelab run <config> [--out DIR] [--threads N] [--seed U64] [--override k=v]...
    edgelab check [--threads N]
    edgelab export-heatmap <snapshot> <pgm>

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 threshold failure in ``check``.
"""

from __future__ import annotations

import argparse
import sys

from . import evolution, snapshots
from .config import ConfigError, load_config
from .evolution import SolverError
from .experiments import run_check_suite, run_experiment


def build_parser():
    p = argparse.ArgumentParser(prog="edgelab",
                                description="Dirac edge-state dynamics along curved interfaces")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a config-driven experiment")
    run.add_argument("config", help="config file (section.key = value lines)")
    run.add_argument("--out", default=None, help="output directory (overrides experiment.out)")
    run.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    run.add_argument("--seed", type=int, default=None, help="seed override (u64)")
    run.add_argument("--override", action="append", default=[], metavar="section.key=value",
                     help="config override, repeatable")

    chk = sub.add_parser("check", help="property-suite smoke run")
    chk.add_argument("--threads", type=int, default=1)

    exp = sub.add_parser("export-heatmap", help="render a binary snapshot as 16-bit PGM")
    exp.add_argument("snapshot")
    exp.add_argument("pgm")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads:
        evolution.set_fft_workers(threads)

    if args.command == "run":
        try:
            cfg = load_config(args.config)
            cfg.apply_overrides(args.override)
            if args.seed is not None:
                cfg.values["experiment.seed"] = args.seed
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        try:
            run_experiment(cfg, args.out)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        except SolverError as exc:
            print(f"solver failure: {exc}", file=sys.stderr)
            return 3
        print(f"run complete -> {args.out or cfg.get('experiment.out')}")
        return 0

    if args.command == "check":
        checks = run_check_suite()
        failed = 0
        for name, ok, detail in checks:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
            failed += 0 if ok else 1
        if failed:
            print(f"{failed} check(s) failed", file=sys.stderr)
            return 4
        return 0

    if args.command == "export-heatmap":
        try:
            field, _ = snapshots.read_snapshot(args.snapshot)
        except (OSError, ValueError) as exc:
            print(f"cannot read snapshot: {exc}", file=sys.stderr)
            return 2
        snapshots.export_pgm(args.pgm, field)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
