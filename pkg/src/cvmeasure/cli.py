"""Command-line front end: ``simulate``, ``figure`` and ``oracle-check``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .oracle_check import run_oracle_check
from .scenario import PRESETS, ConfigError, figure_preset, load_config, rows_to_csv, run_scenario, write_curves

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_FLAGGED = 3


def _simulate(args) -> int:
    cfg = load_config(args.config)
    rows = run_scenario(cfg, jobs=args.jobs)
    text = rows_to_csv(rows, cfg, Path(args.config).stem)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    flagged = [r for r in rows if r.flagged]
    if flagged:
        print(f"warning: {len(flagged)} of {len(rows)} rows carry validity flags", file=sys.stderr)
        if args.strict:
            return EXIT_FLAGGED
    return EXIT_OK


def _figure(args) -> int:
    curves = figure_preset(args.preset, jobs=args.jobs)
    for path in write_curves(curves, args.out_dir):
        print(path)
    return EXIT_OK


def _oracle(args) -> int:
    report = run_oracle_check(max_strength=args.max_strength, n_max=args.nmax)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvmeasure", description="CV entanglement measurement simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="evaluate a scenario file and emit CSV")
    s.add_argument("config", help="scenario file of dotted key = value lines")
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--strict", action="store_true", help="exit 3 if any row carries a validity flag")
    s.add_argument("--jobs", type=int, default=1, help="threads for sweep points")
    s.set_defaults(func=_simulate)

    f = sub.add_parser("figure", help="emit the CSV curves of a figure preset")
    f.add_argument("preset", help=f"one of {', '.join(PRESETS)}")
    f.add_argument("--out-dir", default=".", help="directory for the per-curve CSV files")
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(func=_figure)

    o = sub.add_parser("oracle-check", help="cross-check Gaussian results against truncated Fock space")
    o.add_argument("--max-strength", type=float, default=0.8)
    o.add_argument("--nmax", type=int, default=40)
    o.set_defaults(func=_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
