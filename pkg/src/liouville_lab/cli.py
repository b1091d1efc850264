"""Command line entry point: ``liouville-lab <scenario> [options] [key=value ...]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InputError, LiouvilleLabError
from .experiments import SCENARIOS, ScenarioConfig, run

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2


def build_parser():
    p = argparse.ArgumentParser(prog="liouville-lab", description="Run a numerical blow-up scenario.")
    p.add_argument("scenario", help="one of: " + ", ".join(SCENARIOS))
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--format", choices=("csv", "text"), help="output format")
    p.add_argument("overrides", nargs="*", metavar="key=value", help="config overrides, e.g. i=1..32")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    pairs = []
    try:
        if args.config is not None:
            pairs += args.config.read_text().splitlines()
        pairs += args.overrides
        if args.out is not None:
            pairs.append(f"out={args.out}")
        if args.format is not None:
            pairs.append(f"format={args.format}")
        cfg = ScenarioConfig.from_pairs(args.scenario, pairs)
    except (InputError, OSError) as exc:
        print(f"liouville-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run(cfg)
    except LiouvilleLabError as exc:
        print(f"liouville-lab: {cfg.scenario} failed: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    for c in result.claims:
        status = "ok" if c.holds else ("FAIL" if c.gating else "note")
        print(f"[{status}] {c.name} {c.detail}".rstrip())
    return EXIT_OK if result.ok else EXIT_CLAIM


if __name__ == "__main__":
    sys.exit(main())
