"""Sweep the sampling density and report contraction and convergence per row.

Usage: python3 scripts/density_sweep.py [--config configs/lattice.json] [--out out/sweep]
"""

import argparse
import sys
from pathlib import Path

from lpqsample.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "lattice.json"))
    ap.add_argument("--out", default=str(ROOT / "out" / "sweep"))
    args = ap.parse_args(argv)
    code = main(["sweep", "--config", args.config, "--out", args.out])
    print((Path(args.out) / "sweep.csv").read_text(), end="")
    return code


if __name__ == "__main__":
    sys.exit(run())
