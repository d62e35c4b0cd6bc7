"""Run the acceptance lattice reconstruction and print the error curve.

Usage: python3 scripts/run_lattice.py [--config configs/lattice.json] [--out out/lattice]
"""

import argparse
import json
import sys
from pathlib import Path

from lpqsample.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "lattice.json"))
    ap.add_argument("--out", default=str(ROOT / "out" / "lattice"))
    args = ap.parse_args(argv)
    code = main(["reconstruct", "--config", args.config, "--out", args.out])
    rep = json.loads((Path(args.out) / "report.json").read_text())
    print(f"exit={code} converged={rep['converged']} iterations={rep['iterations']} "
          f"alpha_hat={rep['alpha_hat']} alpha_sup={rep['alpha_sup']} gamma={rep['gamma']:.4f}")
    rel = rep["relative_errors"] or [None] * len(rep["errors"])
    for n, (e, r) in enumerate(zip(rep["errors"], rel)):
        print(f"{n:3d}  {e:.6e}  {r if r is None else f'{r:.3e}'}")
    return code


if __name__ == "__main__":
    sys.exit(run())
