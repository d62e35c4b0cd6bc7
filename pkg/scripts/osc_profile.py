"""Tabulate the W(L^{1,1}) norm of the oscillation of the generator against delta.

Usage: python3 scripts/osc_profile.py [--config configs/lattice.json]
"""

import argparse
from pathlib import Path

from lpqsample.cli import osc_profile
from lpqsample.config import ExperimentConfig

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "lattice.json"))
    cfg = ExperimentConfig.load(ap.parse_args(argv).config)
    phi = cfg.make_generator()
    rows = osc_profile(cfg)
    for delta, value in rows:
        print(f"{delta:<10g} {value:.6g}")
    step = rows[-1][0]
    print(f"bound 2*Lip*h*vol at h={step:g}: {2 * phi.lipschitz_bound() * step * phi.support_volume():.6g}")


if __name__ == "__main__":
    run()
