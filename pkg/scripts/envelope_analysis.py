"""Compare the reconstruction error curve with its fitted geometric envelope.

Prints per-iteration step ratios errors[n+1]/errors[n] and errors[n] / (M_hat alpha_hat^n),
showing where a single fitted rate under- or over-estimates the observed decay.

Usage: python3 scripts/envelope_analysis.py [--config configs/lattice.json]
"""

import argparse
from pathlib import Path

import numpy as np

from lpqsample.config import ExperimentConfig
from lpqsample.grid import CoeffArray
from lpqsample.reconstruct import reconstruct
from lpqsample.sampling import build_bupu, sample_field
from lpqsample.space import SISpace, synthesize

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "lattice.json"))
    cfg = ExperimentConfig.load(ap.parse_args(argv).config)
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    f = synthesize(space, CoeffArray.random(cfg.domain, np.random.default_rng(cfg.seed)))
    X = cfg.make_sampling_set()
    rep = reconstruct(space, X, build_bupu(X), sample_field(f, X), cfg.iteration, reference=f)
    e = np.array(rep.errors)
    print(f"alpha_hat={rep.alpha_hat:.4f} M_hat={rep.M_hat:.4g} iterations={rep.iterations}")
    print("  n   error         step ratio   error/(M_hat alpha_hat^n)")
    for n, v in enumerate(e):
        step = f"{e[n] / e[n - 1]:.4f}" if n else "      "
        print(f"{n:3d}   {v:.6e}  {step:>10}   {v / (rep.M_hat * rep.alpha_hat**n):.3f}")


if __name__ == "__main__":
    run()
