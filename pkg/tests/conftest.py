import sys
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from lpqsample import Domain, Exponents, Generator, SISpace, build_bupu, reconstruct, sample_field, synthesize
from lpqsample.config import ExperimentConfig
from lpqsample.grid import CoeffArray

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture(scope="session")
def dom():
    return Domain(1, 16, 1 / 16)


@pytest.fixture(scope="session")
def hat_space(dom):
    return SISpace.build(Generator.bspline(1, 1), dom, Exponents(2, 2))


@pytest.fixture(scope="session")
def cubic_space(dom):
    return SISpace.build(Generator.bspline(3, 1), dom, Exponents(2, 2))


@pytest.fixture(scope="session")
def lattice_cfg():
    return ExperimentConfig.load(CONFIGS / "lattice.json")


@pytest.fixture(scope="session")
def lattice_run(lattice_cfg, cubic_space):
    """The acceptance configuration: jittered lattice s=1, eta=1/8, cubic generator, p=q=2."""
    cfg = lattice_cfg
    t0 = time.perf_counter()
    c0 = CoeffArray.random(cfg.domain, np.random.default_rng(cfg.seed))
    f = synthesize(cubic_space, c0)
    X = cfg.make_sampling_set()
    bupu = build_bupu(X)
    rep = reconstruct(cubic_space, X, bupu, sample_field(f, X), cfg.iteration, reference=f, keep_history=True)
    elapsed = time.perf_counter() - t0
    return {"elapsed": elapsed, "cfg": cfg, "space": cubic_space, "c0": c0, "f": f, "X": X, "bupu": bupu, "report": rep}
