"""Experiment configuration: one JSON document, validated before any computation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .generator import Generator
from .grid import Domain, DomainError
from .norms import Exponents
from .reconstruct import IterationConfig
from .sampling import SamplingSet, from_points, make_jittered, make_product


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingSpec:
    mode: str = "jittered"  # jittered | product | file | points
    s: float = 1.0
    eta: float = 0.125
    file: str | None = None
    points: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class SweepSpec:
    schedule: tuple[tuple[float, float], ...] = ((1.0, 0.125), (2.0, 0.25), (4.0, 0.5))
    trials: int = 20
    recon_trials: int = 1
    max_iters: int = 60


@dataclass(frozen=True)
class OscSpec:
    deltas: tuple[float, ...] = (0.5, 0.25, 0.125, 0.0625)
    refine: int = 4
    include_step: bool = True  # append the tabulation step h/refine to the delta list


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Domain = Domain()
    generator: dict = field(default_factory=lambda: {"kind": "bspline", "degree": 3})
    exponents: Exponents = Exponents()
    sampling: SamplingSpec = SamplingSpec()
    iteration: IterationConfig = IterationConfig()
    seed: int = 0
    output: str = "out"
    probe_trials: int = 20
    sweep: SweepSpec = SweepSpec()
    osc: OscSpec = OscSpec()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            dom = raw.get("domain", {})
            d = int(dom.get("d", 1))
            if d not in (1, 2):
                raise ConfigError(f"d must be 1 or 2, got {d}")
            domain = Domain(d, int(dom.get("L", 16)), float(dom.get("h", 1 / 16)))
            domain.nodes_per_unit
            ex = raw.get("exponents", {})
            p, q = float(ex.get("p", 2)), float(ex.get("q", 2))
            if not (1 <= p < math.inf and 1 <= q < math.inf):
                raise ConfigError(f"p and q must be finite and >= 1, got p={p}, q={q}")
            smp = dict(raw.get("sampling", {}))
            if smp.get("points") is not None:
                smp["points"] = tuple(tuple(float(v) for v in pt) for pt in smp["points"])
            sampling = SamplingSpec(**smp)
            if sampling.mode in ("jittered", "product"):
                ratio = domain.L / sampling.s
                if sampling.s <= 0 or abs(ratio - round(ratio)) > 1e-9:
                    raise ConfigError(f"sampling spacing s={sampling.s} does not divide L={domain.L}")
                if not 0 <= sampling.eta < sampling.s / 2:
                    raise ConfigError(f"need 0 <= eta < s/2, got eta={sampling.eta}")
            elif sampling.mode == "file":
                if not sampling.file or not Path(sampling.file).is_file():
                    raise ConfigError(f"sampling file {sampling.file!r} not found")
            elif sampling.mode == "points":
                if not sampling.points:
                    raise ConfigError("sampling mode 'points' needs a nonempty 'points' list")
            else:
                raise ConfigError(f"unknown sampling mode {sampling.mode!r}")
            it = IterationConfig(**raw.get("iteration", {}))
            seed = int(raw.get("seed", 0))
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            sw = dict(raw.get("sweep", {}))
            if "schedule" in sw:
                sw["schedule"] = tuple((float(a), float(b)) for a, b in sw["schedule"])
            osc = dict(raw.get("osc", {}))
            if "deltas" in osc:
                osc["deltas"] = tuple(float(v) for v in osc["deltas"])
            osc_spec = OscSpec(**osc)
            if any(not 0 < dl <= domain.L / 2 for dl in osc_spec.deltas):
                raise ConfigError("osc deltas must lie in (0, L/2]")
            cfg = cls(
                domain=domain,
                generator=dict(raw.get("generator", {"kind": "bspline", "degree": 3})),
                exponents=Exponents(p, q),
                sampling=sampling,
                iteration=it,
                seed=seed,
                output=str(raw.get("output", "out")),
                probe_trials=int(raw.get("probe_trials", 20)),
                sweep=SweepSpec(**sw),
                osc=osc_spec,
            )
            phi = cfg.make_generator()
            domain.check_fits(phi.support_radius)
        except ConfigError:
            raise
        except (DomainError, ValueError, TypeError, KeyError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def with_overrides(self, seed: int | None = None, output: str | None = None) -> "ExperimentConfig":
        raw = self.to_dict()
        if seed is not None:
            raw["seed"] = seed
        if output is not None:
            raw["output"] = output
        return ExperimentConfig.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "generator": dict(self.generator),
            "exponents": {"p": self.exponents.p, "q": self.exponents.q},
            "sampling": {k: v for k, v in asdict(self.sampling).items() if v is not None},
            "iteration": asdict(self.iteration),
            "seed": self.seed,
            "output": self.output,
            "probe_trials": self.probe_trials,
            "sweep": {**asdict(self.sweep), "schedule": [list(x) for x in self.sweep.schedule]},
            "osc": {**asdict(self.osc), "deltas": list(self.osc.deltas)},
        }

    def hash(self) -> str:
        """Short SHA-256 of the canonical config, excluding the output directory."""
        raw = self.to_dict()
        raw.pop("output")
        blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    # builders ------------------------------------------------------------

    def make_generator(self) -> Generator:
        return Generator.from_spec(self.generator, self.domain.d)

    def sampling_seed(self) -> int:
        return self.seed ^ 0x5EED5A3B1E

    def make_sampling_set(self) -> SamplingSet:
        s = self.sampling
        if s.mode == "jittered":
            return make_jittered(self.domain, s.s, s.eta, self.sampling_seed())
        if s.mode == "product":
            return make_product(self.domain, s.s, s.eta, self.sampling_seed())
        if s.mode == "points":
            return from_points(self.domain, np.array(s.points), mode="points")
        return SamplingSet.from_csv(Path(s.file).read_text(), self.domain)
