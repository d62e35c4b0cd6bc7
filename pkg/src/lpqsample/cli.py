"""Command-line front end.

Exit codes: 0 success, 1 config error, 2 stability violation, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .generator import StabilityViolation, make_dual
from .grid import CoeffArray, Domain
from .norms import Exponents, amalgam_norm, osc_field
from .reconstruct import IterationConfig, contraction_probe, density_sweep, reconstruct
from .sampling import build_bupu, sample_field
from .space import SISpace, synthesize
from .svg import line_plot

log = logging.getLogger("lpqsample")

EXIT_OK, EXIT_CONFIG, EXIT_STABILITY, EXIT_DIVERGED = 0, 1, 2, 3


def _header(cfg: ExperimentConfig) -> str:
    return f"config_hash={cfg.hash()} seed={cfg.seed}"


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _out(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.output)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _reference(cfg: ExperimentConfig, space: SISpace):
    rng = np.random.default_rng(cfg.seed)
    c0 = CoeffArray.random(cfg.domain, rng)
    return c0, synthesize(space, c0)


def cmd_check_stability(cfg: ExperimentConfig) -> int:
    phi = cfg.make_generator()
    try:
        dual = make_dual(phi, cfg.domain)
    except StabilityViolation as exc:
        print(_dump_json({"config_hash": cfg.hash(), "seed": cfg.seed, "stable": False, "error": str(exc)}))
        return EXIT_STABILITY
    print(_dump_json({
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "stable": True,
        "bracket_min": dual.bracket_min,
        "bracket_max": dual.bracket_max,
        "deconvolution_residual": dual.residual,
    }))
    return EXIT_OK


def cmd_synthesize(cfg: ExperimentConfig) -> int:
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    c0, f = _reference(cfg, space)
    out = _out(cfg)
    f.save(out / "reference.bin")
    (out / "reference.csv").write_text(f.to_csv(_header(cfg)))
    (out / "coefficients.csv").write_text(c0.to_csv(_header(cfg)))
    return EXIT_OK


def cmd_sample(cfg: ExperimentConfig) -> int:
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    _, f = _reference(cfg, space)
    X = cfg.make_sampling_set()
    values = sample_field(f, X)
    out = _out(cfg)
    (out / "sampling_set.csv").write_text(X.to_csv(_header(cfg)))
    names = ["j", "k", "x"] + [f"y{i + 1}" for i in range(cfg.domain.d)] + ["value"]
    lines = [f"# {_header(cfg)} gamma={X.gamma!r}", ",".join(names)]
    for (j, k), p, v in zip(X.labels, X.points, values):
        lines.append(f"{int(j)},{int(k)}," + ",".join(f"{float(c):.17g}" for c in p) + f",{float(v):.17g}")
    (out / "samples.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_reconstruct(cfg: ExperimentConfig) -> int:
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    c0, f = _reference(cfg, space)
    X = cfg.make_sampling_set()
    bupu = build_bupu(X)
    rep = reconstruct(space, X, bupu, sample_field(f, X), cfg.iteration, reference=f)
    out = _out(cfg)
    e = cfg.exponents
    payload = rep.to_json_dict(
        gamma=X.gamma,
        p=e.p,
        q=e.q,
        seed=cfg.seed,
        config_hash=cfg.hash(),
        relative_errors=rep.relative_errors if rep.reference_norm else None,
        coefficient_error_inf=float(np.abs(rep.coeffs.values - c0.values).max()),
        separation=X.sep,
        n_samples=len(X),
    )
    (out / "report.json").write_text(_dump_json(payload))
    rows = [f"# {_header(cfg)}", "n,error,sup_error"]
    rows += [f"{n},{a!r},{b!r}" for n, (a, b) in enumerate(zip(rep.errors, rep.sup_errors), start=1)]
    (out / "errors.csv").write_text("\n".join(rows) + "\n")
    n = list(range(1, rep.iterations + 1))
    (out / "errors.svg").write_text(line_plot(
        [("L^{p,q} error", n, rep.errors), ("sup error", n, rep.sup_errors)],
        title="reconstruction error", xlabel="iteration", ylabel="error", log_y=True,
        comment=_header(cfg),
    ))
    log.info("converged=%s iterations=%d alpha_hat=%s", rep.converged, rep.iterations, rep.alpha_hat)
    return EXIT_OK if rep.converged else EXIT_DIVERGED


def cmd_sweep(cfg: ExperimentConfig) -> int:
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    it = IterationConfig(cfg.sweep.max_iters, cfg.iteration.tol, cfg.iteration.divergence_guard)
    rows = density_sweep(space, cfg.sweep.schedule, cfg.sweep.trials, cfg.seed, it, cfg.sweep.recon_trials)
    out = _out(cfg)
    lines = [f"# {_header(cfg)}", "gamma,alpha_max,alpha_hat,converged_fraction"]
    lines += [f"{r.gamma!r},{r.alpha_max!r},{r.alpha_hat!r},{r.converged_fraction!r}" for r in rows]
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    g = [r.gamma for r in rows]
    (out / "sweep.svg").write_text(line_plot(
        [("alpha_max", g, [r.alpha_max for r in rows]), ("alpha_hat", g, [r.alpha_hat for r in rows])],
        title="contraction vs density", xlabel="gamma", ylabel="alpha", comment=_header(cfg),
    ))
    return EXIT_OK


def osc_profile(cfg: ExperimentConfig) -> list[tuple[float, float]]:
    phi = cfg.make_generator()
    fine = Domain(cfg.domain.d, cfg.domain.L, cfg.domain.h / cfg.osc.refine)
    tab = phi.tabulate(fine)
    deltas = list(cfg.osc.deltas)
    if cfg.osc.include_step and fine.h not in deltas:
        deltas.append(fine.h)
    one = Exponents(1, 1)
    return [(dl, amalgam_norm(osc_field(tab, dl), one)) for dl in deltas]


def cmd_osc_profile(cfg: ExperimentConfig) -> int:
    rows = osc_profile(cfg)
    out = _out(cfg)
    lines = [f"# {_header(cfg)}", "delta,osc_amalgam_norm"] + [f"{d!r},{v!r}" for d, v in rows]
    (out / "osc_profile.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_probe(cfg: ExperimentConfig) -> int:
    space = SISpace.build(cfg.make_generator(), cfg.domain, cfg.exponents)
    X = cfg.make_sampling_set()
    probe = contraction_probe(space, X, build_bupu(X), cfg.probe_trials, cfg.seed)
    print(_dump_json({"config_hash": cfg.hash(), "seed": cfg.seed, "gamma": X.gamma,
                      "alpha_max": probe.alpha_max}))
    return EXIT_OK


COMMANDS = {
    "check-stability": cmd_check_stability,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "osc-profile": cmd_osc_profile,
    "synthesize": cmd_synthesize,
    "sample": cmd_sample,
    "probe": cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpqsample", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", default=None, help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, default=None, help="limit BLAS/OpenMP threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config).with_overrides(seed=args.seed, output=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    limit = contextlib.nullcontext()
    if args.threads:
        from threadpoolctl import threadpool_limits

        limit = threadpool_limits(limits=args.threads)
    with limit:
        try:
            return COMMANDS[args.command](cfg)
        except StabilityViolation as exc:
            print(f"stability violation: {exc}", file=sys.stderr)
            return EXIT_STABILITY


if __name__ == "__main__":
    sys.exit(main())
