"""Iterative reconstruction ``f_{n+1} = P Q_X (f - f_n) + f_n`` and its diagnostics.

The iteration runs on coefficient arrays: ``f_n = synthesize(c_n)`` always lies
in the space, and only the residual samples ``f(X) - f_n(X)`` touch the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import CoeffArray, DomainError, GridFunction
from .norms import lpq_grid_norm, lpq_seq_norm
from .sampling import Bupu, SamplingSet, _sample_vector, build_bupu, make_jittered, quasi_interpolant, sample_field
from .space import SISpace, project, synthesize

FLOOR_FACTOR = 100 * np.finfo(float).eps


@dataclass(frozen=True)
class IterationConfig:
    max_iters: int = 200
    tol: float = 1e-8
    divergence_guard: float = 1.05

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.divergence_guard > 1:
            raise ValueError("divergence_guard must exceed 1")


@dataclass
class ReconstructionReport:
    """Per-iteration errors ``errors[n-1] = ||f - f_n||_{L^{p,q}}`` for ``n = 1..iterations``.

    Without a reference the entries are update norms ``||f_n - f_{n-1}||`` and
    ``surrogate`` is set.
    """

    errors: list[float]
    sup_errors: list[float]
    converged: bool
    iterations: int
    coeffs: CoeffArray = field(repr=False)
    surrogate: bool = False
    stop_reason: str = ""
    reference_norm: float | None = None
    alpha_hat: float | None = None
    M_hat: float | None = None
    alpha_sup: float | None = None
    history: list[CoeffArray] | None = field(default=None, repr=False)

    @property
    def relative_errors(self) -> list[float]:
        if not self.reference_norm:
            raise ValueError("relative errors need a nonzero reference")
        return [e / self.reference_norm for e in self.errors]

    def to_json_dict(self, **extra) -> dict:
        out = {
            "converged": self.converged,
            "iterations": self.iterations,
            "alpha_hat": self.alpha_hat,
            "M_hat": self.M_hat,
            "alpha_sup": self.alpha_sup,
            "errors": list(self.errors),
            "sup_errors": list(self.sup_errors),
            "surrogate_errors": self.surrogate,
            "stop_reason": self.stop_reason,
            "reference_norm": self.reference_norm,
        }
        out.update(extra)
        return out


def fit_rate(errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares line through ``(n, log errors[n])``; returns ``(alpha_hat, M_hat)``.

    Entries below ``100 eps * errors[0]`` are floor noise and left out.
    """
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise ValueError("no errors to fit")
    n = np.arange(e.size)
    keep = e > FLOOR_FACTOR * e[0]
    if e[0] <= 0:
        keep[:] = False
    if keep.sum() < 3:
        raise ValueError(f"need at least 3 usable error entries, got {int(keep.sum())}")
    slope, intercept = np.polyfit(n[keep], np.log(e[keep]), 1)
    return float(np.exp(slope)), float(np.exp(intercept))


def _try_fit(errors):
    try:
        return fit_rate(errors)
    except ValueError:
        return None, None


def residual_step(space: SISpace, X: SamplingSet, bupu: Bupu, residual_samples: np.ndarray) -> CoeffArray:
    """Coefficients of ``P Q_X`` applied to a residual sample vector."""
    return project(space, quasi_interpolant(X, bupu, residual_samples, space.domain))


def apply_error_operator(space: SISpace, X: SamplingSet, bupu: Bupu, e: GridFunction) -> GridFunction:
    """``(I - P Q_X) e`` applied explicitly to a grid function."""
    return e - synthesize(space, residual_step(space, X, bupu, sample_field(e, X)))


def reconstruct(
    space: SISpace,
    X: SamplingSet,
    bupu: Bupu,
    samples,
    cfg: IterationConfig = IterationConfig(),
    reference: GridFunction | None = None,
    keep_history: bool = False,
) -> ReconstructionReport:
    if X.domain != space.domain:
        raise DomainError("sampling set and space live on different domains")
    if bupu.owner.shape != space.domain.shape:
        raise DomainError("partition of unity does not match the domain")
    if reference is not None and reference.domain != space.domain:
        raise DomainError("reference lives on a different domain")
    e_pq = space.exponents
    y = _sample_vector(X, samples)
    c = CoeffArray.zeros(space.domain)
    errors: list[float] = []
    sups: list[float] = []
    history = [c] if keep_history else None
    converged = False
    reason = "max_iters"
    rising = 0
    for n in range(1, cfg.max_iters + 1):
        current = synthesize(space, c)
        update = residual_step(space, X, bupu, y - sample_field(current, X))
        c = c + update
        if keep_history:
            history.append(c)
        if reference is not None:
            err = reference - synthesize(space, c)
        else:
            err = synthesize(space, update)
        errors.append(lpq_grid_norm(err, e_pq))
        sups.append(err.sup())
        if errors[-1] <= cfg.tol * errors[0]:
            converged = True
            reason = "tol"
            break
        if n > 1 and errors[-1] > cfg.divergence_guard * errors[-2]:
            rising += 1
            if rising >= 3:
                reason = "diverged"
                break
        else:
            rising = 0
    alpha, M = _try_fit(errors)
    alpha_sup, _ = _try_fit(sups)
    return ReconstructionReport(
        errors=errors,
        sup_errors=sups,
        converged=converged,
        iterations=len(errors),
        coeffs=c,
        surrogate=reference is None,
        stop_reason=reason,
        reference_norm=None if reference is None else lpq_grid_norm(reference, e_pq),
        alpha_hat=alpha,
        M_hat=M,
        alpha_sup=alpha_sup,
        history=history,
    )


@dataclass
class ContractionProbe:
    alpha_max: float
    per_trial: np.ndarray = field(repr=False)


def contraction_probe(space: SISpace, X: SamplingSet, bupu: Bupu, trials: int, seed: int) -> ContractionProbe:
    """Max over random unit-norm ``c`` of ``||(I - P Q_X) f|| / ||f||`` with ``f = synthesize(c)``.

    Trial ``t`` draws from a generator seeded with ``seed ^ t``.
    """
    e = space.exponents
    rho = []
    for t in range(trials):
        rng = np.random.default_rng(seed ^ t)
        c = CoeffArray.random(space.domain, rng)
        nc = lpq_seq_norm(c, e)
        if nc == 0:
            continue
        f = synthesize(space, c * (1.0 / nc))
        nf = lpq_grid_norm(f, e)
        if nf == 0:
            continue
        rho.append(lpq_grid_norm(apply_error_operator(space, X, bupu, f), e) / nf)
    rho = np.array(rho)
    return ContractionProbe(float(rho.max()) if rho.size else math.nan, rho)


@dataclass
class SweepRow:
    spacing: float
    eta: float
    gamma: float
    alpha_max: float
    alpha_hat: float
    converged_fraction: float


def density_sweep(
    space: SISpace,
    schedule: Sequence[tuple[float, float]],
    trials: int,
    seed: int,
    cfg: IterationConfig = IterationConfig(),
    recon_trials: int = 1,
) -> list[SweepRow]:
    """Probe contraction and reconstruct fresh random ``f`` for each ``(spacing, jitter)`` entry.

    The schedule must yield strictly increasing certified density radii.
    ``alpha_hat`` is the mean fitted rate over reconstruction trials (NaN if
    no fit was possible).
    """
    rows: list[SweepRow] = []
    last = -math.inf
    dom = space.domain
    for i, (s, eta) in enumerate(schedule):
        X = make_jittered(dom, s, eta, seed ^ (1000 + i))
        if not X.gamma > last:
            raise ValueError(
                f"schedule entry {i} (s={s}, eta={eta}) has gamma={X.gamma:.6g}, "
                f"not above the previous {last:.6g}"
            )
        last = X.gamma
        bupu = build_bupu(X)
        probe = contraction_probe(space, X, bupu, trials, seed)
        fits, ok = [], 0
        for t in range(recon_trials):
            rng = np.random.default_rng(seed ^ (2000 + t))
            c0 = CoeffArray.random(dom, rng)
            f = synthesize(space, c0)
            rep = reconstruct(space, X, bupu, sample_field(f, X), cfg, reference=f)
            ok += rep.converged
            if rep.alpha_hat is not None:
                fits.append(rep.alpha_hat)
        rows.append(SweepRow(s, eta, X.gamma, probe.alpha_max,
                             float(np.mean(fits)) if fits else math.nan, ok / recon_trials))
    return rows
