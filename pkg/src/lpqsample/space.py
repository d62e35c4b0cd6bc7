"""Shift-invariant spaces V_{p,q}(phi) and V_{p,q}(Phi) on the torus.

:class:`SISpace` carries two duals:

* ``dual``: built from the Boole-rule autocorrelation at ``refine=4``; this is
  the generator's dual g, biorthogonal to the shifts of phi under the
  refined quadrature, and its bracket is the one reported.
* ``grid_dual``: built from the rectangle-rule Gram sequence on the working
  grid. :func:`project` uses it, so that ``project(synthesize(c)) == c`` up
  to roundoff and ``P = synthesize o project`` is an exact idempotent on
  grid functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .generator import (
    DualData,
    Generator,
    StabilityViolation,
    analysis,
    cross_correlation,
    make_dual,
    semi_discrete_conv,
    xi_points,
)
from .grid import CoeffArray, Domain, DomainError, GridFunction
from .norms import Exponents, amalgam_norm, lpq_grid_norm, lpq_seq_norm


@dataclass(frozen=True, eq=False)
class SISpace:
    phi: Generator
    domain: Domain
    exponents: Exponents
    dual: DualData = field(repr=False)
    grid_dual: DualData = field(repr=False)

    @classmethod
    def build(cls, phi: Generator, domain: Domain, exponents: Exponents = Exponents(),
              refine: int = 4, trunc_tol: float = 1e-10) -> "SISpace":
        dual = make_dual(phi, domain, refine=refine, rule="boole", trunc_tol=trunc_tol)
        grid_dual = make_dual(phi, domain, refine=1, rule="rect", trunc_tol=trunc_tol)
        return cls(phi, domain, exponents, dual, grid_dual)

    @property
    def bracket_min(self) -> float:
        return self.dual.bracket_min

    @property
    def bracket_max(self) -> float:
        return self.dual.bracket_max


def synthesize(space: SISpace, c: CoeffArray) -> GridFunction:
    if c.domain.lattice_shape != space.domain.lattice_shape:
        raise DomainError("coefficient array does not match the space's lattice")
    return semi_discrete_conv(c, space.phi, space.domain)


def project(space: SISpace, f: GridFunction) -> CoeffArray:
    """Coefficients ``c(k) = <f, g(. - k)>`` with the grid dual; ``P f = synthesize(project(f))``."""
    if f.domain != space.domain:
        raise DomainError("grid function does not live on the space's domain")
    b = analysis(f, space.phi).values
    d = space.grid_dual.dual_coeffs.values
    # c(k) = sum_j d(j) b(k + j): a correlation with d
    c = np.real(np.fft.ifftn(np.conj(np.fft.fftn(d)) * np.fft.fftn(b)))
    return CoeffArray(space.domain, c)


def apply_projection(space: SISpace, f: GridFunction) -> GridFunction:
    return synthesize(space, project(space, f))


@dataclass
class EquivalenceProbe:
    ratio_min: float
    ratio_max: float
    ratios: np.ndarray = field(repr=False)


def norm_equivalence_probe(space: SISpace, trials: int, seed: int) -> EquivalenceProbe:
    """Extremes of ``||c *_sd phi||_{L^{p,q}} / ||c||_{l^{p,q}}`` over random uniform ``[-1, 1]`` coefficients."""
    e = space.exponents
    rng = np.random.default_rng(seed)
    ratios = np.empty(trials)
    for t in range(trials):
        c = CoeffArray.random(space.domain, rng)
        ratios[t] = lpq_grid_norm(synthesize(space, c), e) / lpq_seq_norm(c, e)
    lo, hi = float(ratios.min()), float(ratios.max())
    if not (lo > 0 and np.isfinite(hi)):
        raise StabilityViolation(f"norm equivalence ratios degenerate: [{lo}, {hi}]")
    return EquivalenceProbe(lo, hi, ratios)


# ---------------------------------------------------------------------------
# multiply generated spaces


@dataclass(frozen=True, eq=False)
class MultiSpace:
    """``V_{p,q}(Phi)`` for ``Phi = (phi_1, ..., phi_r)``.

    Each generator must pass the scalar stability check. The joint Gram
    condition is *reported* by :func:`multi_gram_min`, not enforced here,
    so that degenerate families can be inspected.
    """

    phis: tuple[Generator, ...]
    domain: Domain
    exponents: Exponents = Exponents()

    def __post_init__(self):
        if len(self.phis) < 1:
            raise ValueError("need at least one generator")
        for phi in self.phis:
            make_dual(phi, self.domain)

    @property
    def r(self) -> int:
        return len(self.phis)


def multi_synthesize(mspace: MultiSpace, C: Sequence[CoeffArray]) -> GridFunction:
    if len(C) != mspace.r:
        raise ValueError(f"expected {mspace.r} coefficient arrays, got {len(C)}")
    out = np.zeros(mspace.domain.shape)
    for phi, c in zip(mspace.phis, C):
        out += semi_discrete_conv(c, phi, mspace.domain).values
    return GridFunction(mspace.domain, out)


def multi_coeff_norm(C: Sequence[CoeffArray], e: Exponents) -> float:
    """``(sum_j ||c_j||_{l^{p,q}}^2)^{1/2}``."""
    return float(np.sqrt(sum(lpq_seq_norm(c, e) ** 2 for c in C)))


def multi_generator_norm(mspace: MultiSpace, refine: int = 4) -> float:
    """``(sum_j ||phi_j||_{W(L^{1,1})}^2)^{1/2}``."""
    one = Exponents(1, 1)
    return float(np.sqrt(sum(phi.amalgam_norm(one, mspace.domain.h, refine) ** 2 for phi in mspace.phis)))


def gram_symbol(mspace: MultiSpace, refine: int = 4, n_xi: int | None = None) -> np.ndarray:
    """Hermitian matrices ``[Phi^, Phi^](xi)`` on the xi-grid, shape ``(n_xi,)*(1+d) + (r, r)``."""
    dom = mspace.domain
    r = mspace.r
    corr = {}
    radius = 0
    for i in range(r):
        for j in range(r):
            corr[i, j] = cross_correlation(mspace.phis[i], mspace.phis[j], dom.h, refine)
            radius = max(radius, corr[i, j].radius)
    n_xi = n_xi or xi_points(dom.L)
    n_xi = max(n_xi, 2 * radius + 1)
    G = np.empty((n_xi,) * dom.ndim + (r, r), dtype=complex)
    for (i, j), a in corr.items():
        G[..., i, j] = a.symbol(n_xi)
    herm_err = np.abs(G - np.conj(np.swapaxes(G, -1, -2))).max()
    if herm_err > 1e-10 * max(1.0, np.abs(G).max()):
        raise ArithmeticError(f"Gram symbol is not Hermitian (error {herm_err:.3e})")
    return G


@dataclass
class GramReport:
    gram_min: float
    gram_max: float
    # three-way ratios over random C: ||f||_{L^{p,q}}/||C||, ||f||_{W}/||C||
    lpq_ratio: tuple[float, float] = (float("nan"), float("nan"))
    amalgam_ratio: tuple[float, float] = (float("nan"), float("nan"))


def multi_gram_min(mspace: MultiSpace, trials: int = 0, seed: int = 0, refine: int = 4) -> GramReport:
    """Smallest and largest eigenvalue of the Gram symbol over the xi-grid, plus empirical norm ratios."""
    G = gram_symbol(mspace, refine)
    eig = np.linalg.eigvalsh(G.reshape(-1, mspace.r, mspace.r))
    rep = GramReport(float(eig.min()), float(eig.max()))
    if trials:
        e = mspace.exponents
        rng = np.random.default_rng(seed)
        lr, ar = [], []
        for _ in range(trials):
            C = [CoeffArray.random(mspace.domain, rng) for _ in range(mspace.r)]
            f = multi_synthesize(mspace, C)
            cn = multi_coeff_norm(C, e)
            lr.append(lpq_grid_norm(f, e) / cn)
            ar.append(amalgam_norm(f, e) / cn)
        rep.lpq_ratio = (min(lr), max(lr))
        rep.amalgam_ratio = (min(ar), max(ar))
    return rep
