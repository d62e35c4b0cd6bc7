"""Compactly supported generators, synthesis/analysis, autocorrelation, bracket product and the dual generator.

A generator is supported in the box ``[0, box]^{1+d}``. Tensor B-splines of
degree ``m`` have ``box = m + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .grid import CoeffArray, Domain, DomainError, GridFunction, boole_weights, simpson_weights
from .norms import Exponents, amalgam_norm


class StabilityViolation(ValueError):
    """The generator's bracket product is not bounded away from zero."""


# B-spline pieces on [j, j+1), j = 0..m, as polynomial coefficient lists (highest power first).
_PIECES = {
    1: [[1, 0], [-1, 2]],
    2: [[0.5, 0, 0], [-1, 3, -1.5], [0.5, -3, 4.5]],
    3: [
        [1 / 6, 0, 0, 0],
        [-0.5, 2, -2, 2 / 3],
        [0.5, -4, 10, -22 / 3],
        [-1 / 6, 2, -8, 32 / 3],
    ],
}
_MAX_VALUE = {1: 1.0, 2: 0.75, 3: 2 / 3}
_MAX_SLOPE = {1: 1.0, 2: 1.0, 3: 0.5}


def bspline(t, degree: int) -> np.ndarray:
    """Cardinal B-spline of the given degree supported on ``[0, degree+1]``; exactly zero outside."""
    if degree not in _PIECES:
        raise ValueError(f"B-spline degree must be 1, 2 or 3, got {degree}")
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for j, coeffs in enumerate(_PIECES[degree]):
        mask = (t >= j) & (t < j + 1)
        out[mask] = np.polyval(coeffs, t[mask])
    return out


@dataclass(frozen=True, eq=False)
class Generator:
    """Either a tensor B-spline ``B_m(x) * prod B_m(y_i)`` or a multilinearly interpolated table.

    ``table`` holds values at nodes ``k * table_h`` for ``k = 0 .. box/table_h - 1``
    per axis; the function vanishes on the far faces of the box.
    """

    kind: str
    ndim: int
    box: float
    degree: int | None = None
    table: np.ndarray | None = field(default=None, repr=False)
    table_h: float | None = None
    scale: float = 1.0
    _interp: object = field(default=None, repr=False, compare=False)

    @classmethod
    def bspline(cls, degree: int, d: int = 1) -> "Generator":
        if degree not in _PIECES:
            raise ValueError(f"B-spline degree must be 1, 2 or 3, got {degree}")
        return cls("bspline", 1 + d, float(degree + 1), degree=degree)

    @classmethod
    def tabulated(cls, values: np.ndarray, table_h: float) -> "Generator":
        values = np.array(values, dtype=float)
        n = values.shape[0]
        if any(s != n for s in values.shape):
            raise ValueError("tabulated generator must be given on a cubic box")
        if not np.all(np.isfinite(values)):
            raise ValueError("tabulated generator has non-finite values")
        padded = np.pad(values, [(0, 1)] * values.ndim)
        axes = [np.arange(n + 1) * table_h] * values.ndim
        interp = RegularGridInterpolator(axes, padded, method="linear", bounds_error=False, fill_value=0.0)
        values.setflags(write=False)
        return cls("tabulated", values.ndim, n * table_h, table=values, table_h=table_h, _interp=interp)

    @classmethod
    def from_file(cls, path: str | Path) -> "Generator":
        """Load a table stored in the grid-function binary format; the header's ``L`` is the box side."""
        gf = GridFunction.load(path)
        return cls.tabulated(gf.values, gf.domain.h)

    @classmethod
    def from_spec(cls, spec: dict, d: int) -> "Generator":
        kind = spec.get("kind")
        if kind == "bspline":
            return cls.bspline(int(spec.get("degree", 3)), d)
        if kind == "tabulated":
            g = cls.from_file(spec["file"])
            if g.ndim != 1 + d:
                raise DomainError(f"tabulated generator has {g.ndim} axes, domain needs {1 + d}")
            return g
        raise ValueError(f"unknown generator kind {kind!r}")

    def scaled(self, s: float) -> "Generator":
        return Generator(self.kind, self.ndim, self.box, self.degree, self.table, self.table_h,
                         self.scale * s, self._interp)

    @property
    def support_radius(self) -> float:
        return self.box / 2

    @property
    def separable(self) -> bool:
        return self.kind == "bspline"

    def factor(self, t) -> np.ndarray:
        """One-dimensional factor of a tensor B-spline (without the scale)."""
        return bspline(t, self.degree)

    def __call__(self, *coords) -> np.ndarray:
        if len(coords) != self.ndim:
            raise DomainError(f"generator takes {self.ndim} coordinates, got {len(coords)}")
        coords = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        if self.kind == "bspline":
            out = self.factor(coords[0])
            for c in coords[1:]:
                out = out * self.factor(c)
        else:
            pts = np.stack(coords, axis=-1)
            out = self._interp(pts.reshape(-1, self.ndim)).reshape(coords[0].shape)
        return self.scale * out

    def tabulate_axes(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid ``axes[0] x axes[1] x ...``."""
        if self.separable:
            out = self.scale * self.factor(axes[0])
            for a in axes[1:]:
                out = np.multiply.outer(out, self.factor(a))
            return out
        return self(*np.meshgrid(*axes, indexing="ij"))

    def tabulate(self, domain: Domain) -> GridFunction:
        """The (periodised) generator at the nodes of a torus it fits in."""
        domain.check_fits(self.support_radius)
        if self.ndim != domain.ndim:
            raise DomainError(f"generator has {self.ndim} axes, domain has {domain.ndim}")
        return GridFunction(domain, self.tabulate_axes([domain.axis()] * domain.ndim))

    def lipschitz_bound(self) -> float:
        """Euclidean Lipschitz constant bound."""
        if self.separable:
            m = self.degree
            per_axis = _MAX_SLOPE[m] * _MAX_VALUE[m] ** (self.ndim - 1)
            return abs(self.scale) * math.sqrt(self.ndim) * per_axis
        t = np.pad(self.table, 1)
        slopes = [np.abs(np.diff(t, axis=ax)).max() / self.table_h for ax in range(t.ndim)]
        return abs(self.scale) * math.sqrt(sum(s * s for s in slopes))

    def support_volume(self) -> float:
        return self.box**self.ndim

    def amalgam_norm(self, e: Exponents, h: float, refine: int = 4) -> float:
        """W(L^{p,q}) norm with cell sups taken over a grid of step ``h/refine``."""
        L = math.ceil(self.box) + 2
        dom = Domain(self.ndim - 1, L, h / refine)
        return amalgam_norm(self.tabulate(dom), e)


# ---------------------------------------------------------------------------
# synthesis and analysis on the working grid


def _slabs(phi: Generator, domain: Domain) -> tuple[int, int, np.ndarray]:
    """``(B, M, table)``: box side in unit cells, nodes per unit, and the generator tabulated on ``[0, B)^{1+d}`` at step h."""
    if phi.ndim != domain.ndim:
        raise DomainError(f"generator has {phi.ndim} axes, domain has {domain.ndim}")
    domain.check_fits(phi.support_radius)
    m = domain.nodes_per_unit
    b = math.ceil(phi.box)
    ax = np.arange(b * m) * domain.h
    tab = phi.tabulate_axes([ax] * domain.ndim)
    return b, m, tab


def _interleave(arr: np.ndarray, ndim: int) -> np.ndarray:
    """(L,..,L, M,..,M) -> (L*M, ..., L*M)."""
    order = [i for k in range(ndim) for i in (k, ndim + k)]
    t = np.transpose(arr, order)
    return t.reshape(tuple(t.shape[2 * k] * t.shape[2 * k + 1] for k in range(ndim)))


def _deinterleave(values: np.ndarray, L: int, m: int) -> np.ndarray:
    """(L*M, ...) -> (L,..,L, M,..,M)."""
    ndim = values.ndim
    t = values.reshape(sum(((L, m) for _ in range(ndim)), ()))
    order = [2 * k for k in range(ndim)] + [2 * k + 1 for k in range(ndim)]
    return np.transpose(t, order)


def semi_discrete_conv(c: CoeffArray, phi: Generator, domain: Domain | None = None) -> GridFunction:
    """``sum_k c(k) phi(. - k)`` evaluated exactly at every node.

    Node ``n = q*M + r`` (per axis) only sees shifts ``k = q - j`` with
    ``0 <= j < ceil(box)``; the sum is accumulated in lexicographic order of ``j``.
    """
    domain = domain or c.domain
    if c.domain.L != domain.L or c.domain.d != domain.d:
        raise DomainError("coefficient lattice does not match the domain")
    b, m, tab = _slabs(phi, domain)
    ndim = domain.ndim
    axes = tuple(range(ndim))
    out = np.zeros(domain.lattice_shape + (m,) * ndim)
    for j in np.ndindex(*(b,) * ndim):
        slab = tab[tuple(slice(ji * m, (ji + 1) * m) for ji in j)]
        if not np.any(slab):
            continue
        out += np.multiply.outer(np.roll(c.values, j, axis=axes), slab)
    return GridFunction(domain, _interleave(out, ndim))


def analysis(f: GridFunction, phi: Generator, weights: np.ndarray | float | None = None) -> CoeffArray:
    """Inner products ``b(k) = sum_n w(n) f(n) phi(n h - k)`` for every lattice shift ``k``.

    The adjoint of :func:`semi_discrete_conv`. ``weights=None`` means the
    rectangle rule ``h^{1+d}``.
    """
    domain = f.domain
    b, m, tab = _slabs(phi, domain)
    ndim = domain.ndim
    w = domain.cell_volume if weights is None else weights
    g = _deinterleave(f.values * w, domain.L, m)
    lat_axes = tuple(range(ndim))
    fine_axes = tuple(range(ndim, 2 * ndim))
    out = np.zeros(domain.lattice_shape)
    for j in np.ndindex(*(b,) * ndim):
        slab = tab[tuple(slice(ji * m, (ji + 1) * m) for ji in j)]
        if not np.any(slab):
            continue
        t = np.tensordot(g, slab, axes=(fine_axes, tuple(range(ndim))))
        out += np.roll(t, tuple(-ji for ji in j), axis=lat_axes)
    return CoeffArray(domain, out)


# ---------------------------------------------------------------------------
# correlations


@dataclass(frozen=True, eq=False)
class Correlation:
    """Finite sequence ``a(alpha)`` for ``alpha`` in ``[-R, R]^{1+d}``, stored centred."""

    values: np.ndarray = field(repr=False)

    @property
    def radius(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def at(self, alpha: Sequence[int]) -> float:
        R = self.radius
        if any(abs(a) > R for a in alpha):
            return 0.0
        return float(self.values[tuple(a + R for a in alpha)])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        R = self.radius
        return {
            tuple(i - R for i in idx): float(v)
            for idx, v in np.ndenumerate(self.values)
            if v != 0.0
        }

    def periodized(self, L: int) -> np.ndarray:
        """Torus Gram sequence ``sum_j a(alpha + j L)`` on ``Z_L^{1+d}``."""
        out = np.zeros((L,) * self.ndim)
        R = self.radius
        for idx, v in np.ndenumerate(self.values):
            if v != 0.0:
                out[tuple((i - R) % L for i in idx)] += v
        return out

    def symbol(self, n_xi: int) -> np.ndarray:
        """``sum_alpha a(alpha) exp(-i <alpha, xi>)`` on the grid ``xi = 2 pi k / n_xi``."""
        if n_xi < 2 * self.radius + 1:
            raise ValueError("xi-grid too coarse for the correlation support")
        return np.fft.fftn(self.periodized(n_xi))

    def scaled(self, s: float) -> "Correlation":
        return Correlation(self.values * s)


def _outer_all(factors: list[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


def cross_correlation(
    phi1: Generator,
    phi2: Generator,
    h: float,
    refine: int = 4,
    rule: str = "boole",
    tensor: bool = True,
) -> Correlation:
    """``a(alpha) = <phi1, phi2(. - alpha)>`` by quadrature at step ``h/refine``.

    ``rule`` is ``"boole"`` (periodic composite Boole, exact for products that
    are polynomial of degree <= 5 between lattice points), ``"simpson"``
    (exact up to degree 3) or ``"rect"`` (the plain grid sum).
    Tensor B-spline pairs factor into one-dimensional correlations unless
    ``tensor=False``.
    """
    if phi1.ndim != phi2.ndim:
        raise DomainError("generators have different dimensions")
    if tensor and phi1.separable and phi2.separable:
        f1 = Generator.bspline(phi1.degree, 0)
        f2 = Generator.bspline(phi2.degree, 0)
        one = cross_correlation(f1, f2, h, refine, rule, tensor=False).values
        vals = _outer_all([one] * phi1.ndim) * (phi1.scale * phi2.scale)
        return Correlation(vals)
    b1, b2 = math.ceil(phi1.box), math.ceil(phi2.box)
    R = max(b1, b2)
    # period long enough that no shift in [-R, R] wraps onto an overlap
    L = b1 + b2 + R + 2
    dom = Domain(phi1.ndim - 1, L, h / refine)
    f = GridFunction(dom, phi1.tabulate_axes([dom.axis()] * dom.ndim))
    weights = _weights(dom, rule)
    b = analysis(f, phi2, weights).values
    out = np.zeros((2 * R + 1,) * dom.ndim)
    for idx in np.ndindex(*out.shape):
        alpha = tuple(i - R for i in idx)
        if all(-b2 < a < b1 for a in alpha):
            out[idx] = b[tuple(a % L for a in alpha)]
    return Correlation(out)


def autocorrelation(phi: Generator, h: float, refine: int = 4, rule: str = "boole",
                    tensor: bool = True) -> Correlation:
    return cross_correlation(phi, phi, h, refine, rule, tensor)


def _weights(dom: Domain, rule: str):
    if rule == "boole":
        return boole_weights(dom)
    if rule == "simpson":
        return simpson_weights(dom)
    if rule == "rect":
        return None
    raise ValueError(f"unknown quadrature rule {rule!r}")


def xi_points(L: int, minimum: int = 64) -> int:
    """Points per axis of the dense frequency grid: a multiple of L, at least ``minimum``."""
    return L * math.ceil(minimum / L)


def bracket_range(autocorr: Correlation, n_xi: int = 64, rel_tol: float = 1e-12) -> tuple[float, float]:
    """Extremes of the bracket product ``sum_alpha a(alpha) e^{-i alpha xi}`` over a dense xi-grid.

    Raises :class:`StabilityViolation` when the minimum is not positive
    (values below ``rel_tol * max`` count as zero).
    """
    n_xi = max(n_xi, 2 * autocorr.radius + 1)
    sym = autocorr.symbol(n_xi)
    scale = max(np.abs(sym).max(), 1e-300)
    if np.abs(sym.imag).max() > 1e-10 * scale:
        raise ValueError("bracket product has a nonzero imaginary part; correlation is not symmetric")
    lo, hi = float(sym.real.min()), float(sym.real.max())
    if lo <= rel_tol * scale:
        raise StabilityViolation(f"bracket product minimum {lo:.3e} is not positive")
    return lo, hi


# ---------------------------------------------------------------------------
# dual generator


@dataclass(frozen=True, eq=False)
class DualData:
    autocorr: Correlation
    dual_coeffs: CoeffArray
    trunc_tol: float
    bracket_min: float
    bracket_max: float
    residual: float
    refine: int
    rule: str


def circular_convolve(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Direct circular convolution on Z_L^{1+d}; loops over the nonzeros of ``a``."""
    out = np.zeros_like(d)
    axes = tuple(range(a.ndim))
    for idx in zip(*np.nonzero(a)):
        out += a[idx] * np.roll(d, idx, axis=axes)
    return out


def dual_coeffs(periodic_autocorr: np.ndarray, bracket_min: float | None = None) -> np.ndarray:
    """Solve ``a * d = delta_0`` on the torus lattice by DFT deconvolution."""
    ahat = np.fft.fftn(periodic_autocorr)
    floor = np.abs(ahat).min()
    if floor <= 0 or (bracket_min is not None and floor < bracket_min / 2):
        raise StabilityViolation(
            f"DFT of the autocorrelation has modulus {floor:.3e}, "
            f"inconsistent with bracket minimum {bracket_min}"
        )
    return np.real(np.fft.ifftn(1.0 / ahat))


def make_dual(
    phi: Generator,
    domain: Domain,
    refine: int = 4,
    rule: str = "boole",
    trunc_tol: float = 1e-10,
) -> DualData:
    """Autocorrelation, stability check and dual coefficients for ``phi`` on ``domain``'s lattice."""
    domain.check_fits(phi.support_radius)
    a = autocorrelation(phi, domain.h, refine, rule)
    lo, hi = bracket_range(a, xi_points(domain.L))
    per = a.periodized(domain.L)
    d = dual_coeffs(per, lo)
    delta = np.zeros_like(per)
    delta[(0,) * per.ndim] = 1.0
    residual = float(np.abs(circular_convolve(per, d) - delta).max())
    if residual > trunc_tol:
        raise StabilityViolation(f"deconvolution residual {residual:.3e} exceeds {trunc_tol:.1e}")
    return DualData(a, CoeffArray(domain, d), trunc_tol, lo, hi, residual, refine, rule)


def dual_eval(dual: DualData, phi: Generator, domain: Domain) -> GridFunction:
    """The dual generator ``g = sum_k d(k) phi(. - k)`` tabulated on ``domain``."""
    return semi_discrete_conv(dual.dual_coeffs, phi, domain)


def biorthogonality_residual(dual: DualData, phi: Generator, domain: Domain,
                             refine: int | None = None, rule: str | None = None) -> float:
    """``max_alpha |<phi(. - alpha), g> - delta_{0,alpha}|`` by quadrature on a refined grid."""
    refine = dual.refine if refine is None else refine
    rule = dual.rule if rule is None else rule
    fine = domain.refined(refine)
    g = dual_eval(dual, phi, fine)
    b = analysis(g, phi, _weights(fine, rule)).values.copy()
    b[(0,) * b.ndim] -= 1.0
    return float(np.abs(b).max())


def fit_decay(coeffs: np.ndarray, floor: float = 1e-13) -> tuple[float, float]:
    """Fit ``|d(k)| ~ C r^k`` along the first axis for ``0 <= k < L/4`` (away from wraparound).

    Returns ``(C, r)``.
    """
    line = np.abs(coeffs[(slice(None),) + (0,) * (coeffs.ndim - 1)])
    L = line.shape[0]
    k = np.arange(max(L // 4, 3))
    v = line[k]
    keep = v > floor
    slope, intercept = np.polyfit(k[keep], np.log(v[keep]), 1)
    return float(np.exp(intercept)), float(np.exp(slope))
