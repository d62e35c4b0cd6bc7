"""Mixed norms: sequence l^{p,q}, grid L^{p,q}, mixed Wiener amalgam W(L^{p,q}), and the oscillation field.

Convention throughout: the inner (``q``) norm runs over the ``y`` axes
``1..d``, the outer (``p``) norm over axis 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import DomainError, GridFunction

INF = math.inf


@dataclass(frozen=True)
class Exponents:
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise ValueError(f"exponents must be >= 1, got p={self.p}, q={self.q}")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.p) and math.isfinite(self.q)


def _mixed(a: np.ndarray, p: float, q: float, inner_weight=1.0, outer_weight=1.0) -> float:
    """``[ w_o * sum_x ( w_i * sum_y a^q )^{p/q} ]^{1/p}`` for nonnegative ``a`` of shape (n, ...).

    The entries are divided by their maximum first so the powers neither
    underflow nor overflow; the norm is homogeneous, so the scale is restored
    at the end.
    """
    a = a.reshape(a.shape[0], -1)
    scale = float(a.max()) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    if scale != 1.0:
        return scale * _mixed(a / scale, p, q, inner_weight, outer_weight)
    if math.isinf(q):
        inner = a.max(axis=1) if a.shape[1] else np.zeros(a.shape[0])
    else:
        inner = (inner_weight * np.sum(a**q, axis=1)) ** (1.0 / q)
    if math.isinf(p):
        return float(inner.max())
    return float((outer_weight * np.sum(inner**p)) ** (1.0 / p))


def lpq_seq_norm(c, e: Exponents) -> float:
    """l^{p,q} norm of a coefficient array (``CoeffArray`` or ndarray); ``INF`` allowed for either exponent."""
    values = getattr(c, "values", c)
    a = np.abs(np.asarray(values, dtype=float))
    if a.ndim == 1:
        a = a[:, None]
    return _mixed(a, e.p, e.q)


def lpq_grid_norm(f: GridFunction, e: Exponents) -> float:
    """Midpoint discretisation of the L^{p,q} norm of a grid function."""
    if not e.finite:
        raise ValueError("lpq_grid_norm needs finite p and q")
    h, d = f.domain.h, f.domain.d
    a = np.abs(f.values)
    if d == 0:
        a = a[:, None]
        return _mixed(a, e.p, e.q, inner_weight=1.0, outer_weight=h)
    return _mixed(a, e.p, e.q, inner_weight=h**d, outer_weight=h)


def _closed_cell_max(a: np.ndarray, axis: int, m: int) -> np.ndarray:
    """Max over the closed unit cells ``[n, n+1]`` along ``axis`` (periodic), reducing m*L nodes to L."""
    a = np.moveaxis(a, axis, 0)
    L = a.shape[0] // m
    blocks = a.reshape((L, m) + a.shape[1:])
    half_open = blocks.max(axis=1)
    right_edge = np.roll(blocks[:, 0], -1, axis=0)
    return np.moveaxis(np.maximum(half_open, right_edge), 0, axis)


def cell_sups(f: GridFunction) -> np.ndarray:
    """Max of ``|f|`` over the grid nodes of each closed unit cell, shape ``(L,)*(1+d)``."""
    m = f.domain.nodes_per_unit
    a = np.abs(f.values)
    for ax in range(f.domain.ndim):
        a = _closed_cell_max(a, ax, m)
    return a


def amalgam_norm(f: GridFunction, e: Exponents) -> float:
    """Mixed Wiener amalgam norm with each cell sup taken over the grid nodes of the closed cell.

    Cells are closed (``[n, n+1]``), matching the sup over ``[0, 1]``; for
    continuous functions this coincides with the half-open convention. To
    refine the sup of an analytic function, tabulate it on a finer domain first
    (see :meth:`lpqsample.generator.Generator.amalgam_norm`).
    """
    if not e.finite:
        raise ValueError("amalgam_norm needs finite p and q")
    s = cell_sups(f)
    if s.ndim == 1:
        s = s[:, None]
    return _mixed(s, e.p, e.q)


def osc_field(f: GridFunction, delta: float) -> GridFunction:
    """Discrete oscillation ``sup_{|offset|_inf <= r} |f(. + offset) - f|`` with ``r = ceil(delta/h)``."""
    dom = f.domain
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta > dom.L / 2:
        raise DomainError(f"delta={delta} exceeds L/2={dom.L / 2}")
    r = math.ceil(delta / dom.h - 1e-9)
    if r == 0:
        return GridFunction.zeros(dom)
    size = 2 * r + 1
    hi = ndimage.maximum_filter(f.values, size=size, mode="wrap")
    lo = ndimage.minimum_filter(f.values, size=size, mode="wrap")
    return GridFunction(dom, np.maximum(hi - f.values, f.values - lo))
