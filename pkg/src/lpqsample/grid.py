"""Uniform grids on the torus T^{1+d} = [0, L)^{1+d} and functions tabulated on them.

Axis 0 is the ``x`` variable; axes ``1..d`` carry the ``y`` variable. Grid
nodes sit at cell corners, so node ``(i, j, ...)`` has coordinates
``(i*h, j*h, ...)`` and the grid cell ``[i*h, (i+1)*h) x ...`` is represented
by that node.

All reductions in this module (and in :mod:`lpqsample.norms`) are delegated to
``numpy.sum`` over a C-contiguous array, i.e. pairwise summation in row-major
order. The order depends only on the array shape, never on thread count.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

MAX_D = 2


class DomainError(ValueError):
    """Raised when an object is used with an incompatible domain."""


@dataclass(frozen=True)
class Domain:
    """Periodic box ``[0, L)^{1+d}`` sampled with step ``h``.

    ``d = 0`` is accepted for one-dimensional factor computations; the
    experiment config only allows ``d`` in ``{1, 2}``.
    """

    d: int = 1
    L: int = 16
    h: float = 1 / 16

    def __post_init__(self):
        if int(self.d) != self.d or not 0 <= self.d <= MAX_D:
            raise DomainError(f"d must be an integer in [0, {MAX_D}], got {self.d}")
        if int(self.L) != self.L or self.L < 1:
            raise DomainError(f"L must be a positive integer, got {self.L}")
        if not self.h > 0:
            raise DomainError(f"h must be positive, got {self.h}")
        n = self.L / self.h
        if abs(n - round(n)) > 1e-9 * n:
            raise DomainError(f"L/h must be an integer, got {n}")
        if round(n) < 8:
            raise DomainError(f"need at least 8 nodes per axis, got {round(n)}")

    @property
    def ndim(self) -> int:
        return 1 + self.d

    @property
    def n(self) -> int:
        """Nodes per axis."""
        return int(round(self.L / self.h))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.ndim

    @property
    def lattice_shape(self) -> tuple[int, ...]:
        return (self.L,) * self.ndim

    @property
    def cell_volume(self) -> float:
        return self.h**self.ndim

    @property
    def nodes_per_unit(self) -> int:
        """``1/h`` as an integer; raises if unit cells do not align with the grid."""
        m = 1.0 / self.h
        if abs(m - round(m)) > 1e-9 * m:
            raise DomainError(f"1/h must be an integer, got {m}")
        return int(round(m))

    def refined(self, factor: int) -> "Domain":
        return Domain(self.d, self.L, self.h / factor)

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return np.arange(self.n) * self.h

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``shape + (ndim,)``."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.ndim), indexing="ij"), axis=-1)

    def cell_centers(self) -> np.ndarray:
        return self.nodes() + self.h / 2

    def check_fits(self, radius: float) -> None:
        """Reject a generator of the given support radius that would overlap its own periodization."""
        if self.L < 2 * math.ceil(radius) + 2:
            raise DomainError(
                f"L={self.L} too small for support radius {radius}: "
                f"need L >= {2 * math.ceil(radius) + 2}"
            )

    def to_dict(self) -> dict:
        return {"d": self.d, "L": self.L, "h": self.h}


@dataclass(frozen=True)
class Point:
    """A point ``(x, y)`` on the torus; coordinates are reduced mod ``L`` by :meth:`on`."""

    x: float
    y: tuple[float, ...]

    @classmethod
    def on(cls, domain: Domain, x: float, y: Sequence[float] = ()) -> "Point":
        y = tuple(float(v) % domain.L for v in np.atleast_1d(y)) if domain.d else ()
        if len(y) != domain.d:
            raise DomainError(f"expected {domain.d} y-coordinates, got {len(y)}")
        return cls(float(x) % domain.L, y)

    def coords(self) -> np.ndarray:
        return np.array((self.x, *self.y), dtype=float)


def wrap_difference(delta: np.ndarray, L: float) -> np.ndarray:
    """Reduce coordinate differences to ``[-L/2, L/2]``."""
    return delta - L * np.round(delta / L)


def torus_distance(a: Point | np.ndarray, b: Point | np.ndarray, domain: Domain) -> float:
    a = a.coords() if isinstance(a, Point) else np.asarray(a, dtype=float)
    b = b.coords() if isinstance(b, Point) else np.asarray(b, dtype=float)
    if a.shape != (domain.ndim,) or b.shape != (domain.ndim,):
        raise DomainError(
            f"points must have {domain.ndim} coordinates, got {a.shape} and {b.shape}"
        )
    return float(np.sqrt(np.sum(wrap_difference(a - b, domain.L) ** 2)))


def torus_distances(points: np.ndarray, centre: np.ndarray, L: float) -> np.ndarray:
    """Vectorised distance from each row of ``points`` to ``centre``."""
    return np.sqrt(np.sum(wrap_difference(points - centre, L) ** 2, axis=-1))


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: Domain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, order="C")
        if v.shape != self.domain.shape:
            raise DomainError(f"values shape {v.shape} != domain shape {self.domain.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, domain: Domain) -> "GridFunction":
        return cls(domain, np.zeros(domain.shape))

    @classmethod
    def constant(cls, domain: Domain, c: float) -> "GridFunction":
        return cls(domain, np.full(domain.shape, float(c)))

    def _check(self, other: "GridFunction") -> None:
        if other.domain != self.domain:
            raise DomainError("grid functions live on different domains")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.domain, self.values + other.values)
        return GridFunction(self.domain, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.domain, self.values - other.values)
        return GridFunction(self.domain, self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.domain, self.values * other.values)
        return GridFunction(self.domain, self.values * other)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return GridFunction(self.domain, -self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    # serialization -------------------------------------------------------

    def to_bytes(self) -> bytes:
        header = json.dumps(self.domain.to_dict(), sort_keys=True) + "\n"
        return header.encode() + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridFunction":
        head, _, body = data.partition(b"\n")
        meta = json.loads(head)
        domain = Domain(int(meta["d"]), int(meta["L"]), float(meta["h"]))
        values = np.frombuffer(body, dtype="<f8").reshape(domain.shape)
        return cls(domain, values)

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "GridFunction":
        return cls.from_bytes(Path(path).read_bytes())

    def to_csv(self, header: str | None = None) -> str:
        """One row per x-slice; for ``d = 2`` the y-plane is flattened row-major."""
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        rows = self.values.reshape(self.domain.n, -1)
        for row in rows:
            buf.write(",".join(repr(float(v)) for v in row))
            buf.write("\n")
        return buf.getvalue()


def quadrature(f: GridFunction) -> float:
    """Rectangle rule ``h^{1+d} * sum(values)``; exact for trigonometric polynomials below Nyquist."""
    return float(f.domain.cell_volume * np.sum(f.values))


def simpson_weights(domain: Domain) -> np.ndarray:
    """Tensor-product periodic composite Simpson weights (needs an even node count).

    Nodes with even index get ``2h/3``, odd ones ``4h/3``. Integer lattice points
    are even nodes whenever ``1/h`` is even, so integrands that are polynomial
    of degree <= 3 between lattice points are integrated exactly.
    """
    if domain.n % 2:
        raise DomainError("Simpson weights need an even number of nodes per axis")
    w1 = np.where(np.arange(domain.n) % 2 == 0, 2.0 / 3.0, 4.0 / 3.0) * domain.h
    w = w1
    for _ in range(domain.d):
        w = np.multiply.outer(w, w1)
    return w


def boole_weights(domain: Domain) -> np.ndarray:
    """Tensor-product periodic composite Boole weights (needs a node count divisible by 4).

    Per block of four steps the weights are ``(14, 32, 12, 32) * 2h/45``. When
    ``1/h`` is a multiple of 4, integrands that are polynomial of degree <= 5
    between lattice points are integrated exactly.
    """
    if domain.n % 4:
        raise DomainError("Boole weights need a multiple of 4 nodes per axis")
    w1 = np.array([14.0, 32.0, 12.0, 32.0])[np.arange(domain.n) % 4] * (2 * domain.h / 45)
    w = w1
    for _ in range(domain.d):
        w = np.multiply.outer(w, w1)
    return w


def eval_on_grid(fn: Callable[[Point], float], domain: Domain) -> GridFunction:
    """Tabulate a pointwise callable at every node. Slow; intended for tests and small grids."""
    out = np.empty(domain.shape)
    ax = domain.axis()
    for idx in np.ndindex(*domain.shape):
        p = Point(float(ax[idx[0]]), tuple(float(ax[i]) for i in idx[1:]))
        v = fn(p)
        if not np.isfinite(v):
            raise ValueError(f"non-finite value {v} at node {idx} = {p}")
        out[idx] = v
    return GridFunction(domain, out)


def eval_vectorized(fn: Callable[..., np.ndarray], domain: Domain) -> GridFunction:
    """Tabulate ``fn(x, y1, ..., yd)`` written with numpy broadcasting."""
    ax = domain.axis()
    coords = np.meshgrid(*([ax] * domain.ndim), indexing="ij")
    vals = np.broadcast_to(np.asarray(fn(*coords), dtype=float), domain.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(f"non-finite value at node {idx}")
    return GridFunction(domain, vals)


@dataclass(frozen=True, eq=False)
class CoeffArray:
    """Coefficients ``c(k1, k2)`` on the lattice ``Z_L x Z_L^d`` of a domain."""

    domain: Domain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, order="C")
        if v.shape != self.domain.lattice_shape:
            raise DomainError(
                f"coefficient shape {v.shape} != lattice shape {self.domain.lattice_shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficients must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, domain: Domain) -> "CoeffArray":
        return cls(domain, np.zeros(domain.lattice_shape))

    @classmethod
    def delta(cls, domain: Domain, k: Sequence[int]) -> "CoeffArray":
        v = np.zeros(domain.lattice_shape)
        v[tuple(int(i) % domain.L for i in k)] = 1.0
        return cls(domain, v)

    @classmethod
    def random(cls, domain: Domain, rng: np.random.Generator) -> "CoeffArray":
        """i.i.d. uniform ``[-1, 1]`` entries."""
        return cls(domain, rng.uniform(-1.0, 1.0, size=domain.lattice_shape))

    def shifted(self, alpha: Sequence[int]) -> "CoeffArray":
        """``c(. - alpha)``."""
        axes = tuple(range(self.domain.ndim))
        return CoeffArray(self.domain, np.roll(self.values, tuple(int(a) for a in alpha), axis=axes))

    def __add__(self, other: "CoeffArray") -> "CoeffArray":
        return CoeffArray(self.domain, self.values + other.values)

    def __sub__(self, other: "CoeffArray") -> "CoeffArray":
        return CoeffArray(self.domain, self.values - other.values)

    def __mul__(self, s: float) -> "CoeffArray":
        return CoeffArray(self.domain, self.values * s)

    __rmul__ = __mul__

    def __neg__(self):
        return CoeffArray(self.domain, -self.values)

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        names = ["k1"] + [f"k{i + 2}" for i in range(self.domain.d)]
        buf.write(",".join(names + ["value"]) + "\n")
        for idx in np.ndindex(*self.values.shape):
            buf.write(",".join(str(i) for i in idx) + f",{float(self.values[idx])!r}\n")
        return buf.getvalue()
