"""Nonuniform sampling sets, density certificates, Voronoi partitions of unity and the quasi-interpolant."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.spatial import cKDTree

from .grid import Domain, DomainError, GridFunction

TIE_TOL = 1e-12


def _reduce(points: np.ndarray, L: float) -> np.ndarray:
    p = np.mod(points, L)
    return np.where(p >= L, p - L, p)


@dataclass(frozen=True, eq=False)
class SamplingSet:
    """Sample points with index labels ``(j, k)``, certified density radius and separation."""

    domain: Domain
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    gamma: float
    sep: float
    mode: str = "scattered"

    def __len__(self) -> int:
        return self.points.shape[0]

    def tree(self) -> cKDTree:
        return cKDTree(self.points, boxsize=self.domain.L)

    def index_of(self) -> dict[tuple[int, int], int]:
        return {(int(j), int(k)): i for i, (j, k) in enumerate(self.labels)}

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        names = ["j", "k", "x"] + [f"y{i + 1}" for i in range(self.domain.d)]
        buf.write(",".join(names) + "\n")
        for (j, k), p in zip(self.labels, self.points):
            buf.write(f"{int(j)},{int(k)}," + ",".join(f"{float(v):.17g}" for v in p) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, domain: Domain, mode: str = "file") -> "SamplingSet":
        rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#"))]
        body = rows[1:]
        labels = np.array([[int(r[0]), int(r[1])] for r in body], dtype=np.int64).reshape(-1, 2)
        pts = np.array([[float(v) for v in r[2:]] for r in body]).reshape(-1, domain.ndim)
        return from_points(domain, pts, labels, mode)


def from_points(domain: Domain, points: np.ndarray, labels: np.ndarray | None = None,
                mode: str = "scattered") -> SamplingSet:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("sampling set is empty")
    if points.shape[1] != domain.ndim:
        raise DomainError(f"points need {domain.ndim} coordinates, got {points.shape[1]}")
    points = _reduce(points, domain.L)
    if labels is None:
        labels = np.stack([np.arange(len(points)), np.zeros(len(points), dtype=np.int64)], axis=1)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (len(points), 2):
        raise ValueError("labels must have shape (n, 2)")
    if len({(int(a), int(b)) for a, b in labels}) != len(labels):
        raise ValueError("duplicate sample labels")
    points.setflags(write=False)
    labels.setflags(write=False)
    gamma = certify_density(points, domain)
    sep = separation(points, domain)
    if not sep > 0:
        raise ValueError("sampling set has coincident points (separation 0)")
    return SamplingSet(domain, points, labels, gamma, sep, mode)


def certify_density(points, domain: Domain) -> float:
    """Largest node-to-nearest-sample distance plus half a cell diagonal.

    Every point of the torus is within half a cell diagonal of a node, so the
    result never understates the covering radius.
    """
    if isinstance(points, SamplingSet):
        points = points.points
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("cannot certify the density of an empty set")
    tree = cKDTree(_reduce(points, domain.L), boxsize=domain.L)
    dist, _ = tree.query(domain.nodes().reshape(-1, domain.ndim))
    return float(dist.max() + domain.h * math.sqrt(domain.ndim) / 2)


def separation(points: np.ndarray, domain: Domain) -> float:
    if len(points) < 2:
        return math.inf
    tree = cKDTree(points, boxsize=domain.L)
    dist, _ = tree.query(points, k=2)
    return float(dist[:, 1].min())


def _lattice(domain: Domain, s: float) -> np.ndarray:
    ratio = domain.L / s
    if abs(ratio - round(ratio)) > 1e-9:
        raise DomainError(f"spacing s={s} does not divide L={domain.L}")
    return np.arange(int(round(ratio))) * s


def make_jittered(domain: Domain, s: float, eta: float, seed: int) -> SamplingSet:
    """Lattice of pitch ``s`` with every point moved by uniform ``[-eta, eta]`` per axis.

    Labels: ``j`` is the x-lattice index, ``k`` the row-major index of the y-lattice site.
    """
    if not 0 <= eta < s / 2:
        raise ValueError(f"need 0 <= eta < s/2, got eta={eta}, s={s}")
    ax = _lattice(domain, s)
    grid = np.stack(np.meshgrid(*([ax] * domain.ndim), indexing="ij"), axis=-1).reshape(-1, domain.ndim)
    rng = np.random.default_rng(seed)
    pts = grid + rng.uniform(-eta, eta, size=grid.shape)
    n = len(ax)
    flat = np.arange(len(grid))
    labels = np.stack([flat // n**domain.d, flat % n**domain.d], axis=1)
    return from_points(domain, pts, labels, mode="scattered")


def make_product(domain: Domain, s: float, eta: float, seed: int) -> SamplingSet:
    """Product set ``{x_j} x {y_k}`` of a jittered x-lattice and a jittered y-lattice."""
    if not 0 <= eta < s / 2:
        raise ValueError(f"need 0 <= eta < s/2, got eta={eta}, s={s}")
    ax = _lattice(domain, s)
    rng = np.random.default_rng(seed)
    xs = ax + rng.uniform(-eta, eta, size=ax.shape)
    if domain.d:
        ygrid = np.stack(np.meshgrid(*([ax] * domain.d), indexing="ij"), axis=-1).reshape(-1, domain.d)
        ys = ygrid + rng.uniform(-eta, eta, size=ygrid.shape)
    else:
        ys = np.zeros((1, 0))
    pts = np.array([[x, *y] for x in xs for y in ys])
    labels = np.array([[j, k] for j in range(len(xs)) for k in range(len(ys))])
    return from_points(domain, pts, labels, mode="product")


@dataclass(frozen=True, eq=False)
class Bupu:
    """Voronoi-cell indicators: ``owner[cell]`` is the index of the sample whose cell it is.

    ``beta_i`` is the indicator of ``owner == i``; the cell represented by node
    ``n`` is ``[n h, (n+1) h)``.
    """

    owner: np.ndarray = field(repr=False)
    n_samples: int
    max_owner_distance: float

    def beta(self, i: int) -> np.ndarray:
        return (self.owner == i).astype(float)

    def partition_sum(self) -> np.ndarray:
        counts = np.zeros(self.owner.shape)
        for i in range(self.n_samples):
            counts += self.owner == i
        return counts


def build_bupu(X: SamplingSet, domain: Domain | None = None) -> Bupu:
    """Assign each grid cell to the sample nearest its centre; ties go to the smallest sample index."""
    domain = domain or X.domain
    centers = domain.cell_centers().reshape(-1, domain.ndim)
    tree = X.tree()
    k = min(len(X), 2**domain.ndim + 1)
    dist, idx = tree.query(centers, k=k)
    if k == 1:
        dist, idx = dist[:, None], idx[:, None]
    tied = dist <= dist[:, :1] + TIE_TOL
    owner = np.where(tied, idx, np.iinfo(np.int64).max).min(axis=1)
    own_dist = dist[:, 0]
    owner = owner.reshape(domain.shape)
    owner.setflags(write=False)
    return Bupu(owner, len(X), float(own_dist.max()))


def _sample_vector(X: SamplingSet, samples) -> np.ndarray:
    if isinstance(samples, Mapping):
        index = X.index_of()
        missing = [lab for lab in index if lab not in samples]
        if missing:
            raise KeyError(f"no sample value for index {missing[0]}")
        out = np.empty(len(X))
        for lab, i in index.items():
            out[i] = samples[lab]
        return out
    v = np.asarray(samples, dtype=float)
    if v.shape != (len(X),):
        raise ValueError(f"expected {len(X)} sample values, got shape {v.shape}")
    return v


def quasi_interpolant(X: SamplingSet, bupu: Bupu, samples, domain: Domain | None = None) -> GridFunction:
    """``Q_X f = sum f(x_j, y_k) beta_{j,k}``: each cell takes the value of its owning sample."""
    domain = domain or X.domain
    v = _sample_vector(X, samples)
    return GridFunction(domain, v[bupu.owner])


def sample_field(f: GridFunction, X: SamplingSet) -> np.ndarray:
    """Periodic multilinear interpolation of ``f`` at the sample points (ordered like ``X.points``)."""
    dom = f.domain
    if dom != X.domain:
        raise DomainError("field and sampling set live on different domains")
    u = X.points / dom.h
    base = np.floor(u).astype(np.int64)
    frac = u - base
    out = np.zeros(len(X))
    for corner in np.ndindex(*(2,) * dom.ndim):
        w = np.ones(len(X))
        idx = []
        for ax, c in enumerate(corner):
            w = w * (frac[:, ax] if c else 1.0 - frac[:, ax])
            idx.append((base[:, ax] + c) % dom.n)
        out += w * f.values[tuple(idx)]
    return out


def samples_as_dict(X: SamplingSet, values: np.ndarray) -> dict[tuple[int, int], float]:
    return {(int(j), int(k)): float(v) for (j, k), v in zip(X.labels, values)}
