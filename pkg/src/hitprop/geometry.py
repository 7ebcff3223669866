"""Points, polygonal paths and the two boundary geometries (unit sphere, plane).

The dimension of a point is a runtime quantity so that the same code serves
D = 1, 2, 3 and the identities that move between dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]

    def __init__(self, coords: Iterable[float] | float):
        if np.isscalar(coords):
            coords = (coords,)
        values = tuple(float(c) for c in coords)
        if len(values) < 1:
            raise ValueError("a point needs at least one coordinate")
        if not all(math.isfinite(c) for c in values):
            raise ValueError(f"non-finite coordinate in {values}")
        object.__setattr__(self, "coords", values)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def asarray(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def distance(self, other: Point) -> float:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")
        return math.dist(self.coords, other.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    @classmethod
    def origin(cls, dim: int) -> Point:
        return cls((0.0,) * dim)


def as_point(p) -> Point:
    return p if isinstance(p, Point) else Point(p)


@dataclass(frozen=True)
class PolygonalPath:
    """Path x -> z_1 -> ... -> z_n -> y through prescribed intermediate points."""

    start: Point
    intermediates: tuple[Point, ...]
    end: Point

    def __init__(self, start, intermediates: Sequence = (), end=None):
        start = as_point(start)
        end = start if end is None else as_point(end)
        inter = tuple(as_point(z) for z in intermediates)
        dims = {start.dim, end.dim, *(z.dim for z in inter)}
        if len(dims) != 1:
            raise DimensionMismatchError(f"points of mixed dimension {sorted(dims)}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "intermediates", inter)
        object.__setattr__(self, "end", end)

    @property
    def dim(self) -> int:
        return self.start.dim

    @property
    def order(self) -> int:
        """Number of intermediate points n."""
        return len(self.intermediates)

    @property
    def vertices(self) -> tuple[Point, ...]:
        return (self.start, *self.intermediates, self.end)

    def reversed(self) -> PolygonalPath:
        return PolygonalPath(self.end, self.intermediates[::-1], self.start)

    def with_end(self, end) -> PolygonalPath:
        return PolygonalPath(self.start, self.intermediates, end)

    def drop_last(self) -> PolygonalPath:
        """Order n-1 path x -> z_1 .. z_{n-1} -> z_n, i.e. z_n becomes the endpoint."""
        if not self.intermediates:
            raise ValueError("path has no intermediate point to remove")
        return PolygonalPath(self.start, self.intermediates[:-1], self.intermediates[-1])

    def segment_lengths(self) -> list[float]:
        return segment_lengths(self)

    def total_length(self) -> float:
        return total_length(self)


def segment_lengths(path: PolygonalPath) -> list[float]:
    """Lengths Delta_k = |z_k - z_{k-1}|, k = 1..n+1, with z_0 = x and z_{n+1} = y."""
    v = path.vertices
    return [v[k].distance(v[k - 1]) for k in range(1, len(v))]


def total_length(path: PolygonalPath) -> float:
    return math.fsum(segment_lengths(path))


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-4
    abs_tol: float = 0.0
    rho_max: float | None = None  # None: 20 for c1 and 10 for c2, c3
    max_evals: int = 2_000_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.rho_max is not None and not self.rho_max > 0:
            raise ValueError("rho_max must be positive")
        if not self.max_evals > 0:
            raise ValueError("max_evals must be positive")


@dataclass(frozen=True)
class UnitSphere:
    """Sphere of radius one.

    Other radii follow by diffusion scaling: lengths scale with R and times
    with R**2, and the kernel picks up a factor R**-D.
    """

    center: Point = field(default_factory=lambda: Point.origin(3))
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    radius = 1.0


@dataclass(frozen=True)
class Plane:
    """Hyperplane {p : p . normal = offset} with a unit normal."""

    normal: Point = field(default_factory=lambda: Point((0.0, 0.0, 1.0)))
    offset: float = 0.0
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        n = as_point(self.normal)
        object.__setattr__(self, "normal", n)
        if abs(math.hypot(*n.coords) - 1.0) > 1e-12:
            raise ValueError(f"plane normal {n.coords} is not a unit vector")

    def signed_distance(self, p) -> float:
        p = as_point(p)
        if p.dim != self.normal.dim:
            raise DimensionMismatchError(f"point of dimension {p.dim} vs plane in {self.normal.dim}")
        return float(np.dot(p.asarray(), self.normal.asarray())) - self.offset


Boundary = UnitSphere | Plane


def reflect_in_plane(p, plane: Plane) -> Point:
    """Mirror image p - 2 ((p . n) - offset) n."""
    if not isinstance(plane, Plane):
        raise TypeError(f"reflection needs a Plane, got {type(plane).__name__}")
    p = as_point(p)
    h = plane.signed_distance(p)
    return Point(p.asarray() - 2.0 * h * plane.normal.asarray())
