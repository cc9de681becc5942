"""Compact metric space models and finite epsilon-nets.

Three space kinds are supported: the circle with the wrap-around metric,
the 2-torus with the wrapped sup metric, and finite metric models given by
an explicit distance matrix.  Every space is rescaled so its diameter is
exactly 1, which makes epsilon values comparable across spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "CIRCLE",
    "TORUS2",
    "InputError",
    "NumericError",
    "Net",
    "SpaceModel",
    "SpacePoint",
    "TotalPoint",
    "circle",
    "dist",
    "finite_space",
    "net_density_check",
    "torus2",
    "total_dist",
    "uniform_net",
]

CIRCLE = "circle"
TORUS2 = "torus2"
FINITE = "finite"


class InputError(ValueError):
    """Invalid argument or configuration value."""


class NumericError(ArithmeticError):
    """A numeric computation failed (NaN distance, non-convergent solve)."""


@dataclass(frozen=True, slots=True)
class SpacePoint:
    """A point of a space model: wrapped coordinates, or a label index."""

    coords: tuple[float, ...] = ()
    index: int = -1

    def __post_init__(self):
        if self.coords:
            object.__setattr__(
                self, "coords", tuple(float(c) % 1.0 for c in self.coords)
            )


@dataclass(frozen=True, slots=True)
class TotalPoint:
    """A space point tagged with the component index it lives on."""

    point: SpacePoint
    component: int


class SpaceModel:
    """A compact metric space normalized to diameter 1.

    ``kind`` is one of ``circle``, ``torus2`` or ``finite``.  For finite
    models ``labels`` names the points and ``raw_distances`` is the
    user-provided symmetric matrix; ``normalization`` is the factor applied
    to raw distances so the diameter comes out as 1.
    """

    def __init__(self, kind, labels=None, raw_distances=None):
        self.kind = kind
        if kind in (CIRCLE, TORUS2):
            self.dim = 1 if kind == CIRCLE else 2
            self.normalization = 2.0
            self.labels = None
            self._dmat = None
        elif kind == FINITE:
            if labels is None or raw_distances is None:
                raise InputError("finite space needs labels and distances")
            mat = np.asarray(raw_distances, dtype=float)
            n = len(labels)
            if mat.shape != (n, n):
                raise InputError("distance matrix shape does not match labels")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise InputError("distance matrix must be symmetric")
            if np.any(np.diag(mat) != 0.0):
                raise InputError("distance matrix diagonal must be zero")
            dmax = float(mat.max())
            if dmax <= 0.0:
                raise InputError("finite space must contain two distinct points")
            self.dim = 0
            self.normalization = 1.0 / dmax
            self.labels = list(labels)
            self._dmat = mat * self.normalization
            self._check_triangle()
        else:
            raise InputError(f"unknown space kind: {kind!r}")

    def _check_triangle(self):
        m = self._dmat
        n = m.shape[0]
        for k in range(n):
            viol = m - (m[:, k][:, None] + m[k, :][None, :])
            if viol.max() > 1e-12:
                raise InputError("distance matrix violates the triangle inequality")

    @property
    def size(self):
        """Number of points (finite models only)."""
        if self.kind != FINITE:
            raise InputError("size is only defined for finite spaces")
        return len(self.labels)

    def point(self, *coords_or_label) -> SpacePoint:
        if self.kind == FINITE:
            (label,) = coords_or_label
            return SpacePoint(index=self.labels.index(label))
        if len(coords_or_label) != self.dim:
            raise InputError(
                f"{self.kind} points need {self.dim} coordinate(s), "
                f"got {len(coords_or_label)}"
            )
        return SpacePoint(coords=tuple(coords_or_label))

    def dist(self, p: SpacePoint, q: SpacePoint) -> float:
        """Normalized distance between two points of this space."""
        if self.kind == FINITE:
            return float(self._dmat[p.index, q.index])
        if len(p.coords) != self.dim or len(q.coords) != self.dim:
            raise InputError("point dimension does not match space")
        u = np.asarray(p.coords)
        v = np.asarray(q.coords)
        return float(self.dist_batch(u[None, :], v[None, :])[0])

    def dist_batch(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vectorized distance between rows of coordinate arrays (N, dim)."""
        if self.kind == FINITE:
            return self._dmat[u, v]
        f = np.abs(u - v)
        w = np.minimum(f, 1.0 - f)
        if self.kind == CIRCLE:
            return self.normalization * w[:, 0]
        return self.normalization * w.max(axis=1)

    def distance_matrix(self) -> np.ndarray:
        if self.kind != FINITE:
            raise InputError("distance_matrix is only defined for finite spaces")
        return self._dmat

    def __repr__(self):
        if self.kind == FINITE:
            return f"SpaceModel(finite, {len(self.labels)} points)"
        return f"SpaceModel({self.kind})"


def circle() -> SpaceModel:
    return SpaceModel(CIRCLE)


def torus2() -> SpaceModel:
    return SpaceModel(TORUS2)


def finite_space(labels: Sequence, distances) -> SpaceModel:
    return SpaceModel(FINITE, labels=labels, raw_distances=distances)


def dist(space: SpaceModel, p: SpacePoint, q: SpacePoint) -> float:
    return space.dist(p, q)


def total_dist(space: SpaceModel, tp: TotalPoint, tq: TotalPoint) -> float:
    """Distance on the disjoint union of indexed copies of the space.

    Points on distinct components are at distance exactly 1; on a shared
    component the distance is min(1, d).
    """
    if tp.component != tq.component:
        return 1.0
    return min(1.0, space.dist(tp.point, tq.point))


@dataclass(frozen=True)
class Net:
    """A finite delta-dense sample of a space, the carrier of all counts.

    ``coords`` holds wrapped coordinates with shape (N, dim) for circle and
    torus nets; finite-model nets enumerate all points and store ``indices``.
    """

    space: SpaceModel
    density: float
    coords: np.ndarray | None = None
    indices: np.ndarray | None = None

    def __len__(self):
        arr = self.coords if self.coords is not None else self.indices
        return arr.shape[0]

    def point(self, k: int) -> SpacePoint:
        if self.indices is not None:
            return SpacePoint(index=int(self.indices[k]))
        return SpacePoint(coords=tuple(self.coords[k]))

    def points(self) -> list[SpacePoint]:
        return [self.point(k) for k in range(len(self))]


def uniform_net(space: SpaceModel, m: int) -> Net:
    """Evenly spaced net: m points on the circle, an m-by-m grid on the
    torus (density 1/m after normalization), or all points of a finite model
    (density 0)."""
    if space.kind == FINITE:
        return Net(space, 0.0, indices=np.arange(space.size, dtype=np.int64))
    if m < 1:
        raise InputError("net resolution m must be >= 1")
    ticks = np.arange(m, dtype=float) / m
    if space.kind == CIRCLE:
        coords = ticks[:, None]
    else:
        gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
        coords = np.column_stack([gx.ravel(), gy.ravel()])
    return Net(space, 1.0 / m, coords=np.ascontiguousarray(coords))


def net_density_check(net: Net, probe_resolution: int) -> float:
    """Brute-force density audit: max over a fine probe grid of the distance
    to the nearest net point.  Must come out <= the declared density."""
    space = net.space
    if space.kind == FINITE:
        return 0.0
    probes = uniform_net(space, probe_resolution).coords
    worst = 0.0
    # chunked so torus probe grids do not allocate a giant matrix at once
    step = max(1, 2_000_000 // max(1, len(net)))
    for lo in range(0, probes.shape[0], step):
        block = probes[lo : lo + step]
        f = np.abs(block[:, None, :] - net.coords[None, :, :])
        w = np.minimum(f, 1.0 - f)
        if space.kind == CIRCLE:
            d = space.normalization * w[:, :, 0]
        else:
            d = space.normalization * w.max(axis=2)
        worst = max(worst, float(d.min(axis=1).max()))
    return worst
