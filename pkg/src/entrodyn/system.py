"""Map specifications and the algebra of non-autonomous systems.

A system is an integer-indexed family of invertible maps on one space
model.  Constructors cover the operations the experiments need: constant
families, time reversal, gatherings, splices, seeded perturbations and
conjugations.  All maps evaluate both forward and inverse to high accuracy;
coordinates are reduced mod 1 after every arithmetic step.
"""

from __future__ import annotations

import threading
from typing import Callable

import numpy as np

from .space import (
    CIRCLE,
    FINITE,
    TORUS2,
    InputError,
    NumericError,
    SpaceModel,
    SpacePoint,
)

__all__ = [
    "MapSpec",
    "Identity",
    "Rotation",
    "ToralAuto",
    "CircleBump",
    "FinitePermutation",
    "Inverse",
    "Composite",
    "SystemSpec",
    "apply_map",
    "orbit_segment",
    "orbit_segment_back",
    "constant_family",
    "inverse_system",
    "gathering",
    "splice",
    "perturb",
    "conjugate_system",
]

_ROUNDTRIP_TOL = 1e-10
_SOLVE_TOL = 1e-13


class MapSpec:
    """Base class for invertible map specifications.

    Subclasses implement vectorized ``apply``/``apply_inverse`` on coordinate
    arrays of shape (N, dim) (or integer label arrays for finite models), and
    declare which space kinds they act on.
    """

    kinds: tuple = (CIRCLE, TORUS2)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_inverse(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv_bounds(self) -> tuple[float, float]:
        """Conservative (low, high) bounds on the coordinate derivative.

        Only meaningful for circle-like maps; used to certify that bump
        perturbations stay diffeomorphisms.
        """
        raise InputError(f"{type(self).__name__} has no scalar derivative bounds")

    def compatible(self, space: SpaceModel) -> bool:
        return space.kind in self.kinds


class Identity(MapSpec):
    kinds = (CIRCLE, TORUS2, FINITE)

    def apply(self, pts):
        return pts

    def apply_inverse(self, pts):
        return pts

    def deriv_bounds(self):
        return (1.0, 1.0)

    def __repr__(self):
        return "Identity()"


class Rotation(MapSpec):
    """Rigid rotation x -> x + alpha (applied per coordinate on the torus)."""

    kinds = (CIRCLE, TORUS2)

    def __init__(self, alpha: float):
        self.alpha = float(alpha)

    def apply(self, pts):
        return np.mod(pts + self.alpha, 1.0)

    def apply_inverse(self, pts):
        return np.mod(pts - self.alpha, 1.0)

    def deriv_bounds(self):
        return (1.0, 1.0)

    def __repr__(self):
        return f"Rotation({self.alpha})"


class ToralAuto(MapSpec):
    """Linear torus automorphism given by an integer matrix with |det| = 1."""

    kinds = (TORUS2,)

    def __init__(self, matrix):
        a = np.asarray(matrix, dtype=np.int64)
        if a.shape != (2, 2):
            raise InputError("toral automorphism needs a 2x2 integer matrix")
        det = int(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
        if abs(det) != 1:
            raise InputError(f"matrix determinant must be +-1, got {det}")
        self.matrix = a
        # adjugate over det is again integral when |det| = 1
        self.inv_matrix = (
            np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]], dtype=np.int64) * det
        )

    def apply(self, pts):
        return np.mod(pts @ self.matrix.T.astype(float), 1.0)

    def apply_inverse(self, pts):
        return np.mod(pts @ self.inv_matrix.T.astype(float), 1.0)

    def __repr__(self):
        return f"ToralAuto({self.matrix.tolist()})"


class CircleBump(MapSpec):
    """Base map followed by a sine bump of the input coordinates.

    x -> base(x) + (a / 2 pi) sin(2 pi (x + phase)), per coordinate on the
    torus.  |a| must stay below the base derivative minimum on the circle
    (keeps the derivative positive); on the torus the amplitude must keep
    the perturbed Jacobian invertible.
    """

    kinds = (CIRCLE, TORUS2)

    def __init__(self, base: MapSpec, amplitude: float, phase: float):
        if abs(amplitude) >= 1.0:
            raise InputError("bump amplitude must satisfy |a| < 1")
        self.base = base
        self.amplitude = float(amplitude)
        self.phase = float(phase)
        self._is_linear_torus = isinstance(base, ToralAuto)
        if self._is_linear_torus:
            inv_norm = float(np.abs(base.inv_matrix).sum(axis=1).max())
            if abs(amplitude) * inv_norm >= 1.0:
                raise InputError(
                    "bump amplitude too large for this torus automorphism"
                )
        else:
            lo, _ = base.deriv_bounds()
            if lo - abs(amplitude) <= 0.0:
                raise InputError("bump amplitude breaks derivative positivity")

    def _bump(self, pts):
        return (self.amplitude / (2.0 * np.pi)) * np.sin(
            2.0 * np.pi * (pts + self.phase)
        )

    def apply(self, pts):
        return np.mod(self.base.apply(pts) + self._bump(pts), 1.0)

    def apply_inverse(self, pts):
        # Solve base(x) + bump(x) = w by fixed point x <- base^{-1}(w - bump(x)),
        # a contraction because |a| is below the base derivative minimum, then
        # polish until the wrapped residual is below tolerance.
        w = np.asarray(pts, dtype=float)
        x = self.base.apply_inverse(w)
        for _ in range(200):
            x_new = self.base.apply_inverse(np.mod(w - self._bump(x), 1.0))
            delta = np.abs(x_new - x)
            delta = np.minimum(delta, 1.0 - delta)
            x = x_new
            if delta.max() < _SOLVE_TOL:
                break
        resid = np.abs(self.apply(x) - w)
        resid = np.minimum(resid, 1.0 - resid)
        if resid.max() > 1e-10:
            raise NumericError("bump inversion did not converge")
        return x

    def deriv_bounds(self):
        lo, hi = self.base.deriv_bounds()
        return (lo - abs(self.amplitude), hi + abs(self.amplitude))

    def __repr__(self):
        return f"CircleBump({self.base!r}, a={self.amplitude}, phase={self.phase})"


class FinitePermutation(MapSpec):
    kinds = (FINITE,)

    def __init__(self, perm):
        p = np.asarray(perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(len(p))):
            raise InputError("perm must be a permutation of 0..n-1")
        self.perm = p
        self.inv_perm = np.argsort(p)

    def apply(self, pts):
        return self.perm[pts]

    def apply_inverse(self, pts):
        return self.inv_perm[pts]

    def __repr__(self):
        return f"FinitePermutation({self.perm.tolist()})"


class Inverse(MapSpec):
    def __init__(self, inner: MapSpec):
        self.inner = inner
        self.kinds = inner.kinds

    def apply(self, pts):
        return self.inner.apply_inverse(pts)

    def apply_inverse(self, pts):
        return self.inner.apply(pts)

    def deriv_bounds(self):
        lo, hi = self.inner.deriv_bounds()
        return (1.0 / hi, 1.0 / lo)

    def __repr__(self):
        return f"Inverse({self.inner!r})"


class Composite(MapSpec):
    """Left-to-right composition: parts[0] is applied first."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise InputError("composite needs at least one map")
        self.parts = parts
        kinds = set(parts[0].kinds)
        for p in parts[1:]:
            kinds &= set(p.kinds)
        if not kinds:
            raise InputError("composite parts act on incompatible space kinds")
        self.kinds = tuple(kinds)

    def apply(self, pts):
        for part in self.parts:
            pts = part.apply(pts)
        return pts

    def apply_inverse(self, pts):
        for part in reversed(self.parts):
            pts = part.apply_inverse(pts)
        return pts

    def deriv_bounds(self):
        lo, hi = 1.0, 1.0
        for part in self.parts:
            plo, phi = part.deriv_bounds()
            lo *= plo
            hi *= phi
        return (lo, hi)

    def __repr__(self):
        return f"Composite({self.parts!r})"


class SystemSpec:
    """An integer-indexed family of maps on one space model.

    ``rule`` maps any integer index to a MapSpec; evaluations are memoized
    per index behind a lock so a system can be shared across workers.
    """

    def __init__(self, rule: Callable[[int], MapSpec], space: SpaceModel,
                 description: str = ""):
        self._rule = rule
        self.space = space
        self.description = description
        self._memo: dict[int, MapSpec] = {}
        self._lock = threading.Lock()

    def rule(self, i: int) -> MapSpec:
        with self._lock:
            m = self._memo.get(i)
            if m is None:
                m = self._rule(i)
                if not m.compatible(self.space):
                    raise InputError(
                        f"map {m!r} at index {i} is incompatible with {self.space!r}"
                    )
                self._memo[i] = m
        return m

    def _as_array(self, p: SpacePoint) -> np.ndarray:
        if self.space.kind == FINITE:
            return np.array([p.index], dtype=np.int64)
        return np.asarray(p.coords, dtype=float)[None, :]

    def _as_point(self, arr: np.ndarray) -> SpacePoint:
        if self.space.kind == FINITE:
            return SpacePoint(index=int(arr[0]))
        return SpacePoint(coords=tuple(arr[0]))

    def step(self, i: int, pts: np.ndarray) -> np.ndarray:
        """Apply the index-i map to a batch of points."""
        return self.rule(i).apply(pts)

    def step_back(self, i: int, pts: np.ndarray) -> np.ndarray:
        """Apply the inverse of the index-i map to a batch of points."""
        return self.rule(i).apply_inverse(pts)

    def compose(self, i: int, n: int, pts: np.ndarray) -> np.ndarray:
        """Apply the n-step composition starting at index i (n >= 0)."""
        for k in range(n):
            pts = self.step(i + k, pts)
        return pts

    def compose_back(self, i: int, n: int, pts: np.ndarray) -> np.ndarray:
        """Apply the inverse n-step composition: undo maps i-1, i-2, ..., i-n."""
        for k in range(1, n + 1):
            pts = self.step_back(i - k, pts)
        return pts

    def __repr__(self):
        return f"SystemSpec({self.description or 'anonymous'})"


def apply_map(m: MapSpec, p: SpacePoint) -> SpacePoint:
    """Apply one map to one point, wrapping coordinates."""
    if FINITE in m.kinds and p.index >= 0 and not p.coords:
        return SpacePoint(index=int(m.apply(np.array([p.index]))[0]))
    out = m.apply(np.asarray(p.coords, dtype=float)[None, :])
    return SpacePoint(coords=tuple(out[0]))


def orbit_segment(sys: SystemSpec, i: int, p: SpacePoint, n: int) -> list[SpacePoint]:
    """Forward orbit [p, f_i(p), ..., (n-1)-step image]; the 0-step map is
    the identity."""
    if n < 1:
        raise InputError("orbit length n must be >= 1")
    pts = sys._as_array(p)
    out = [p]
    for k in range(n - 1):
        pts = sys.step(i + k, pts)
        out.append(sys._as_point(pts))
    return out


def orbit_segment_back(sys: SystemSpec, i: int, p: SpacePoint, n: int) -> list[SpacePoint]:
    """Backward orbit [p, f_i^{-1}(p), ...] built from map inverses."""
    if n < 1:
        raise InputError("orbit length n must be >= 1")
    pts = sys._as_array(p)
    out = [p]
    for k in range(1, n):
        pts = sys.step_back(i - k, pts)
        out.append(sys._as_point(pts))
    return out


def constant_family(m: MapSpec, space: SpaceModel, description: str = "") -> SystemSpec:
    """The system whose map is the same at every index."""
    if not m.compatible(space):
        raise InputError(f"{m!r} is incompatible with {space!r}")
    return SystemSpec(lambda i: m, space, description or f"constant {m!r}")


def inverse_system(sys: SystemSpec) -> SystemSpec:
    """Time-reversed system: index j applies the inverse of the map at -j-1.

    Composing the result forward from 0 reproduces the backward inverse
    compositions of the original system.
    """
    return SystemSpec(
        lambda j: Inverse(sys.rule(-j - 1)),
        sys.space,
        f"inverse of {sys.description}",
    )


def gathering(sys: SystemSpec, n: int) -> SystemSpec:
    """Uniform-stride block composition: index i applies maps ni..n(i+1)-1."""
    if n < 1:
        raise InputError("gathering stride must be >= 1")
    if n == 1:
        return SystemSpec(sys.rule, sys.space, sys.description)
    return SystemSpec(
        lambda i: Composite([sys.rule(n * i + k) for k in range(n)]),
        sys.space,
        f"{n}-gathering of {sys.description}",
    )


def gathering_blocks(sys: SystemSpec, pattern: list[int]) -> SystemSpec:
    """Gathering along a periodic block-length pattern (no uniform stride).

    Accepted for experimentation; no scaling relation is claimed for it.
    """
    if not pattern or any(b < 1 for b in pattern):
        raise InputError("block pattern must contain positive lengths")
    period = sum(pattern)
    k = len(pattern)

    def start(i: int) -> int:
        cyc, r = divmod(i, k)
        return cyc * period + sum(pattern[:r])

    return SystemSpec(
        lambda i: Composite(
            [sys.rule(start(i) + j) for j in range(pattern[i % k])]
        ),
        sys.space,
        f"block gathering {pattern} of {sys.description}",
    )


def splice(f: SystemSpec, g: SystemSpec, k: int) -> SystemSpec:
    """System equal to f on the window |i| <= k and to g elsewhere."""
    if f.space is not g.space and (
        f.space.kind != g.space.kind or f.space.kind == FINITE
    ):
        raise InputError("spliced systems must share a space model")
    if k < 0:
        raise InputError("splice window k must be >= 0")
    return SystemSpec(
        lambda i: f.rule(i) if abs(i) <= k else g.rule(i),
        f.space,
        f"splice({f.description} | {g.description}, k={k})",
    )


def _zigzag(i: int) -> int:
    return 2 * i if i >= 0 else -2 * i - 1


# Per-index amplitude falloff for seeded perturbations.  Neighborhoods in
# the strong topology constrain every index at once with radii that may
# shrink; a geometric falloff faster than the expansion rate of the base
# dynamics is what makes the partial-conjugacy iteration contract instead
# of amplifying deep-index noise.
PERTURB_DECAY = 0.25


def perturb(sys: SystemSpec, amplitude: float, seed: int) -> SystemSpec:
    """Seeded bump perturbation of every map in the family.

    Index i gets a sine bump with amplitude a_i and a fresh phase, both
    drawn deterministically from (seed, i), with |a_i| <= amplitude and a
    geometric falloff in |i|.  Same seed, same system.
    """
    if sys.space.kind == FINITE:
        raise InputError("perturbation is defined for circle/torus systems only")
    if not (0.0 <= amplitude < 1.0):
        raise InputError("perturbation amplitude must lie in [0, 1)")

    def rule(i: int) -> MapSpec:
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, _zigzag(i)])
        a = amplitude * rng.uniform(0.5, 1.0) * PERTURB_DECAY ** abs(i)
        phase = rng.uniform(0.0, 1.0)
        return CircleBump(sys.rule(i), a, phase)

    return SystemSpec(
        rule, sys.space, f"perturb({sys.description}, a={amplitude}, seed={seed})"
    )


def conjugate_system(sys: SystemSpec, h) -> SystemSpec:
    """Conjugated system g_i = h_{i+1} o f_i o h_i^{-1}."""
    return SystemSpec(
        lambda i: Composite([Inverse(h.rule(i)), sys.rule(i), h.rule(i + 1)]),
        sys.space,
        f"conjugate of {sys.description}",
    )
