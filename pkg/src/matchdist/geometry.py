"""Filtering lines, normalized slices f*_(a,b) and the sup-norm bounds they obey."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


@dataclass(frozen=True, order=True)
class LineParam:
    """The line through (b, -b) with direction (a, 1 - a); slope (1 - a)/a."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (0.0 <= a <= 1.0):
            raise DomainError(f"a must lie in [0, 1], got {a!r}")
        if not math.isfinite(b):
            raise DomainError(f"b must be finite, got {b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def interior(self) -> bool:
        return 0.0 < self.a < 1.0

    def point(self, t: float) -> tuple[float, float]:
        return line_points(self, t)

    def as_tuple(self) -> tuple[float, float]:
        return (self.a, self.b)


def line_points(p: LineParam, t):
    """Point(s) t*(a, 1-a) + (b, -b) of the filtering line; ``t`` may be an array."""
    return (t * p.a + p.b, t * (1.0 - p.a) - p.b)


@dataclass(frozen=True, eq=False)
class BiFunctionSample:
    """Per-vertex values (f1, f2) of an R^2-valued function on a closed mesh."""

    mesh: Mesh
    values: np.ndarray  # (n, 2)
    name: str = field(default="f")

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.mesh.n_vertices, 2):
            raise DomainError(
                f"values must have shape ({self.mesh.n_vertices}, 2), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("function values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def f1(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def f2(self) -> np.ndarray:
        return self.values[:, 1]

    def swapped(self) -> "BiFunctionSample":
        """The function (f2, f1)."""
        return BiFunctionSample(self.mesh, self.values[:, ::-1], f"swap({self.name})")


@dataclass(frozen=True, eq=False)
class ScalarSlice:
    values: np.ndarray
    source: str
    param: LineParam

    def __len__(self):
        return len(self.values)


def slice_values(f1: np.ndarray, f2: np.ndarray, a: float, b: float) -> np.ndarray:
    """Array kernel of :func:`normalized_slice`."""
    if a == 0.0:
        return np.maximum(f1 - b, 0.0)
    if a == 1.0:
        return np.maximum(0.0, f2 + b)
    c = 1.0 - a
    # min{a, c} max{(f1-b)/a, (f2+b)/c} with the min folded in: no overflow for
    # tiny a or c, and (a, b) -> (1-a, -b) on the swapped function reuses k bit for bit
    if a <= 0.5:
        k = a / c
        return np.maximum(f1 - b, k * (f2 + b))
    k = c / a
    return np.maximum(k * (f1 - b), f2 + b)


def normalized_slice(s: BiFunctionSample, p: LineParam) -> ScalarSlice:
    """Values of min{a,1-a} * max{(f1-b)/a, (f2+b)/(1-a)} at the vertices of ``s``.

    At a = 0 and a = 1 the continuous extensions max{f1-b, 0} and max{0, f2+b}
    are used instead of the quotient.
    """
    return ScalarSlice(slice_values(s.f1, s.f2, p.a, p.b), s.name, p)


def uniform_norm(s: BiFunctionSample) -> float:
    """max over vertices of max(|f1|, |f2|)."""
    if s.values.size == 0:
        return 0.0
    return float(np.max(np.abs(s.values)))


def box_half_width(f: BiFunctionSample, g: BiFunctionSample) -> float:
    """C-bar = max(||f||, ||g||): the b-range of the parameter box is [-C-bar, C-bar]."""
    return max(uniform_norm(f), uniform_norm(g))


@dataclass(frozen=True)
class LipschitzReport:
    p: LineParam
    q: LineParam
    C: float
    lhs: float
    rhs: float
    passed: bool


def lipschitz_bound(norm: float, p: LineParam, q: LineParam, C: float) -> float:
    return 4.0 * abs(p.a - q.a) * (norm + C) + 3.0 * abs(p.b - q.b)


def lipschitz_bound_check(
    s: BiFunctionSample, p: LineParam, q: LineParam, C: float, atol: float = 1e-12
) -> LipschitzReport:
    """Compare ||f*_p - f*_q|| with 4|a-a'|(||f|| + C) + 3|b-b'|; requires |b| <= C."""
    if abs(p.b) > C:
        raise DomainError(f"|b| = {abs(p.b)} exceeds C = {C}")
    lhs = float(np.max(np.abs(normalized_slice(s, p).values - normalized_slice(s, q).values)))
    rhs = lipschitz_bound(uniform_norm(s), p, q, C)
    return LipschitzReport(p, q, C, lhs, rhs, lhs <= rhs + atol)
