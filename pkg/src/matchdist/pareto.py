"""Extended Pareto grids: contours, line intersections and the position check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .geometry import DomainError, LineParam

PROPER = "proper"
VERTICAL = "vertical-improper"
HORIZONTAL = "horizontal-improper"
KINDS = (PROPER, VERTICAL, HORIZONTAL)

DEFAULT_SAMPLES = 512
BISECTION_STEPS = 64


class ContourError(ValueError):
    """A contour file that does not parse or breaks the monotonicity invariant."""


@dataclass(frozen=True, eq=False)
class Contour:
    """One arc or half-line of an extended Pareto grid.

    Proper contours carry a polyline with x non-decreasing and y
    non-increasing; analytic ones also carry ``curve``, a vectorized map from
    [0, 1] onto the arc in the same orientation, which intersections use
    instead of the polyline, and optionally ``solver``, a closed form
    (a, b) -> curve parameter of the intersection.  Improper contours are the half-lines
    {x = x0, y >= y0} (vertical) and {y = y0, x >= x0} (horizontal).
    """

    id: str
    kind: str
    owner: str = "f"
    points: Optional[np.ndarray] = None
    anchor: Optional[tuple[float, float]] = None
    curve: Optional[Callable] = field(default=None, repr=False)
    solver: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContourError(f"contour {self.id}: unknown kind {self.kind!r}")
        if self.kind == PROPER:
            pts = np.asarray(self.points, dtype=np.float64)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise ContourError(f"contour {self.id}: a proper contour needs at least two [x, y] points")
            if not np.all(np.isfinite(pts)):
                raise ContourError(f"contour {self.id}: non-finite coordinates")
            d = np.diff(pts, axis=0)
            if np.any(d[:, 0] < 0) or np.any(d[:, 1] > 0):
                raise ContourError(
                    f"contour {self.id}: not monotone (x must be non-decreasing, y non-increasing)"
                )
            object.__setattr__(self, "points", pts)
        else:
            if self.anchor is None or len(self.anchor) != 2:
                raise ContourError(f"contour {self.id}: an improper contour needs an anchor [x, y]")
            object.__setattr__(self, "anchor", (float(self.anchor[0]), float(self.anchor[1])))

    def same_as(self, other: "Contour") -> bool:
        if (self.id, self.kind, self.owner) != (other.id, other.kind, other.owner):
            return False
        if self.kind == PROPER:
            return np.array_equal(self.points, other.points)
        return self.anchor == other.anchor

    def same_geometry(self, other: "Contour") -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == PROPER:
            return self.points.shape == other.points.shape and np.array_equal(self.points, other.points)
        return self.anchor == other.anchor

    def evaluate(self, s):
        """Point(s) at curve parameter ``s`` in [0, 1] (proper contours only)."""
        if self.curve is not None:
            return self.curve(np.asarray(s, dtype=np.float64))
        pts = self.points
        u = np.asarray(s, dtype=np.float64) * (len(pts) - 1)
        grid = np.arange(len(pts))
        return np.interp(u, grid, pts[:, 0]), np.interp(u, grid, pts[:, 1])

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind}
        if self.kind == PROPER:
            d["points"] = [[float(x), float(y)] for x, y in self.points]
        else:
            d["anchor"] = [self.anchor[0], self.anchor[1]]
        return d


@dataclass(frozen=True, eq=False)
class ExtendedParetoGrid:
    contours: tuple
    owner: str = "f"

    def __post_init__(self):
        object.__setattr__(self, "contours", tuple(self.contours))
        ids = [c.id for c in self.contours]
        if len(set(ids)) != len(ids):
            raise ContourError("contour ids must be unique within a grid")

    def __len__(self):
        return len(self.contours)

    def __iter__(self):
        return iter(self.contours)

    def same_as(self, other: "ExtendedParetoGrid") -> bool:
        return (
            self.owner == other.owner
            and len(self) == len(other)
            and all(c.same_as(d) for c, d in zip(self.contours, other.contours))
        )

    def counts(self) -> dict:
        return {k: sum(c.kind == k for c in self.contours) for k in KINDS}

    def to_dict(self) -> dict:
        return {"owner": self.owner, "contours": [c.to_dict() for c in self.contours]}


def merge(*grids: ExtendedParetoGrid) -> list[Contour]:
    """Ctr(f, g): all contours of all grids; copies of the same contour stay distinct."""
    return [c for g in grids for c in g.contours]


# ---------------------------------------------------------------------------
# analytic grids of affine images of (x, z) on the unit sphere


def _circle(theta):
    # exact values at the quarter turns keep the arc endpoints on the critical values
    c, s = np.cos(theta), np.sin(theta)
    q = theta / (np.pi / 2)
    k = np.rint(q)
    at = np.isclose(q, k, rtol=0, atol=1e-15)
    kk = np.mod(k, 4).astype(int)
    c = np.where(at, np.choose(kk, [1.0, 0.0, -1.0, 0.0]), c)
    s = np.where(at, np.choose(kk, [0.0, 1.0, 0.0, -1.0]), s)
    return c, s


def _arc(theta0, theta1, c1, d1, c2, d2):
    def curve(s):
        c, sn = _circle(theta0 + (theta1 - theta0) * s)
        return c1 * c + d1, c2 * sn + d2

    def solver(a, b):
        # (1-a)(c1 cos t + d1 - b) = a(c2 sin t + d2 + b)  <=>  R cos(t - phi) = K
        A = (1.0 - a) * c1
        B = -a * c2
        K = a * (d2 + b) - (1.0 - a) * (d1 - b)
        R = np.hypot(A, B)
        phi = np.arctan2(B, A)
        acos = np.arccos(np.clip(K / R, -1.0, 1.0))
        lo, hi = min(theta0, theta1), max(theta0, theta1)
        best = None
        for t in (phi + acos, phi - acos):
            # bring each root into the arc's angular window, then keep the closer one
            t = lo + np.mod(t - lo, 2 * np.pi)
            t = np.where(t - hi > np.pi, t - 2 * np.pi, t)
            err = np.maximum(t - hi, lo - t)
            s = np.clip((t - theta0) / (theta1 - theta0), 0.0, 1.0)
            best = (err, s) if best is None else (
                np.minimum(best[0], err), np.where(err < best[0], s, best[1]))
        return best[1]

    return curve, solver


def sphere_affine_epg(c1=1.0, d1=0.0, c2=1.0, d2=0.0, owner="f", samples=DEFAULT_SAMPLES) -> ExtendedParetoGrid:
    """Grid of (c1*x + d1, c2*z + d2) on the unit sphere.

    Its Jacobi set is the great circle y = 0; the Pareto-critical part is the
    two quarter arcs where x*z >= 0, mapped to elliptic arcs.  Critical points
    of the first component sit at (+-1, 0, 0), of the second at (0, 0, +-1).
    """
    if not (c1 > 0 and c2 > 0):
        raise DomainError(f"scales must be positive, got c1={c1}, c2={c2}")
    s = np.linspace(0.0, 1.0, samples)
    contours = []
    # oriented so that x grows and y falls along the parameter
    for name, (t0, t1) in (("arc-upper", (np.pi / 2, 0.0)), ("arc-lower", (np.pi, 1.5 * np.pi))):
        curve, solver = _arc(t0, t1, c1, d1, c2, d2)
        xs, ys = curve(s)
        contours.append(
            Contour(f"{owner}:{name}", PROPER, owner, np.stack([xs, ys], 1), curve=curve, solver=solver)
        )
    contours += [
        Contour(f"{owner}:v-min", VERTICAL, owner, anchor=(d1 - c1, d2)),
        Contour(f"{owner}:v-max", VERTICAL, owner, anchor=(d1 + c1, d2)),
        Contour(f"{owner}:h-min", HORIZONTAL, owner, anchor=(d1, d2 - c2)),
        Contour(f"{owner}:h-max", HORIZONTAL, owner, anchor=(d1, d2 + c2)),
    ]
    return ExtendedParetoGrid(tuple(contours), owner)


# ---------------------------------------------------------------------------
# contour files


def _schema():
    text = resources.files("matchdist").joinpath("schemas/contours.schema.json").read_text()
    return json.loads(text)


def grid_from_dict(data: dict) -> ExtendedParetoGrid:
    import jsonschema

    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        raise ContourError(f"invalid contour file: {exc.message}") from None
    owner = data["owner"]
    contours = []
    for c in data["contours"]:
        if c["kind"] == PROPER:
            contours.append(Contour(c["id"], PROPER, owner, np.array(c["points"], dtype=float)))
        else:
            contours.append(Contour(c["id"], c["kind"], owner, anchor=tuple(c["anchor"])))
    return ExtendedParetoGrid(tuple(contours), owner)


def load_contours(path) -> ExtendedParetoGrid:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ContourError(f"cannot parse {path}: {exc}") from exc
    return grid_from_dict(data)


def save_contours(grid: ExtendedParetoGrid, path) -> None:
    Path(path).write_text(json.dumps(grid.to_dict(), indent=1) + "\n")


# ---------------------------------------------------------------------------
# intersections with filtering lines


def _side(x, y, a, b):
    # zero on r_(a,b); grows as (x, y) moves right or down across the line
    return (1.0 - a) * (x - b) - a * (y + b)


def intersect_many(contour: Contour, a, b):
    """Intersections of one contour with the lines r_(a_i, b_i).

    Returns (x, y, hit) arrays; x and y are NaN where ``hit`` is False.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    nan = np.full(a.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        if contour.kind == VERTICAL:
            x0, y0 = contour.anchor
            y = (1.0 - a) * (x0 - b) / a - b
            hit = (a > 0) & (y >= y0)
            return np.where(hit, x0, nan), np.where(hit, y, nan), hit
        if contour.kind == HORIZONTAL:
            x0, y0 = contour.anchor
            x = b + a * (y0 + b) / (1.0 - a)
            hit = (a < 1) & (x >= x0)
            return np.where(hit, x, nan), np.where(hit, y0, nan), hit
    # proper: the side function is monotone along the contour, so bisect on the parameter
    x0, y0 = contour.evaluate(np.zeros(a.shape))
    x1, y1 = contour.evaluate(np.ones(a.shape))
    s0, s1 = _side(x0, y0, a, b), _side(x1, y1, a, b)
    hit = (s0 <= 0) & (s1 >= 0)
    if contour.solver is not None:
        xs, ys = contour.evaluate(contour.solver(a, b))
        return np.where(hit, xs, nan), np.where(hit, ys, nan), hit
    lo, hi = np.zeros(a.shape), np.ones(a.shape)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        xm, ym = contour.evaluate(mid)
        right = _side(xm, ym, a, b) >= 0
        hi = np.where(right, mid, hi)
        lo = np.where(right, lo, mid)
    xs, ys = contour.evaluate(0.5 * (lo + hi))
    return np.where(hit, xs, nan), np.where(hit, ys, nan), hit


def intersect(contour: Contour, p: LineParam):
    x, y, hit = intersect_many(contour, p.a, p.b)
    return (float(x), float(y)) if bool(hit) else None


def line_intersections(grid, p: LineParam) -> list[tuple[str, tuple[float, float]]]:
    """(contour id, point) for every contour met by r_(a,b), sorted by abscissa.

    ``grid`` may be an ExtendedParetoGrid or any iterable of contours.
    """
    out = []
    for c in grid:
        pt = intersect(c, p)
        if pt is not None:
            out.append((c.id, pt))
    out.sort(key=lambda item: (item[1][0], item[1][1], item[0]))
    return out


def normalized_coordinate(p: LineParam, x: float) -> float:
    """min{a, 1-a}/a * (x - b): the diagram coordinate a grid point on the line stands for."""
    return min(p.a, 1.0 - p.a) / p.a * (x - p.b)


@dataclass
class PositionReport:
    param: LineParam
    matches: list  # (point, (birth contour, death contour), residual)
    failures: list  # (point, residual)
    worst: float
    passed: bool


def position_check(diagrams, grid, p: LineParam, tol: float, mode: str = "stable") -> PositionReport:
    """Match diagram points to normalized line-grid intersection coordinates.

    ``diagrams`` is one PersistenceDiagram or a list of them, computed from the
    function that owns ``grid`` at the same line.  With ``mode="coordinate"``
    every finite birth and death must lie within ``tol`` of an intersection
    coordinate.  The default ``mode="stable"`` measures each finite point by the
    same cost as the bottleneck distance: the worse of its two coordinate
    residuals, or half its persistence if that is smaller, since short bars of a
    discretized function need not sit on the grid of the smooth one.  Essential
    points are measured by their birth.
    """
    if not p.interior:
        raise DomainError("the position check needs 0 < a < 1")
    if mode not in ("stable", "coordinate"):
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(diagrams, (list, tuple)):
        diagrams = [diagrams]
    hits = line_intersections(grid, p)
    ws = np.array([normalized_coordinate(p, pt[0]) for _, pt in hits])

    def nearest(v):
        if len(ws) == 0:
            return None, math.inf
        k = int(np.argmin(np.abs(ws - v)))
        return hits[k][0], float(abs(ws[k] - v))

    matches, failures, worst = [], [], 0.0
    for d in diagrams:
        for birth, death in d.points:
            ib, rb = nearest(birth)
            if math.isfinite(death):
                idd, rd = nearest(death)
                r = max(rb, rd)
                if mode == "stable":
                    r = min(r, (death - birth) / 2.0)
            else:
                idd, r = None, rb
            pt = (float(birth), float(death))
            worst = max(worst, r)
            if r <= tol:
                matches.append((pt, (ib, idd), r))
            else:
                failures.append((pt, r))
    return PositionReport(p, matches, failures, worst, not failures)
