"""Special values: lines on which two distinct contour pairs cut equal (or doubled) gaps."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import LineParam
from .pareto import ContourError, intersect_many

COEFFICIENTS = ((1, 1), (1, 2), (2, 1))  # (2, 2) has the same zero set as (1, 1)
REFINE_STEPS = 60


@dataclass(frozen=True)
class SpecialValue:
    """A parameter (a, b) with its witness.

    ``pairs`` holds the contour ids ((p, q), (s, t)); the condition is
    c1 |u_P - u_Q| = c2 |u_S - u_T| where u is the abscissa when a <= 1/2 and
    the ordinate when a >= 1/2.  ``condition`` names the coordinate used for
    ``residual`` ("abscissa", "ordinate", or "both" at a = 1/2).
    """

    param: LineParam
    pairs: tuple
    c1: int
    c2: int
    points: tuple  # P, Q, S, T
    residual: float
    condition: str
    degenerate: bool = False

    @property
    def a(self) -> float:
        return self.param.a

    @property
    def b(self) -> float:
        return self.param.b

    def ids(self) -> str:
        (p, q), (s, t) = self.pairs
        return f"{p}|{q};{s}|{t}"


def _residuals(P, Q, S, T, c1, c2):
    rx = abs(c1 * abs(P[0] - Q[0]) - c2 * abs(S[0] - T[0]))
    ry = abs(c1 * abs(P[1] - Q[1]) - c2 * abs(S[1] - T[1]))
    return rx, ry


def _condition_residual(a, rx, ry):
    if a < 0.5:
        return rx, "abscissa"
    if a > 0.5:
        return ry, "ordinate"
    return min(rx, ry), "both"


def _identical(c, d):
    return c is not d and c.same_geometry(d)


def _is_degenerate(cp, cq, cs, ct, c1, c2) -> bool:
    """Witnesses whose gap equation holds identically because contours are copies."""
    if _identical(cp, cq) and _identical(cs, ct):
        return True
    if c1 != c2:
        return False
    return (cp.same_geometry(cs) and cq.same_geometry(ct)) or (cp.same_geometry(ct) and cq.same_geometry(cs))


def witness_at(p: LineParam, contours, pair_ids, c1, c2) -> SpecialValue | None:
    """Rebuild the witness for given contour ids at ``p``; None if a contour misses the line."""
    by_id = {c.id: c for c in contours}
    (ip, iq), (is_, it) = pair_ids
    pts = []
    for cid in (ip, iq, is_, it):
        x, y, hit = intersect_many(by_id[cid], p.a, p.b)
        if not bool(hit):
            return None
        pts.append((float(x), float(y)))
    rx, ry = _residuals(*pts, c1, c2)
    r, cond = _condition_residual(p.a, rx, ry)
    deg = _is_degenerate(by_id[ip], by_id[iq], by_id[is_], by_id[it], c1, c2)
    return SpecialValue(p, ((ip, iq), (is_, it)), c1, c2, tuple(pts), r, cond, deg)


def is_special(p: LineParam, contours, tol: float) -> SpecialValue | None:
    """Smallest-residual witness at ``p`` if its residual is within ``tol``."""
    contours = list(contours)
    hits = []
    for c in contours:
        x, y, hit = intersect_many(c, p.a, p.b)
        if bool(hit):
            hits.append((c, (float(x), float(y))))
    best = None
    pairs = list(itertools.combinations(range(len(hits)), 2))
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        P, Q, S, T = hits[i][1], hits[j][1], hits[k][1], hits[l][1]
        for c1, c2 in COEFFICIENTS:
            rx, ry = _residuals(P, Q, S, T, c1, c2)
            r, cond = _condition_residual(p.a, rx, ry)
            if best is None or r < best[0]:
                best = (r, cond, (i, j, k, l), c1, c2)
    if best is None or best[0] > tol:
        return None
    r, cond, (i, j, k, l), c1, c2 = best
    cs = [hits[m][0] for m in (i, j, k, l)]
    return SpecialValue(
        p,
        ((cs[0].id, cs[1].id), (cs[2].id, cs[3].id)),
        c1,
        c2,
        tuple(hits[m][1] for m in (i, j, k, l)),
        r,
        cond,
        _is_degenerate(*cs, c1, c2),
    )


def _lattice(a_range, b_range, grid_res):
    a = np.linspace(a_range[0], a_range[1], grid_res + 1)
    a = a[(a > 0.0) & (a < 1.0)]
    b = np.linspace(b_range[0], b_range[1], grid_res + 1)
    return a, b


def _degenerate_table(contours, pairs):
    n = len(contours)
    same = np.array([[contours[i].same_geometry(contours[j]) for j in range(n)] for i in range(n)])
    copy_pair = np.array([same[i, j] for i, j in pairs])
    P = np.array(pairs)
    # pair u and pair v consist of the same two geometries
    eq = (same[P[:, 0]][:, P[:, 0]] & same[P[:, 1]][:, P[:, 1]]) | (
        same[P[:, 0]][:, P[:, 1]] & same[P[:, 1]][:, P[:, 0]]
    )
    return copy_pair, eq


def find_special_values(
    contours,
    a_range=(0.0, 1.0),
    b_range=(-1.0, 1.0),
    grid_res: int = 128,
    tol: float = 1e-9,
    exclude_degenerate: bool = False,
) -> list[SpecialValue]:
    """Sample the special set on a lattice over ``a_range`` x ``b_range``.

    For every pair of distinct contour pairs and coefficients (c1, c2), the
    signed gap differences c1 (x_P - x_Q) -/+ c2 (x_S - x_T) are sampled at the
    lattice nodes; along a fixed line ordinate gaps are the abscissa gaps times
    the slope, so one field serves both conditions.  Sign changes along lattice
    edges are refined by bisection and exact zeros at nodes are kept, so every
    value lies on a lattice row (b fixed) or column (a fixed).  Values of one
    witness on one lattice line closer than a lattice spacing are merged.

    Witnesses that vanish identically because contours are geometric copies
    (e.g. f = g) are flagged ``degenerate``; ``exclude_degenerate`` drops them.
    """
    contours = list(contours)
    n = len(contours)
    ids = [c.id for c in contours]
    if len(set(ids)) != n:
        raise ContourError("contour ids must be unique across the merged grids")
    if n < 3:
        return []
    a_nodes, b_nodes = _lattice(a_range, b_range, grid_res)
    if len(a_nodes) == 0:
        return []
    A, B = np.meshgrid(a_nodes, b_nodes, indexing="ij")
    X = np.stack([intersect_many(c, A, B)[0] for c in contours])  # NaN where missed

    pairs = list(itertools.combinations(range(n), 2))
    copy_pair, same_pairs = _degenerate_table(contours, pairs)
    gaps = np.stack([X[i] - X[j] for i, j in pairs])
    quads, coefs, ends = [], [], []
    for u in range(len(pairs) - 1):
        rest = np.arange(u + 1, len(pairs))
        g0 = gaps[u][None]
        for c1, c2 in COEFFICIENTS:
            degenerate = copy_pair[u] & copy_pair[rest]
            if c1 == c2:
                degenerate |= same_pairs[u, rest]
            if exclude_degenerate:
                if degenerate.all():
                    continue
                sel = rest[~degenerate]
            else:
                sel = rest
            for sign in (1, -1):
                h = c1 * g0 - sign * c2 * gaps[sel]
                for k, e in _sign_changes(h):
                    v = pairs[sel[k]]
                    quads.append((*pairs[u], *v))
                    coefs.append((c1, sign * c2))
                    ends.append(e)
    if not quads:
        return []
    values = _refine(contours, np.array(quads), np.array(coefs, dtype=float), np.array(ends), a_nodes, b_nodes, tol)
    if exclude_degenerate:
        values = [s for s in values if not s.degenerate]
    da = (a_range[1] - a_range[0]) / grid_res
    db = (b_range[1] - b_range[0]) / grid_res
    return _dedup(values, set(b_nodes.tolist()), da, db)


def zoom_special_values(
    contours, center: LineParam, half_width=(0.0078125, 0.0078125), grid_res: int = 128, tol: float = 1e-9, exclude_degenerate: bool = False
) -> list[SpecialValue]:
    """Rerun the lattice search on a small window around ``center``.

    Used coarse-to-fine: a value found on a coarse lattice locates a branch of
    the special set, and the window search samples that branch densely.
    """
    ha, hb = half_width
    a_range = (max(center.a - ha, 0.0), min(center.a + ha, 1.0))
    b_range = (center.b - hb, center.b + hb)
    return find_special_values(contours, a_range, b_range, grid_res, tol, exclude_degenerate)


def nearest_special(values, target) -> SpecialValue | None:
    """The value closest to ``target`` = (a, b) in the Euclidean sense."""
    a, b = target
    return min(values, key=lambda s: (math.hypot(s.a - a, s.b - b), s.a, s.b), default=None)


def _sign_changes(h):
    """(field index, (i0, j0, i1, j1)) for sign changes on lattice edges and zeros at nodes."""
    finite = np.isfinite(h)
    out = []
    ok = finite[:, :-1, :] & finite[:, 1:, :] & (h[:, :-1, :] * h[:, 1:, :] < 0)
    out += [(k, (i, j, i + 1, j)) for k, i, j in zip(*np.nonzero(ok))]
    ok = finite[:, :, :-1] & finite[:, :, 1:] & (h[:, :, :-1] * h[:, :, 1:] < 0)
    out += [(k, (i, j, i, j + 1)) for k, i, j in zip(*np.nonzero(ok))]
    out += [(k, (i, j, i, j)) for k, i, j in zip(*np.nonzero(h == 0))]
    return out


def _intersections(contours, quad, a, b):
    xs = np.full((4, len(a)), np.nan)
    ys = np.full((4, len(a)), np.nan)
    for ci in np.unique(quad):
        rows, cols = np.nonzero(quad.T == ci)
        x, y, _ = intersect_many(contours[ci], a[cols], b[cols])
        xs[rows, cols] = x
        ys[rows, cols] = y
    return xs, ys


def _refine(contours, quad, coef, ends, a_nodes, b_nodes, tol):
    a0, b0 = a_nodes[ends[:, 0]], b_nodes[ends[:, 1]]
    a1, b1 = a_nodes[ends[:, 2]], b_nodes[ends[:, 3]]
    c1, c2s = coef[:, 0], coef[:, 1]

    def signed(a, b):
        xs, _ = _intersections(contours, quad, a, b)
        return c1 * (xs[0] - xs[1]) - c2s * (xs[2] - xs[3])

    h0 = signed(a0, b0)
    lo, hi = np.zeros(len(a0)), np.ones(len(a0))
    for _ in range(REFINE_STEPS):
        mid = 0.5 * (lo + hi)
        same = np.sign(signed(a0 + mid * (a1 - a0), b0 + mid * (b1 - b0))) == np.sign(h0)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    # zero-length edges are node zeros; a0 + t*0 keeps the node exactly
    a, b = a0 + t * (a1 - a0), b0 + t * (b1 - b0)
    xs, ys = _intersections(contours, quad, a, b)
    c2 = np.abs(c2s)
    rx = np.abs(c1 * np.abs(xs[0] - xs[1]) - c2 * np.abs(xs[2] - xs[3]))
    ry = np.abs(c1 * np.abs(ys[0] - ys[1]) - c2 * np.abs(ys[2] - ys[3]))
    res = np.where(a < 0.5, rx, np.where(a > 0.5, ry, np.minimum(rx, ry)))
    # a contour can leave the line inside the edge; such sign changes are not zeros
    keep = np.flatnonzero(np.isfinite(res) & (res <= tol))
    out = []
    for k in keep:
        ids = [contours[i] for i in quad[k]]
        cond = "abscissa" if a[k] < 0.5 else ("ordinate" if a[k] > 0.5 else "both")
        pts = tuple((float(xs[m, k]), float(ys[m, k])) for m in range(4))
        k1, k2 = int(c1[k]), int(c2[k])
        out.append(
            SpecialValue(
                LineParam(a[k], b[k]),
                ((ids[0].id, ids[1].id), (ids[2].id, ids[3].id)),
                k1,
                k2,
                pts,
                float(res[k]),
                cond,
                _is_degenerate(*ids, k1, k2),
            )
        )
    return out


def _dedup(values, rows, da, db):
    """Merge values of one witness on one lattice line that are closer than a spacing."""
    lines = {}
    for s in values:
        line = ("b", s.b) if s.b in rows else ("a", s.a)
        lines.setdefault((s.ids(), s.c1, s.c2, line), []).append(s)
    kept = []
    for (_, _, _, (axis, _)), group in lines.items():
        along, step = (lambda s: s.a, da) if axis == "b" else (lambda s: s.b, db)
        group.sort(key=lambda s: (along(s), s.residual))
        last = None
        for s in group:
            if last is None or along(s) - along(last) >= step:
                kept.append(s)
                last = s
    kept.sort(key=lambda s: (s.a, s.b, s.ids(), s.c1, s.c2))
    return kept
