"""Bottleneck distance between persistence diagrams, with an exhaustive oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .geometry import DomainError
from .persistence import PersistenceDiagram

INF = math.inf
DIAGONAL = None  # stands for the diagonal in matchings


def point_distance(X, Y) -> float:
    """Matching cost between two diagram points, either of which may be the diagonal.

    Finite points cost min{ max(|x1-y1|, |x2-y2|), max(|x2-x1|, |y2-y1|)/2 };
    a point against the diagonal costs half its persistence; essential points
    only match essential points, at the difference of their births.
    """
    if X is DIAGONAL and Y is DIAGONAL:
        return 0.0
    if Y is DIAGONAL:
        X, Y = Y, X
    if X is DIAGONAL:
        y1, y2 = Y
        return (y2 - y1) / 2.0 if math.isfinite(y2) else INF
    x1, x2 = X
    y1, y2 = Y
    x_inf, y_inf = not math.isfinite(x2), not math.isfinite(y2)
    if x_inf or y_inf:
        return abs(x1 - y1) if x_inf and y_inf else INF
    return min(max(abs(x1 - y1), abs(x2 - y2)), max(abs(x2 - x1) / 2.0, abs(y2 - y1) / 2.0))


@dataclass
class MatchingWitness:
    """A matching given as (point-or-diagonal, point-or-diagonal) pairs and its cost.

    ``type1`` is set when the cost is attained on a point-to-point pair,
    ``type2`` when it is attained on a point-to-diagonal pair; both may hold.
    """

    pairs: list = field(default_factory=list)
    cost: float = 0.0
    type1: bool = False
    type2: bool = False

    @classmethod
    def from_pairs(cls, pairs) -> "MatchingWitness":
        costs = [point_distance(x, y) for x, y in pairs]
        cost = max(costs, default=0.0)
        t1 = any(c == cost and x is not DIAGONAL and y is not DIAGONAL for c, (x, y) in zip(costs, pairs))
        t2 = any(c == cost and (x is DIAGONAL) != (y is DIAGONAL) for c, (x, y) in zip(costs, pairs))
        return cls(list(pairs), cost, t1, t2)

    def to_dict(self) -> dict:
        def enc(p):
            if p is DIAGONAL:
                return "diagonal"
            return [_num(p[0]), _num(p[1])]

        return {
            "cost": _num(self.cost),
            "type1": self.type1,
            "type2": self.type2,
            "pairs": [[enc(x), enc(y)] for x, y in self.pairs],
        }


def _num(x):
    return float(x) if math.isfinite(x) else "inf"


def _as_points(D):
    pts = D.points if isinstance(D, PersistenceDiagram) else np.asarray(D, dtype=float).reshape(-1, 2)
    return [(float(b), float(d)) for b, d in pts]


def _degree(D):
    return D.degree if isinstance(D, PersistenceDiagram) else None


def _feasible_matching(A, B, dist, eps):
    """Perfect matching of the doubled bipartite graph at threshold ``eps``, or None.

    Rows are A then one diagonal copy per point of B; columns are B then one
    diagonal copy per point of A.
    """
    n, m = len(A), len(B)
    rows, cols = [], []
    for i in range(n):
        for j in range(m):
            if dist[i][j] <= eps:
                rows.append(i)
                cols.append(j)
        if (A[i][1] - A[i][0]) / 2.0 <= eps:
            rows.append(i)
            cols.append(m + i)
    for j in range(m):
        if (B[j][1] - B[j][0]) / 2.0 <= eps:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    size = n + m
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="row")
    if np.any(match < 0):
        return None
    return match


def bottleneck_distance(D1, D2) -> tuple[float, MatchingWitness]:
    """Exact bottleneck distance and an optimal matching.

    The optimum is one of the pairwise costs, so the threshold is searched over
    that finite set with a bipartite perfect-matching test at each step.
    """
    k1, k2 = _degree(D1), _degree(D2)
    if k1 is not None and k2 is not None and k1 != k2:
        raise DomainError(f"diagrams have different degrees {k1} and {k2}")
    P1, P2 = _as_points(D1), _as_points(D2)
    E1 = sorted(p for p in P1 if not math.isfinite(p[1]))
    E2 = sorted(p for p in P2 if not math.isfinite(p[1]))
    if len(E1) != len(E2):
        return INF, MatchingWitness([], INF, False, False)
    # essential classes: matching sorted births is optimal on the line
    pairs = list(zip(E1, E2))

    A = [p for p in P1 if math.isfinite(p[1])]
    B = [p for p in P2 if math.isfinite(p[1])]
    if not A and not B:
        witness = MatchingWitness.from_pairs(pairs)
        return witness.cost, witness
    dist = [[point_distance(a, b) for b in B] for a in A]
    cand = {0.0}
    cand.update(v for row in dist for v in row)
    cand.update((p[1] - p[0]) / 2.0 for p in A + B)
    cand = sorted(cand)

    lo, hi = 0, len(cand) - 1
    best = _feasible_matching(A, B, dist, cand[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        match = _feasible_matching(A, B, dist, cand[mid])
        if match is None:
            lo = mid + 1
        else:
            hi, best = mid, match

    n, m = len(A), len(B)
    # best[col] = row matched to that column
    for j in range(m):
        r = best[j]
        pairs.append((A[r], B[j]) if r < n else (DIAGONAL, B[j]))
    for i in range(n):
        r = best[m + i]
        if r < n:
            pairs.append((A[r], DIAGONAL))
    witness = MatchingWitness.from_pairs(pairs)
    return witness.cost, witness


def brute_force_bottleneck(D1, D2, max_points: int = 8) -> float:
    """Minimum cost over every bijection-with-diagonal, by enumeration."""
    A, B = _as_points(D1), _as_points(D2)
    if len(A) + len(B) > max_points:
        raise DomainError(f"brute force limited to {max_points} points, got {len(A) + len(B)}")
    n, m = len(A), len(B)
    to_diag_a = [point_distance(a, DIAGONAL) for a in A]
    to_diag_b = [point_distance(DIAGONAL, b) for b in B]
    best = INF if (n or m) else 0.0
    # each point of A goes to a distinct point of B or to the diagonal (None)
    for assign in itertools.product(*[list(range(m)) + [None]] * n):
        used = [j for j in assign if j is not None]
        if len(used) != len(set(used)):
            continue
        cost = 0.0
        for i, j in enumerate(assign):
            cost = max(cost, to_diag_a[i] if j is None else point_distance(A[i], B[j]))
        used = set(used)
        for j in range(m):
            if j not in used:
                cost = max(cost, to_diag_b[j])
        best = min(best, cost)
    return best
