"""Sublevel-set persistence of piecewise-linear functions on closed triangle meshes.

Two routes produce the same diagrams:

* :func:`build_lower_star` + :func:`compute_diagram` -- the explicit lower-star
  filtration and Z/2 column reduction of its boundary matrix;
* :func:`surface_diagrams` -- union-find on the mesh graph for degree 0 and on
  the dual graph, in reverse order, for degrees 1 and 2.  Only valid on closed
  connected surfaces, where Z/2 duality pairs edges with triangles.  This is the
  route the parameter-space searches use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .geometry import DomainError, ScalarSlice
from .mesh import Mesh

INF = math.inf


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Off-diagonal points of a diagram in one homology degree; the diagonal is implicit."""

    degree: int
    points: np.ndarray  # (k, 2) birth, death; death may be +inf

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if np.any(~np.isfinite(pts[:, 0])):
            raise ValueError("births must be finite")
        if np.any(pts[:, 1] < pts[:, 0]):
            raise ValueError("death precedes birth")
        # canonical order makes equality and serialization independent of construction
        pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        object.__setattr__(self, "points", np.ascontiguousarray(pts))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.points, other.points)

    @property
    def finite(self) -> np.ndarray:
        return self.points[np.isfinite(self.points[:, 1])]

    @property
    def essential(self) -> np.ndarray:
        """Births of the infinite-death points, ascending."""
        return np.sort(self.points[~np.isfinite(self.points[:, 1]), 0])

    def to_records(self) -> list[dict]:
        return [
            {"degree": self.degree, "birth": float(b), "death": float(d) if math.isfinite(d) else "inf"}
            for b, d in self.points
        ]


def diagrams_to_json(diagrams) -> str:
    return json.dumps([r for d in diagrams for r in d.to_records()], indent=1)


def diagrams_from_json(text: str) -> list[PersistenceDiagram]:
    by_degree: dict[int, list] = {}
    for r in json.loads(text):
        death = INF if r["death"] == "inf" else float(r["death"])
        by_degree.setdefault(int(r["degree"]), []).append((float(r["birth"]), death))
    return [PersistenceDiagram(k, np.array(v)) for k, v in sorted(by_degree.items())]


def diagrams_to_csv(diagrams) -> str:
    rows = ["degree,birth,death"]
    for d in diagrams:
        rows += [f"{d.degree},{b!r},{'inf' if not math.isfinite(e) else repr(e)}" for b, e in d.points]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# explicit filtration and column reduction


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices in filtration order with their entry values.

    The order is by (value, dimension, sorted vertex tuple); faces therefore
    precede cofaces.
    """

    simplices: tuple  # of sorted vertex tuples
    values: np.ndarray

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.simplices)}

    @cached_property
    def dims(self) -> np.ndarray:
        return np.array([len(s) - 1 for s in self.simplices])

    def boundary(self, j: int) -> list[int]:
        s = self.simplices[j]
        if len(s) == 1:
            return []
        idx = self.index
        return sorted(idx[s[:i] + s[i + 1 :]] for i in range(len(s)))

    @cached_property
    def pairs(self):
        """(birth index, death index or -1) for every non-trivial or essential class."""
        return _reduce(self)

    def validate(self) -> None:
        for j, s in enumerate(self.simplices):
            for i in self.boundary(j):
                if i >= j or self.values[i] > self.values[j]:
                    raise ValueError(f"face {self.simplices[i]} does not precede {s}")


def _slice_array(values) -> np.ndarray:
    if isinstance(values, ScalarSlice):
        values = values.values
    return np.asarray(values, dtype=np.float64)


def build_lower_star(values, mesh: Mesh) -> Filtration:
    """Lower-star filtration: each simplex enters at the max of its vertex values."""
    vals = _slice_array(values)
    if len(vals) != mesh.n_vertices:
        raise DomainError(f"slice has {len(vals)} values but the mesh has {mesh.n_vertices} vertices")
    simplices = [(int(v),) for v in range(mesh.n_vertices)]
    simplices += [tuple(int(i) for i in e) for e in mesh.edges]
    simplices += [tuple(int(i) for i in t) for t in mesh.triangles]
    entry = [max(vals[i] for i in s) for s in simplices]
    order = sorted(range(len(simplices)), key=lambda j: (entry[j], len(simplices[j]), simplices[j]))
    return Filtration(tuple(simplices[j] for j in order), np.array([entry[j] for j in order]))


def _reduce(filt: Filtration):
    """Standard Z/2 column reduction; columns are Python ints used as bitsets."""
    n = len(filt.simplices)
    low_of: dict[int, int] = {}
    pairs = []
    paired = np.zeros(n, dtype=bool)
    for j in range(n):
        col = 0
        for i in filt.boundary(j):
            col |= 1 << i
        while col:
            low = col.bit_length() - 1
            k = low_of.get(low)
            if k is None:
                break
            col ^= k[1]
        if col:
            low = col.bit_length() - 1
            low_of[low] = (j, col)
            pairs.append((low, j))
            paired[low] = paired[j] = True
    pairs += [(j, -1) for j in range(n) if not paired[j]]
    return pairs


def compute_diagram(filt: Filtration, degree: int) -> PersistenceDiagram:
    """Diagram in one degree; zero-persistence pairs are dropped."""
    if degree not in (0, 1, 2):
        raise DomainError(f"degree must be 0, 1 or 2, got {degree}")
    dims, vals = filt.dims, filt.values
    pts = []
    for i, j in filt.pairs:
        if dims[i] != degree:
            continue
        if j < 0:
            pts.append((vals[i], INF))
        elif vals[j] > vals[i]:
            pts.append((vals[i], vals[j]))
    return PersistenceDiagram(degree, np.array(pts).reshape(-1, 2))


# ---------------------------------------------------------------------------
# union-find route for closed surfaces


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _surface_pairs(vals, edges, edge_tris, tri_val, e_order, t_rank, v_rank):
    n = vals.shape[0]
    ne = edges.shape[0]
    nt = tri_val.shape[0]
    b0 = np.empty(n)
    d0 = np.empty(n)
    k0 = 0
    negative = np.zeros(ne, dtype=np.bool_)
    parent = np.arange(n)
    for idx in range(ne):
        e = e_order[idx]
        u = _find(parent, edges[e, 0])
        w = _find(parent, edges[e, 1])
        if u == w:
            continue
        # roots are the oldest vertex of their component; the younger one dies
        if v_rank[u] < v_rank[w]:
            u, w = w, u
        b0[k0] = vals[u]
        d0[k0] = max(vals[edges[e, 0]], vals[edges[e, 1]])
        k0 += 1
        parent[u] = w
        negative[e] = True

    b1 = np.empty(ne)
    d1 = np.empty(ne)
    k1 = 0
    tparent = np.arange(nt)
    for idx in range(ne - 1, -1, -1):
        e = e_order[idx]
        ev = max(vals[edges[e, 0]], vals[edges[e, 1]])
        s = _find(tparent, edge_tris[e, 0])
        t = _find(tparent, edge_tris[e, 1])
        if s != t:
            # dual roots are the latest triangle of their component; the earlier one is paired
            if t_rank[s] > t_rank[t]:
                s, t = t, s
            b1[k1] = ev
            d1[k1] = tri_val[s]
            k1 += 1
            tparent[s] = t
        elif not negative[e]:
            b1[k1] = ev
            d1[k1] = np.inf
            k1 += 1
    return b0[:k0], d0[:k0], b1[:k1], d1[:k1]


def _ranks(order: np.ndarray) -> np.ndarray:
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank


def surface_diagrams(mesh: Mesh, values) -> tuple[PersistenceDiagram, PersistenceDiagram, PersistenceDiagram]:
    """Degree 0, 1, 2 diagrams of the lower-star filtration on a closed connected surface."""
    vals = _slice_array(values)
    if len(vals) != mesh.n_vertices:
        raise DomainError(f"slice has {len(vals)} values but the mesh has {mesh.n_vertices} vertices")
    edges, tris = mesh.edges, mesh.triangles
    e_val = np.maximum(vals[edges[:, 0]], vals[edges[:, 1]])
    t_val = np.maximum(np.maximum(vals[tris[:, 0]], vals[tris[:, 1]]), vals[tris[:, 2]])
    # edges and triangles are stored lexicographically, so a stable sort on value
    # reproduces the (value, dimension, vertex tuple) order within each dimension
    v_order = np.argsort(vals, kind="stable")
    e_order = np.argsort(e_val, kind="stable")
    t_order = np.argsort(t_val, kind="stable")
    b0, d0, b1, d1 = _surface_pairs(
        vals, edges, mesh.edge_triangles, t_val, e_order, _ranks(t_order), _ranks(v_order)
    )
    p0 = np.concatenate([np.stack([b0, d0], 1), [[vals[v_order[0]], INF]]])
    p1 = np.stack([b1, d1], 1)
    p2 = np.array([[t_val[t_order[-1]], INF]])
    p0 = p0[p0[:, 1] > p0[:, 0]]
    p1 = p1[p1[:, 1] > p1[:, 0]]
    return PersistenceDiagram(0, p0), PersistenceDiagram(1, p1), PersistenceDiagram(2, p2)


def diagrams(mesh: Mesh, values, route: str = "surface") -> list[PersistenceDiagram]:
    if route == "surface":
        return list(surface_diagrams(mesh, values))
    if route == "reduction":
        filt = build_lower_star(values, mesh)
        return [compute_diagram(filt, k) for k in (0, 1, 2)]
    raise ValueError(f"unknown route {route!r}")
