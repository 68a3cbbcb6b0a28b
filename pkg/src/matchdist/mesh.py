"""Closed triangle meshes: OFF reading/writing, validation and a few generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Raised for unparsable files and meshes that are not closed 2-manifolds."""


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (n, 3) float
    triangles: np.ndarray  # (m, 3) int, each row sorted ascending
    name: str = field(default="mesh")

    @classmethod
    def from_arrays(cls, vertices, triangles, name="mesh", validate=True) -> "Mesh":
        verts = np.ascontiguousarray(vertices, dtype=np.float64)
        tris = np.asarray(triangles, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise MeshError(f"vertices must have shape (n, 3), got {verts.shape}")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshError(f"triangles must have shape (m, 3), got {tris.shape}")
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise MeshError("triangle references a vertex index out of range")
        tris = np.sort(tris, axis=1)
        if np.any(tris[:, 0] == tris[:, 1]) or np.any(tris[:, 1] == tris[:, 2]):
            raise MeshError("degenerate triangle with a repeated vertex")
        # lexicographic order of the triangle list; the filtration relies on it
        tris = tris[np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0]))]
        mesh = cls(verts, np.ascontiguousarray(tris), name)
        if validate:
            mesh.validate()
        return mesh

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _edge_tables(self):
        tris = self.triangles
        # the three edges of each triangle, as (lo, hi) pairs
        cand = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
        edges, inverse = np.unique(cand, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        m = len(tris)
        tri_edges = np.stack([inverse[:m], inverse[m : 2 * m], inverse[2 * m :]], axis=1)
        counts = np.bincount(inverse, minlength=len(edges))
        return np.ascontiguousarray(edges), np.ascontiguousarray(tri_edges), counts

    @property
    def edges(self) -> np.ndarray:
        """Unique edges as sorted (lo, hi) pairs in lexicographic order."""
        return self._edge_tables[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """Edge indices (01, 02, 12) of every triangle."""
        return self._edge_tables[1]

    @cached_property
    def edge_triangles(self) -> np.ndarray:
        """The two triangles incident to each edge (closed meshes only)."""
        _, tri_edges, counts = self._edge_tables
        if np.any(counts != 2):
            raise MeshError("edge_triangles requires every edge to have two cofaces")
        flat = tri_edges.reshape(-1)
        owner = np.repeat(np.arange(len(self.triangles)), 3)
        order = np.argsort(flat, kind="stable")
        return np.ascontiguousarray(owner[order].reshape(-1, 2))

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.triangles)

    def n_components(self) -> int:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        e = self.edges
        n = self.n_vertices
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return int(connected_components(adj, directed=False)[0])

    def validate(self, components: int | None = 1) -> None:
        """Require a closed 2-manifold: two cofaces per edge, no isolated vertices."""
        _, _, counts = self._edge_tables
        if len(self.triangles) == 0:
            raise MeshError("mesh has no triangles")
        bad = np.flatnonzero(counts != 2)
        if len(bad):
            e = self.edges[bad[0]]
            kind = "open-boundary" if counts[bad[0]] < 2 else "non-manifold"
            raise MeshError(
                f"{kind} edge ({e[0]}, {e[1]}) has {counts[bad[0]]} incident triangles; "
                f"{len(bad)} such edges in total"
            )
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.reshape(-1)] = True
        if not used.all():
            raise MeshError(f"{int((~used).sum())} vertices are not used by any triangle")
        if components is not None and self.n_components() != components:
            raise MeshError(
                f"mesh has {self.n_components()} connected components, expected {components}"
            )


def _tokens(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield from line.split()


def read_off(path, validate=True) -> Mesh:
    """Parse an ASCII OFF file. Polygons with more than three corners are fanned."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MeshError(f"cannot read {path}: {exc}") from exc
    tok = _tokens(text)
    try:
        head = next(tok)
        if head.upper() != "OFF":
            raise MeshError(f"{path}: missing OFF header")
        nv, nf = int(next(tok)), int(next(tok))
        next(tok)  # edge count, unused
        verts = np.array([[float(next(tok)) for _ in range(3)] for _ in range(nv)])
        tris = []
        for _ in range(nf):
            k = int(next(tok))
            poly = [int(next(tok)) for _ in range(k)]
            if k < 3:
                raise MeshError(f"{path}: face with {k} corners")
            tris.extend((poly[0], poly[i], poly[i + 1]) for i in range(1, k - 1))
    except StopIteration:
        raise MeshError(f"{path}: unexpected end of file") from None
    except ValueError as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: {exc}") from exc
    return Mesh.from_arrays(verts.reshape(-1, 3), np.array(tris).reshape(-1, 3), path.stem, validate)


def write_off(mesh: Mesh, path) -> None:
    lines = ["OFF", f"{mesh.n_vertices} {len(mesh.triangles)} {len(mesh.edges)}"]
    lines += [" ".join(repr(float(c)) for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in t) for t in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def icosahedron() -> Mesh:
    phi = (1.0 + 5.0**0.5) / 2.0
    v = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return Mesh.from_arrays(v, f, "icosahedron")


def icosphere(level: int) -> Mesh:
    """Unit sphere by ``level`` rounds of 1-to-4 subdivision; 10*4**level + 2 vertices."""
    if level < 0:
        raise ValueError("level must be non-negative")
    base = icosahedron()
    verts = [tuple(p) for p in base.vertices]
    tris = [tuple(t) for t in base.triangles]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            idx = cache.get(key)
            if idx is None:
                p = np.add(verts[i], verts[j])
                p = p / np.linalg.norm(p)
                idx = cache[key] = len(verts)
                verts.append(tuple(p))
            return idx

        new = []
        for a, b, c in tris:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = new
    return Mesh.from_arrays(np.array(verts), np.array(tris), f"icosphere{level}")


def torus(n_major: int = 12, n_minor: int = 8, R: float = 2.0, r: float = 1.0) -> Mesh:
    """Standard torus around the z-axis, as an n_major x n_minor quad grid split into triangles."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    U, V = np.meshgrid(u, v, indexing="ij")
    verts = np.stack(
        [(R + r * np.cos(V)) * np.cos(U), (R + r * np.cos(V)) * np.sin(U), r * np.sin(V)], axis=-1
    ).reshape(-1, 3)

    def idx(i, j):
        return (i % n_major) * n_minor + (j % n_minor)

    tris = []
    for i in range(n_major):
        for j in range(n_minor):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    return Mesh.from_arrays(verts, np.array(tris), f"torus{n_major}x{n_minor}")
