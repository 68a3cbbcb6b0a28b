import itertools
import json
import math

import jsonschema
import numpy as np
import pytest
from importlib import resources

from matchdist.geometry import DomainError, LineParam, normalized_slice
from matchdist.mesh import Mesh, icosphere, torus
from matchdist.persistence import (
    PersistenceDiagram,
    build_lower_star,
    compute_diagram,
    diagrams,
    diagrams_from_json,
    diagrams_to_csv,
    diagrams_to_json,
    surface_diagrams,
)
from conftest import xz_sample


def triangle_mesh():
    return Mesh.from_arrays([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]], validate=False)


def test_single_triangle_order():
    filt = build_lower_star(np.array([0.0, 1.0, 2.0]), triangle_mesh())
    assert filt.simplices == ((0,), (1,), (0, 1), (2,), (0, 2), (1, 2), (0, 1, 2))
    np.testing.assert_array_equal(filt.values, [0, 1, 1, 2, 2, 2, 2])
    filt.validate()


def test_constant_slice_order_and_diagram(ico):
    filt = build_lower_star(np.full(12, 0.25), ico)
    assert len(filt.simplices) == 12 + 30 + 20
    dims = [len(s) for s in filt.simplices]
    assert dims == sorted(dims)
    d0, d1, d2 = (compute_diagram(filt, k) for k in (0, 1, 2))
    np.testing.assert_array_equal(d0.points, [[0.25, math.inf]])
    assert len(d1) == 0
    np.testing.assert_array_equal(d2.points, [[0.25, math.inf]])


def test_faces_precede_cofaces(ico):
    f = xz_sample(ico)
    build_lower_star(normalized_slice(f, LineParam(0.5, 0.0)), ico).validate()


def test_height_function_on_sphere():
    m = icosphere(3)
    d0, d1, d2 = surface_diagrams(m, m.vertices[:, 0])
    np.testing.assert_allclose(d0.points, [[-1.0, math.inf]])
    assert len(d1) == 0
    np.testing.assert_allclose(d2.points, [[1.0, math.inf]])


def test_torus_height_has_two_degree_one_points():
    t = torus(12, 8)
    # tilt the height slightly so that no two vertices tie
    h = t.vertices[:, 0] + 1e-3 * t.vertices[:, 1]
    for route in ("surface", "reduction"):
        d0, d1, d2 = diagrams(t, h, route)
        assert len(d1.essential) == 2
        assert len(d0.essential) == 1 and len(d2.essential) == 1


def test_mismatched_slice():
    with pytest.raises(DomainError):
        build_lower_star(np.zeros(5), icosphere(0))
    with pytest.raises(DomainError):
        surface_diagrams(icosphere(0), np.zeros(5))


def test_bad_degree(ico):
    with pytest.raises(DomainError):
        compute_diagram(build_lower_star(np.zeros(12), ico), 3)


def _homology_ranks(simplices, upto):
    """Betti numbers over Z/2 of the subcomplex simplices[:upto], by Gaussian elimination."""
    sub = simplices[:upto]
    index = {s: i for i, s in enumerate(sub)}

    def rank(k):
        rows = [s for s in sub if len(s) == k + 1]
        if k == 0 or not rows:
            return 0
        cols = []
        for s in rows:
            v = 0
            for i in range(len(s)):
                v |= 1 << index[s[:i] + s[i + 1 :]]
            cols.append(v)
        r = 0
        pivots = {}
        for v in cols:
            while v:
                h = v.bit_length() - 1
                if h in pivots:
                    v ^= pivots[h]
                else:
                    pivots[h] = v
                    r += 1
                    break
        return r

    counts = [sum(len(s) == k + 1 for s in sub) for k in range(3)]
    ranks = [rank(k) for k in range(4)]
    return [counts[k] - ranks[k] - ranks[k + 1] for k in range(3)]


def test_reduction_matches_rank_oracle(ico):
    # Betti numbers of every prefix of the filtration equal the number of
    # pairs alive at that prefix
    rng = np.random.default_rng(7)
    vals = rng.random(12)
    filt = build_lower_star(vals, ico)
    n = len(filt.simplices)
    dims = filt.dims
    for upto in range(1, n + 1, 3):
        alive = [0, 0, 0]
        for i, j in filt.pairs:
            if i < upto and (j < 0 or j >= upto):
                alive[dims[i]] += 1
        assert alive == _homology_ranks(filt.simplices, upto)


@pytest.mark.parametrize("seed", range(5))
def test_routes_agree(sphere2, seed):
    rng = np.random.default_rng(seed)
    # coarse values force many ties
    vals = rng.integers(0, 5, sphere2.n_vertices) / 4.0
    assert diagrams(sphere2, vals, "surface") == diagrams(sphere2, vals, "reduction")


def test_tie_order_independence(ico):
    # relabelling vertices changes the tie-break order but not the multiset
    rng = np.random.default_rng(3)
    vals = rng.integers(0, 3, 12).astype(float)
    perm = rng.permutation(12)
    inv = np.argsort(perm)
    relabelled = Mesh.from_arrays(ico.vertices[perm], inv[ico.triangles])
    assert diagrams(ico, vals, "reduction") == diagrams(relabelled, vals[perm], "reduction")
    assert diagrams(ico, vals) == diagrams(relabelled, vals[perm])


def test_stability_random_perturbations(sphere2):
    from matchdist.bottleneck import bottleneck_distance

    rng = np.random.default_rng(11)
    f = xz_sample(sphere2)
    for _ in range(20):
        x = normalized_slice(f, LineParam(rng.random(), rng.uniform(-1, 1))).values
        y = x + rng.uniform(-0.1, 0.1, len(x))
        lhs = max(bottleneck_distance(D, E)[0] for D, E in zip(surface_diagrams(sphere2, x), surface_diagrams(sphere2, y)))
        assert lhs <= np.max(np.abs(x - y)) + 1e-12


def test_diagram_validation_and_order():
    with pytest.raises(ValueError):
        PersistenceDiagram(0, [[1.0, 0.0]])
    with pytest.raises(ValueError):
        PersistenceDiagram(0, [[math.inf, math.inf]])
    a = PersistenceDiagram(1, [[2.0, 3.0], [0.0, math.inf]])
    b = PersistenceDiagram(1, [[0.0, math.inf], [2.0, 3.0]])
    assert a == b
    assert a.essential.tolist() == [0.0]


def test_json_roundtrip_and_schema(sphere2):
    dg = surface_diagrams(sphere2, xz_sample(sphere2).f1 + 0.01 * sphere2.vertices[:, 1])
    text = diagrams_to_json(dg)
    schema = json.loads(resources.files("matchdist").joinpath("schemas/diagrams.schema.json").read_text())
    jsonschema.validate(json.loads(text), schema)
    back = diagrams_from_json(text)
    assert [d for d in dg if len(d)] == back
    csv_text = diagrams_to_csv(dg)
    assert csv_text.splitlines()[0] == "degree,birth,death"
    assert "inf" in csv_text
