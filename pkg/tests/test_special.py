import math

import numpy as np
import pytest

from matchdist.geometry import LineParam
from matchdist.pareto import ContourError, merge, sphere_affine_epg
from matchdist.special import find_special_values, is_special, nearest_special, witness_at, zoom_special_values


def test_sample_pair_point_06_0(fig3_grids):
    s = is_special(LineParam(0.6, 0.0), merge(*fig3_grids), 1e-9)
    assert s is not None
    assert s.condition == "ordinate"
    assert s.residual <= 1e-12


def test_sample_pair_point_0491_0451(fig3_grids):
    s = is_special(LineParam(0.491, 0.451), merge(*fig3_grids), 5e-7 + 1e-9)
    assert s is not None and s.residual <= 5e-7
    assert s.condition == "abscissa"


def test_f_equals_g_is_degenerate():
    F, G = sphere_affine_epg(owner="f"), sphere_affine_epg(owner="g")
    s = is_special(LineParam(0.5, 0.0), merge(F, G), 1e-12)
    assert s is not None and s.residual == 0.0 and s.degenerate


def test_empty_contours():
    assert find_special_values([], (0, 1), (-1, 1), 16) == []


def test_duplicate_ids_rejected():
    F = sphere_affine_epg()
    with pytest.raises(ContourError):
        find_special_values(merge(F, F), (0, 1), (-1, 1), 8)


def test_f_equals_g_flood_and_filter():
    F, G = sphere_affine_epg(owner="f"), sphere_affine_epg(owner="g")
    every = find_special_values(merge(F, G), (0, 1), (-1, 1), 8)
    kept = find_special_values(merge(F, G), (0, 1), (-1, 1), 8, exclude_degenerate=True)
    degenerate = [s for s in every if s.degenerate]
    # duplicated contours cover the whole sampled region
    cells = {(round(s.a * 8), round((s.b + 1) * 4)) for s in degenerate}
    assert len(cells) >= 7 * 9 * 0.9
    assert all(not s.degenerate for s in kept)
    assert len(kept) == len(every) - len(degenerate)


@pytest.fixture(scope="module")
def coarse(fig3_grids):
    return find_special_values(merge(*fig3_grids), (0, 1), (-4.1, 4.1), 64, 1e-6)


def test_witnesses_reproduce_residual(coarse, fig3_grids):
    C = merge(*fig3_grids)
    rng = np.random.default_rng(0)
    for k in rng.choice(len(coarse), 200, replace=False):
        s = coarse[k]
        w = witness_at(s.param, C, s.pairs, s.c1, s.c2)
        assert abs(w.residual - s.residual) <= 1e-12
        assert s.residual <= 1e-6
        assert {*s.pairs[0]} != {*s.pairs[1]}


def test_sorted_and_within_box(coarse):
    keys = [(s.a, s.b, s.ids(), s.c1, s.c2) for s in coarse]
    assert keys == sorted(keys)
    assert all(0 < s.a < 1 and abs(s.b) <= 4.1 for s in coarse)


def test_coarse_lattice_finds_06_0(coarse):
    s = nearest_special(coarse, (0.6, 0.0))
    assert math.hypot(s.a - 0.6, s.b) <= 1e-3


def test_zoom_reaches_second_point(coarse, fig3_grids):
    s0 = nearest_special(coarse, (0.491, 0.451))
    z = zoom_special_values(merge(*fig3_grids), s0.param, (1 / 64, 8.2 / 64), 64, 1e-9)
    s = nearest_special(z, (0.491, 0.451))
    assert math.hypot(s.a - 0.491, s.b - 0.451) <= 1e-3
    assert s.residual <= 1e-6


def test_symmetry_under_swap(fig3_grids):
    F, G = fig3_grids
    one = find_special_values(merge(F, G), (0, 1), (-4.1, 4.1), 24)
    two = find_special_values(merge(G, F), (0, 1), (-4.1, 4.1), 24)

    def key(s):
        return (s.a, s.b, frozenset([frozenset(s.pairs[0]), frozenset(s.pairs[1])]), s.c1 == s.c2)

    assert {(s.a, s.b) for s in one} == {(s.a, s.b) for s in two}


def test_closedness_along_refinement(fig3_grids):
    # values found at finer tolerances converge to a point that is itself special
    C = merge(*fig3_grids)
    pts = []
    for tol in (1e-4, 1e-7, 1e-10):
        z = find_special_values(C, (0.59, 0.61), (-0.01, 0.01), 16, tol)
        pts.append(nearest_special(z, (0.6, 0.0)))
    last = pts[-1]
    assert is_special(last.param, C, 1e-9) is not None
