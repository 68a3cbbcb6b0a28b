import numpy as np
import pytest

from matchdist.geometry import LineParam, box_half_width
from matchdist.pareto import sphere_affine_epg
from matchdist.search import (
    _first_component_distance,
    box_nodes,
    boundary_behavior_check,
    db_at,
    lattice_params,
    matching_distance_candidates,
    matching_distance_grid,
    unit_nodes,
    verify_main_theorem,
)
from conftest import xz_sample


@pytest.fixture(scope="module")
def pair2(sphere2):
    return xz_sample(sphere2, name="f"), xz_sample(sphere2, 1.0, 0.3, 1.0, -0.2, name="g")


def test_identical_functions(sphere2):
    f = xz_sample(sphere2)
    r = matching_distance_grid(f, f, 5, 5)
    assert r.value == 0.0
    assert all(v == 0.0 for _, v in r.log)


def test_corner_zero(pair2):
    f, g = pair2
    C = box_half_width(f, g)
    assert db_at(f, g, LineParam(0.0, C)) == pytest.approx(0.0, abs=1e-12)
    assert db_at(f, g, LineParam(1.0, -C)) == pytest.approx(0.0, abs=1e-12)


def test_uniform_shift_on_diagonal(sphere2):
    eps = 0.125
    f = xz_sample(sphere2)
    g = xz_sample(sphere2, 1.0, eps, 1.0, eps)
    # at a = 1/2 the slice of g is the slice of f plus eps
    assert db_at(f, g, LineParam(0.5, 0.0)) == pytest.approx(eps, abs=1e-12)


def test_lattice_nesting():
    for n in (3, 11, 101):
        assert set(unit_nodes(n).tolist()) <= set(unit_nodes(2 * n - 1).tolist())
        assert set(box_nodes(n, 4.1).tolist()) <= set(box_nodes(2 * n - 1, 4.1).tolist())
    assert (0.5, 0.0) not in lattice_params(4, 4, 1.0)
    assert any(a == 0.5 for a, _ in lattice_params(4, 4, 1.0))


def test_refinement_is_monotone(pair2):
    f, g = pair2
    coarse = matching_distance_grid(f, g, 5, 5)
    fine = matching_distance_grid(f, g, 9, 9)
    assert fine.value >= coarse.value


def test_symmetry(pair2):
    f, g = pair2
    one = matching_distance_grid(f, g, 5, 5)
    two = matching_distance_grid(g, f, 5, 5)
    assert one.value == two.value
    assert [v for _, v in one.log] == [v for _, v in two.log]


def test_closed_form_below_box(pair2):
    f, g = pair2
    C = box_half_width(f, g)
    base = _first_component_distance(f, g)
    assert db_at(f, g, LineParam(0.25, -C - 1.0)) == pytest.approx(base, abs=1e-12)
    assert db_at(f, g, LineParam(0.75, -C - 1.0)) == pytest.approx(base / 3, abs=1e-12)


def test_workers_do_not_change_results(pair2):
    f, g = pair2
    one = matching_distance_grid(f, g, 5, 5, workers=1)
    two = matching_distance_grid(f, g, 5, 5, workers=2)
    assert one.to_dict(True) == two.to_dict(True)


def test_argmax_is_first_maximizer(sphere2):
    f = xz_sample(sphere2)
    r = matching_distance_grid(f, f, 3, 3)
    assert r.argmax == LineParam(0.0, -1.0)


def test_first_component_shift(sphere2):
    f = xz_sample(sphere2, name="f")
    g = xz_sample(sphere2, 1.0, 0.3, 1.0, 0.0, name="g")
    grids = sphere_affine_epg(owner="f"), sphere_affine_epg(1.0, 0.3, 1.0, 0.0, owner="g")
    cand = matching_distance_candidates(f, g, grids, b_res=41, special_res=32)
    grid = matching_distance_grid(f, g, 21, 21)
    assert cand.value >= grid.value - 1e-12
    # the shift is attained on the vertical line a = 0
    assert cand.value == pytest.approx(0.3, abs=1e-12)


def test_verify_identical_passes(sphere2):
    f = xz_sample(sphere2)
    grids = sphere_affine_epg(owner="f"), sphere_affine_epg(owner="g")
    rep = verify_main_theorem(f, f, res=5, grids=grids, special_res=16)
    assert rep.passed and rep.gap == 0.0
    assert rep.to_dict()["control"]["passed"]


def test_verify_shifted_pair(pair2):
    f, g = pair2
    grids = sphere_affine_epg(owner="f"), sphere_affine_epg(1.0, 0.3, 1.0, -0.2, owner="g")
    rep = verify_main_theorem(f, g, res=9, grids=grids, special_res=32)
    assert rep.passed
    assert rep.refinement_gap is not None and rep.tol == rep.refinement_gap


def test_boundary_behavior(pair2):
    f, g = pair2
    rep = boundary_behavior_check(f, g)
    assert rep.passed, rep.to_dict()
    assert len(rep.checks) == 8
