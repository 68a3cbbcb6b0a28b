import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchdist.geometry import (
    BiFunctionSample,
    DomainError,
    LineParam,
    box_half_width,
    line_points,
    lipschitz_bound_check,
    normalized_slice,
    slice_values,
    uniform_norm,
)
from matchdist.mesh import icosahedron
from conftest import xz_sample


def test_line_points():
    assert line_points(LineParam(0.5, 0.0), 2.0) == (1.0, 1.0)
    assert line_points(LineParam(0.0, 3.0), 5.0) == (3.0, 2.0)
    x, y = line_points(LineParam(0.6, 0.0), 1.0)
    assert x == pytest.approx(0.6) and y == pytest.approx(0.4)


@pytest.mark.parametrize("a,b", [(-0.1, 0.0), (1.5, 0.0), (0.5, float("inf")), (0.5, float("nan"))])
def test_line_param_domain(a, b):
    with pytest.raises(DomainError):
        LineParam(a, b)


def one_vertex(f1, f2):
    return np.array([f1]), np.array([f2])


def test_slice_examples():
    assert slice_values(*one_vertex(0.3, 0.7), 0.5, 0.0)[0] == 0.7
    assert slice_values(*one_vertex(0.5, 123.0), 0.0, 0.2)[0] == pytest.approx(0.3)
    assert slice_values(*one_vertex(-7.0, -0.5), 1.0, 0.1)[0] == 0.0


def test_norms(sphere3):
    f = xz_sample(sphere3)
    g = xz_sample(sphere3, 2.1, 2.0, 0.6, 1.8)
    assert uniform_norm(f) == pytest.approx(1.0)
    assert uniform_norm(g) == pytest.approx(4.1)
    assert box_half_width(f, g) == pytest.approx(4.1)
    zero = BiFunctionSample(sphere3, np.zeros((sphere3.n_vertices, 2)))
    assert uniform_norm(zero) == 0.0


def test_sample_shape_checked(ico):
    with pytest.raises(DomainError):
        BiFunctionSample(ico, np.zeros((3, 2)))
    with pytest.raises(DomainError):
        BiFunctionSample(ico, np.full((12, 2), np.nan))


def test_half_identity_exact(sphere2):
    f = xz_sample(sphere2)
    for b in (-0.7, 0.0, 0.3):
        got = normalized_slice(f, LineParam(0.5, b)).values
        np.testing.assert_array_equal(got, np.maximum(f.f1 - b, f.f2 + b))


def test_limits_converge(sphere2):
    f = xz_sample(sphere2, 2.1, 2.0, 0.6, 1.8)
    b = 0.4
    errs = [np.max(np.abs(normalized_slice(f, LineParam(h, b)).values - np.maximum(f.f1 - b, 0))) for h in (1e-2, 1e-4, 1e-6)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 1e-5 * (uniform_norm(f) + b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**20), st.floats(-3, 3))
def test_swap_symmetry(k, b):
    f = xz_sample(icosahedron(), 2.1, 2.0, 0.6, 1.8)
    a = k / 2**20  # dyadic: 1 - (1 - a) == a
    x = normalized_slice(f, LineParam(a, b)).values
    y = normalized_slice(f.swapped(), LineParam(1.0 - a, -b)).values
    np.testing.assert_array_equal(x, y)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(-4.1, 4.1), st.floats(0, 1), st.floats(-4.1, 4.1))
def test_lipschitz_property(a, b, a2, b2):
    f = xz_sample(icosahedron(), 2.1, 2.0, 0.6, 1.8)
    assert lipschitz_bound_check(f, LineParam(a, b), LineParam(a2, b2), 4.1).passed


def test_lipschitz_examples(sphere2):
    f = xz_sample(sphere2)
    p = LineParam(0.3, 0.1)
    r = lipschitz_bound_check(f, p, p, 1.0)
    assert r.lhs == 0 and r.rhs == 0 and r.passed
    assert lipschitz_bound_check(f, LineParam(0.25, 0), LineParam(0.75, 0), 1.0).passed
    with pytest.raises(DomainError):
        lipschitz_bound_check(f, LineParam(0.3, 2.0), p, 1.0)
