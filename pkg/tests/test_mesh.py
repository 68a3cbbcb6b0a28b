import numpy as np
import pytest

from matchdist.mesh import Mesh, MeshError, icosahedron, icosphere, read_off, torus, write_off


def test_icosahedron_counts(ico):
    assert (ico.n_vertices, ico.n_edges, ico.n_triangles) == (12, 30, 20)
    assert ico.euler_characteristic() == 2


def test_icosahedron_off_roundtrip(tmp_path, ico):
    path = tmp_path / "ico.off"
    write_off(ico, path)
    m = read_off(path)
    assert (m.n_vertices, m.n_edges, m.n_triangles) == (12, 30, 20)
    np.testing.assert_array_equal(m.triangles, ico.triangles)


def test_single_triangle_is_open(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(MeshError, match="open-boundary"):
        read_off(path)


@pytest.mark.parametrize("level", [0, 1, 2, 3, 4])
def test_icosphere_vertex_count(level):
    m = icosphere(level)
    assert m.n_vertices == 10 * 4**level + 2
    assert m.euler_characteristic() == 2
    np.testing.assert_allclose(np.linalg.norm(m.vertices, axis=1), 1.0, atol=1e-12)


def test_torus_is_closed_genus_one():
    t = torus(8, 6)
    assert t.euler_characteristic() == 0
    assert t.n_components() == 1


def test_non_manifold_edge_rejected():
    # three triangles on one edge
    V = np.eye(3).tolist() + [[0, 0, 0], [1, 1, 1]]
    T = [[0, 1, 2], [0, 1, 3], [0, 1, 4]]
    with pytest.raises(MeshError):
        Mesh.from_arrays(V, T)


def test_bad_off_header(tmp_path):
    path = tmp_path / "x.off"
    path.write_text("PLY\n")
    with pytest.raises(MeshError):
        read_off(path)


def test_two_spheres_fail_component_count(tmp_path):
    a = icosahedron()
    V = np.vstack([a.vertices, a.vertices + 5])
    T = np.vstack([a.triangles, a.triangles + 12])
    with pytest.raises(MeshError, match="component"):
        Mesh.from_arrays(V, T)
