import numpy as np
import pytest

from genmatch.errors import MeshError
from genmatch.mesh import (TriMesh, geodesic_from, load_mesh, normalize_area,
                           save_ply)
from genmatch.shapes import icosphere

from conftest import TETRA_OBJ, flat_strip, tetrahedron


def test_obj_tetrahedron_counts(tmp_path):
    path = tmp_path / "tetra.obj"
    path.write_text(TETRA_OBJ)
    mesh = load_mesh(path)
    assert mesh.n_vertices == 4
    assert mesh.n_faces == 4
    assert len(mesh.edges) == 6  # V - E + F = 2 for a closed genus-0 surface


def test_off_quad_face_rejected(tmp_path):
    path = tmp_path / "quad.off"
    path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(MeshError, match="non-triangle"):
        load_mesh(path)


def test_generated_icosphere_element_counts():
    mesh = icosphere(3)
    assert mesh.n_vertices == 642
    assert mesh.n_faces == 1280
    assert len(mesh.edges) == 1920


def test_non_manifold_edge_rejected():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, -1, 0]],
                        dtype=float)
    faces = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
    with pytest.raises(MeshError, match="non-manifold"):
        TriMesh(vertices, faces)


def test_parse_failure(tmp_path):
    path = tmp_path / "broken.obj"
    path.write_text("v 0 0\nf 1 2 3\n")
    with pytest.raises(MeshError):
        load_mesh(path)


def test_unknown_extension(tmp_path):
    path = tmp_path / "mesh.stl"
    path.write_text("whatever")
    with pytest.raises(MeshError):
        load_mesh(path)


def test_normalize_area_unit_and_idempotent():
    mesh = normalize_area(icosphere(2))
    assert mesh.total_area == pytest.approx(1.0, abs=1e-12)
    again = normalize_area(mesh)
    assert np.max(np.abs(again.vertices - mesh.vertices)) < 1e-12


def test_normalize_area_zero_area_rejected():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    mesh = TriMesh(vertices, np.array([[0, 1, 2]]))
    with pytest.raises(MeshError):
        normalize_area(mesh)


def test_geodesic_source_distance_zero(sphere2_unit):
    field = geodesic_from(sphere2_unit, 7)
    assert field.distances[7] == 0.0


def test_geodesic_straight_boundary_path():
    # bottom boundary of the strip is three collinear unit edges; the shortest
    # path between its endpoints runs straight along them
    strip = flat_strip(columns=4, height=2.0)
    field = geodesic_from(strip, 0)
    assert field.distances[3] == pytest.approx(3.0, abs=1e-9)


def test_geodesic_antipodal_near_great_circle():
    mesh = icosphere(2, radius=1.0)
    antipode = int(np.argmin(mesh.vertices @ mesh.vertices[0]))
    d = geodesic_from(mesh, 0).distances[antipode]
    assert np.pi * 0.9 <= d <= np.pi * 1.05


def test_geodesic_symmetry(sphere2_unit):
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, sphere2_unit.n_vertices, size=(10, 2))
    for a, b in pairs:
        d_ab = geodesic_from(sphere2_unit, int(a)).distances[b]
        d_ba = geodesic_from(sphere2_unit, int(b)).distances[a]
        assert abs(d_ab - d_ba) < 1e-9


def test_geodesic_disconnected_rejected():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                         [5, 5, 5], [6, 5, 5], [5, 6, 5]], dtype=float)
    faces = np.array([[0, 1, 2], [3, 4, 5]])
    mesh = TriMesh(vertices, faces)
    with pytest.raises(MeshError, match="disconnected"):
        geodesic_from(mesh, 0)


def test_shortcut_paths_never_longer_than_edge_paths():
    # the geodesic graph augments mesh edges with unfolded one-ring shortcuts,
    # so distances can only shrink relative to pure edge paths
    import scipy.sparse as sp
    from scipy.sparse import csgraph
    mesh = icosphere(2)
    n = mesh.n_vertices
    rows = [a for a, b in mesh.edges] + [b for a, b in mesh.edges]
    cols = [b for a, b in mesh.edges] + [a for a, b in mesh.edges]
    w = [np.linalg.norm(mesh.vertices[a] - mesh.vertices[b])
         for a, b in mesh.edges] * 2
    edge_graph = sp.csr_matrix((w, (rows, cols)), shape=(n, n))
    d_edges = csgraph.dijkstra(edge_graph, directed=False, indices=0)
    d_full = geodesic_from(mesh, 0).distances
    assert np.all(d_full <= d_edges + 1e-12)


def test_ply_roundtrip(tmp_path):
    mesh = tetrahedron()
    path = tmp_path / "tetra.ply"
    save_ply(path, mesh.vertices, mesh.faces)
    back = load_mesh(path)
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)


def test_ply_roundtrip_with_colors(tmp_path):
    mesh = tetrahedron()
    colors = np.array([[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]],
                      dtype=np.uint8)
    path = tmp_path / "colored.ply"
    save_ply(path, mesh.vertices, mesh.faces, colors=colors)
    back = load_mesh(path)
    assert back.n_vertices == 4 and back.n_faces == 4


def test_vertices_immutable():
    mesh = tetrahedron()
    with pytest.raises((ValueError, RuntimeError)):
        mesh.vertices[0, 0] = 99.0
