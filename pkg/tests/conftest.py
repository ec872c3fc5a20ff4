import numpy as np
import pytest

from genmatch import spectral
from genmatch.config import RunConfig
from genmatch.mesh import TriMesh, normalize_area
from genmatch.pipeline import build_context
from genmatch.shapes import bumpy_sphere, icosphere


TETRA_OBJ = """\
# regular-ish tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
f 1 3 2
f 1 2 4
f 1 4 3
f 2 3 4
"""


def tetrahedron():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    faces = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return TriMesh(vertices, faces)


def flat_strip(columns=4, height=2.0):
    """A planar triangle strip whose bottom boundary is a straight polyline of
    unit edges. Useful for exact-path geodesic checks."""
    bottom = [(float(i), 0.0, 0.0) for i in range(columns)]
    top = [(float(i), height, 0.0) for i in range(columns)]
    vertices = np.array(bottom + top)
    faces = []
    for i in range(columns - 1):
        a, b = i, i + 1
        c, d = columns + i, columns + i + 1
        faces.append([a, b, d])
        faces.append([a, d, c])
    return TriMesh(vertices, np.array(faces))


@pytest.fixture(scope="session")
def sphere3():
    """Radius-1 icosphere with 642 vertices."""
    return icosphere(3)


@pytest.fixture(scope="session")
def sphere3_unit(sphere3):
    return normalize_area(sphere3)


@pytest.fixture(scope="session")
def sphere3_basis(sphere3_unit):
    return spectral.eigenbasis(sphere3_unit, 60)


@pytest.fixture(scope="session")
def sphere2_unit():
    return normalize_area(icosphere(2))


@pytest.fixture(scope="session")
def sphere2_basis(sphere2_unit):
    return spectral.eigenbasis(sphere2_unit, 60)


@pytest.fixture(scope="session")
def tiny_ctx():
    """Self-match context on a small asymmetric closed surface (42 vertices);
    fast enough for operator property tests that evaluate fitness."""
    cfg = RunConfig(population=40)
    return build_context(bumpy_sphere(1), bumpy_sphere(1), cfg)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def self_ctx():
    """Self-match context on the 162-vertex fixture used by the end-to-end
    benchmarks."""
    cfg = RunConfig(population=120, max_generations=150)
    return build_context(bumpy_sphere(2), bumpy_sphere(2), cfg), cfg
