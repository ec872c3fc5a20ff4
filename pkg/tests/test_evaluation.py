import numpy as np
import pytest

from genmatch.errors import GenmatchError
from genmatch.evaluation import (chromosome_distance, distance_matrix,
                                 error_curve, geodesic_errors, matrix_to_csv)
from genmatch.fmap import VertexMap
from genmatch.genetic import EMPTY


def test_chromosome_distance_case_table():
    d = np.array([[0.0, 2.0], [2.0, 0.0]])
    diameter = 2.0
    # equal genes contribute nothing
    assert chromosome_distance((0, 1), (0, 1), d, diameter) == 0.0
    # exactly one side empty costs 1
    assert chromosome_distance((0, EMPTY), (0, 1), d, diameter) == 1.0
    assert chromosome_distance((EMPTY, 1), (0, 1), d, diameter) == 1.0
    # both empty at the same slot are equal genes
    assert chromosome_distance((EMPTY,), (EMPTY,), d, diameter) == 0.0
    # two different targets cost their normalized geodesic distance
    assert chromosome_distance((0,), (1,), d, diameter) == pytest.approx(1.0)
    assert chromosome_distance((0,), (1,), d, 4.0) == pytest.approx(0.5)
    # contributions add up over genes
    assert chromosome_distance((0, EMPTY), (1, 0), d, diameter) == pytest.approx(2.0)


def test_chromosome_distance_length_mismatch():
    with pytest.raises(GenmatchError):
        chromosome_distance((0,), (0, 1), np.zeros((2, 2)), 1.0)


def test_distance_matrix_metric_axioms():
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((6, 2))
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    chromosomes = [tuple(rng.integers(-1, 6, size=8)) for _ in range(5)]
    out = distance_matrix(chromosomes, d)
    assert np.array_equal(out, out.T)
    assert np.all(np.diag(out) == 0.0)
    assert np.all(out >= 0.0)


def test_matrix_to_csv_roundtrip():
    m = np.array([[0.0, 1.5], [1.5, 0.0]])
    text = matrix_to_csv(m)
    rows = [[float(x) for x in line.split(",")]
            for line in text.strip().splitlines()]
    assert np.array_equal(np.array(rows), m)


def test_perfect_map_perfect_curve(sphere2_unit):
    n = sphere2_unit.n_vertices
    vmap = VertexMap(np.arange(n), (1, 2))
    gt = [(v, v) for v in range(0, n, 5)]
    errors = geodesic_errors(vmap, sphere2_unit, gt)
    curve = error_curve(errors)
    assert np.all(errors == 0.0)
    assert curve.fractions[0] == 1.0
    assert np.all(curve.fractions == 1.0)


def test_symmetric_ground_truth_takes_smaller_error(sphere2_unit):
    n = sphere2_unit.n_vertices
    # computed map equals the mirror correspondence exactly
    mirror = np.empty(n, dtype=np.int64)
    coords = np.asarray(sphere2_unit.vertices)
    flipped = coords * np.array([1.0, 1.0, -1.0])
    for v in range(n):
        mirror[v] = np.argmin(np.linalg.norm(coords - flipped[v], axis=1))
    vmap = VertexMap(mirror, (1, 2))
    gt = [(v, v) for v in range(0, n, 7)]
    sym_gt = [(v, int(mirror[v])) for v in range(0, n, 7)]
    errors = geodesic_errors(vmap, sphere2_unit, gt, symmetric_gt=sym_gt)
    assert np.all(errors == 0.0)


def test_random_map_dominated_by_true_map(sphere2_unit):
    n = sphere2_unit.n_vertices
    gt = [(v, v) for v in range(n)]
    true_curve = error_curve(
        geodesic_errors(VertexMap(np.arange(n), (1, 2)), sphere2_unit, gt))
    rng = np.random.default_rng(3)
    random_curve = error_curve(
        geodesic_errors(VertexMap(rng.integers(0, n, size=n), (1, 2)),
                        sphere2_unit, gt))
    assert np.all(true_curve.fractions >= random_curve.fractions)
    assert random_curve.fractions[0] < 1.0


def test_invalid_ground_truth_rejected(sphere2_unit):
    n = sphere2_unit.n_vertices
    vmap = VertexMap(np.arange(n), (1, 2))
    with pytest.raises(GenmatchError):
        geodesic_errors(vmap, sphere2_unit, [(0, n + 5)])
    with pytest.raises(GenmatchError):
        geodesic_errors(vmap, sphere2_unit, [(-1, 0)])


def test_missing_symmetric_entry_rejected(sphere2_unit):
    n = sphere2_unit.n_vertices
    vmap = VertexMap(np.arange(n), (1, 2))
    with pytest.raises(GenmatchError):
        geodesic_errors(vmap, sphere2_unit, [(0, 0), (1, 1)],
                        symmetric_gt=[(0, 0)])


def test_error_curve_csv():
    curve = error_curve(np.array([0.0, 0.2, 0.4]))
    lines = curve.to_csv().strip().splitlines()
    assert lines[0].lower().startswith("threshold")
    assert len(lines) == 101
