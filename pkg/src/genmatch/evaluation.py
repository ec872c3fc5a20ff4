"""Correspondence evaluation: cumulative geodesic-error curves and the
pairwise chromosome distance used for population-diversity diagnostics."""

from __future__ import annotations

import numpy as np

from .errors import GenmatchError
from .genetic import EMPTY

CURVE_SAMPLES = 100
CURVE_MAX_THRESHOLD = 0.5


class ErrorCurve:
    """Fraction of correspondences with geodesic error below each threshold."""

    def __init__(self, thresholds, fractions):
        self.thresholds = np.asarray(thresholds, dtype=np.float64)
        self.fractions = np.asarray(fractions, dtype=np.float64)

    def to_csv(self):
        lines = ["threshold,fraction"]
        for t, f in zip(self.thresholds, self.fractions):
            lines.append(f"{float(t)!r},{float(f)!r}")
        return "\n".join(lines) + "\n"


def geodesic_errors(vmap, mesh_2, ground_truth, symmetric_gt=None):
    """Per ground-truth pair, the geodesic distance on M_2 between the
    computed image and the ground-truth image; with a symmetric ground truth,
    the smaller of the two errors."""
    n2 = mesh_2.n_vertices
    assignment = vmap.assignment

    def check(pairs):
        for s, t in pairs:
            if not (0 <= s < len(assignment) and 0 <= t < n2):
                raise GenmatchError(f"ground truth references invalid vertex ({s}, {t})")

    check(ground_truth)
    dmat = mesh_2.geodesic_matrix()
    src = np.array([s for s, _ in ground_truth], dtype=np.int64)
    tgt = np.array([t for _, t in ground_truth], dtype=np.int64)
    errors = dmat[assignment[src], tgt]
    if symmetric_gt is not None:
        check(symmetric_gt)
        sym = {s: t for s, t in symmetric_gt}
        missing = [s for s in src if int(s) not in sym]
        if missing:
            raise GenmatchError(
                f"symmetric ground truth misses source vertex {missing[0]}")
        tgt_sym = np.array([sym[int(s)] for s in src], dtype=np.int64)
        errors = np.minimum(errors, dmat[assignment[src], tgt_sym])
    return errors


def error_curve(errors, n_samples=CURVE_SAMPLES, max_threshold=CURVE_MAX_THRESHOLD):
    errors = np.asarray(errors, dtype=np.float64)
    thresholds = np.linspace(0.0, max_threshold, n_samples)
    fractions = (errors[None, :] <= thresholds[:, None]).mean(axis=1)
    return ErrorCurve(thresholds, fractions)


def chromosome_distance(c_1, c_2, landmark_geodesics_2, diameter_2):
    """Per-gene distance summed over the gene array: 0 when equal, 1 when
    exactly one side is empty, else the geodesic distance between the two
    target landmarks on M_2 normalized by the shape diameter (taken as the
    maximal pairwise landmark geodesic distance)."""
    if len(c_1) != len(c_2):
        raise GenmatchError("chromosomes have different lengths")
    total = 0.0
    for a, b in zip(c_1, c_2):
        if a == b:
            continue
        if a == EMPTY or b == EMPTY:
            total += 1.0
        else:
            total += landmark_geodesics_2[a, b] / diameter_2
    return total


def distance_matrix(chromosomes, landmark_geodesics_2):
    """Symmetric pairwise chromosome-distance matrix for one generation."""
    diameter = float(landmark_geodesics_2.max())
    if diameter <= 0:
        diameter = 1.0
    n = len(chromosomes)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = chromosome_distance(chromosomes[i], chromosomes[j],
                                    landmark_geodesics_2, diameter)
            out[i, j] = out[j, i] = d
    return out


def matrix_to_csv(matrix):
    return "\n".join(",".join(repr(float(x)) for x in row) for row in matrix) + "\n"
