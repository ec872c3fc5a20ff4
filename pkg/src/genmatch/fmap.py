"""Functional map solve, pointwise-map conversion, and one-cycle refinement.

Convention: C_ij is k_t x k_s and maps reduced coefficients of functions on
M_j (source-side basis, k_s columns) to M_i (target-side basis, k_t rows).
The induced dense operator is P(C_ij) = Phi_{i,t} C_ij Phi_{j,s}^dagger.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import distance

ALPHA_DEFAULT = 1.0
BETA_DEFAULT = 100.0


class FunctionalMap:
    """Reduced-basis map matrix with its direction tag (i, j)."""

    __slots__ = ("matrix", "direction")

    def __init__(self, matrix, direction):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.direction = tuple(direction)
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("functional map contains non-finite entries")

    @property
    def k_t(self):
        return self.matrix.shape[0]

    @property
    def k_s(self):
        return self.matrix.shape[1]


class VertexMap:
    """Per-vertex assignment into the other mesh, direction (i, j)."""

    __slots__ = ("assignment", "direction")

    def __init__(self, assignment, direction):
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.direction = tuple(direction)


def solve_fmap(match, basis_i, basis_j, k_s, k_t, alpha=ALPHA_DEFAULT,
               beta=BETA_DEFAULT, direction=(1, 2)):
    """Minimize alpha ||D_i C - C D_j||_F^2 + beta sum ||Phi_i[p] C - Phi_j[q]||^2
    over C (k_t x k_s), for landmark pairs (p, q) with p on M_i, q on M_j.

    The Laplacian-commutativity term is diagonal in the entries of C, so the
    problem decouples into one ridge-regularized least squares per column.
    """
    pairs = list(match)
    if not pairs:
        raise ValueError("match must contain at least one landmark pair")
    rows_i = np.array([p for p, _ in pairs], dtype=np.int64)
    rows_j = np.array([q for _, q in pairs], dtype=np.int64)
    a = basis_i.phi(k_t)[rows_i]            # (p, k_t)
    b = basis_j.phi(k_s)[rows_j]            # (p, k_s)
    lam_i = basis_i.evals(k_t)
    lam_j = basis_j.evals(k_s)

    ata = beta * (a.T @ a)                  # shared across columns
    atb = beta * (a.T @ b)
    c = np.empty((k_t, k_s))
    for col in range(k_s):
        diag = alpha * (lam_i - lam_j[col]) ** 2
        system = ata + np.diag(diag)
        cond = np.linalg.cond(system)
        if cond > 1e12:
            raise np.linalg.LinAlgError(
                f"ill-conditioned normal system (cond={cond:.3g}) in column {col}"
            )
        c[:, col] = np.linalg.solve(system, atb[:, col])
    return FunctionalMap(c, direction)


def map_coordinates(cmap, basis_i, basis_j, coords_j, k_s=None, k_t=None):
    """Image coordinates Phi_{i,t} C Phi_{j,s}^dagger X_j, shape (n_i, 3)."""
    k_t = cmap.k_t if k_t is None else k_t
    k_s = cmap.k_s if k_s is None else k_s
    return basis_i.phi(k_t) @ (cmap.matrix @ (basis_j.pinv(k_s) @ coords_j))


def nearest_vertices(points, coords):
    """Index of the Euclidean-nearest row of coords for every point
    (exact linear scan; lowest index wins ties)."""
    d = distance.cdist(points, coords)
    return d.argmin(axis=1)


def fmap_to_vertexmap(cmap, basis_i, basis_j, coords_j):
    """Pointwise map: each vertex of M_i goes to the vertex of M_j nearest to
    its mapped coordinate."""
    y = map_coordinates(cmap, basis_i, basis_j, coords_j)
    return VertexMap(nearest_vertices(y, coords_j), cmap.direction)


def vertexmap_to_fmap(vmap, basis_i, basis_j, k_s, k_t):
    """Functional map of a vertex-to-vertex assignment:
    C = Phi_{i,t}^dagger G Phi_{j,s} with G the 0/1 assignment matrix."""
    pulled = basis_j.phi(k_s)[vmap.assignment]   # (n_i, k_s)
    return FunctionalMap(basis_i.pinv(k_t) @ pulled, vmap.direction)


def refine(cmap, basis_i, basis_j, coords_j, k_s=None, k_t=None):
    """One projection cycle: functional map -> pointwise map -> functional map."""
    k_t = cmap.k_t if k_t is None else k_t
    k_s = cmap.k_s if k_s is None else k_s
    vmap = fmap_to_vertexmap(cmap, basis_i, basis_j, coords_j)
    return vertexmap_to_fmap(vmap, basis_i, basis_j, k_s, k_t), vmap


def map_energy(cmap, match, basis_i, basis_j, alpha=ALPHA_DEFAULT,
               beta=BETA_DEFAULT):
    """The objective minimized by solve_fmap, for diagnostics and tests."""
    lam_i = basis_i.evals(cmap.k_t)
    lam_j = basis_j.evals(cmap.k_s)
    comm = (lam_i[:, None] - lam_j[None, :]) * cmap.matrix
    e_delta = float(np.sum(comm**2))
    rows_i = np.array([p for p, _ in match], dtype=np.int64)
    rows_j = np.array([q for _, q in match], dtype=np.int64)
    resid = basis_i.phi(cmap.k_t)[rows_i] @ cmap.matrix - basis_j.phi(cmap.k_s)[rows_j]
    return alpha * e_delta + beta * float(np.sum(resid**2))


# -- text formats -------------------------------------------------------------

def save_fmap(path, cmap):
    """Header 'kt ks', then row-major doubles, one row per line."""
    with open(path, "w") as fh:
        fh.write(f"{cmap.k_t} {cmap.k_s}\n")
        for row in cmap.matrix:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_fmap(path, direction=(1, 2)):
    with open(path) as fh:
        k_t, k_s = (int(t) for t in fh.readline().split())
        data = np.array([[float(t) for t in line.split()] for line in fh])
    if data.shape != (k_t, k_s):
        raise ValueError(f"functional map file {path} has wrong shape")
    return FunctionalMap(data, direction)


def save_vertexmap(path, vmap):
    """One target vertex index per line."""
    with open(path, "w") as fh:
        for idx in vmap.assignment:
            fh.write(f"{idx}\n")


def load_vertexmap(path, direction=(1, 2)):
    with open(path) as fh:
        assignment = [int(line) for line in fh if line.strip()]
    return VertexMap(assignment, direction)
