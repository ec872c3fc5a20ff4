"""Cotangent Laplace-Beltrami discretization, eigenbasis computation, and
reduced-basis projections.

The eigenbasis solves the generalized problem S phi = lambda M phi with the
cotangent stiffness S and lumped (vertex-area) mass M, via a dense symmetric
solve after the M^{-1/2} similarity transform. Intended for desk-scale meshes
(n <= ~4000); dense solves avoid iterative-solver nondeterminism.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import linalg, sparse

from .errors import MeshError


class SpectralBasis:
    """First k Laplace-Beltrami eigenpairs of a mesh.

    eigenvalues    : (k,) ascending, nonnegative up to round-off
    eigenfunctions : (n, k), columns M-orthonormal, sign-fixed
    mass           : (n,) lumped vertex areas
    pseudo_inverse : (k, n) = Phi^T diag(mass)
    """

    def __init__(self, mesh_id, eigenvalues, eigenfunctions, mass):
        self.mesh_id = mesh_id
        self.eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        self.eigenfunctions = np.asarray(eigenfunctions, dtype=np.float64)
        self.mass = np.asarray(mass, dtype=np.float64)
        self.pseudo_inverse = self.eigenfunctions.T * self.mass[None, :]
        for a in (self.eigenvalues, self.eigenfunctions, self.mass,
                  self.pseudo_inverse):
            a.setflags(write=False)

    @property
    def k(self):
        return self.eigenvalues.shape[0]

    @property
    def n(self):
        return self.eigenfunctions.shape[0]

    def phi(self, k=None):
        """Eigenfunction matrix truncated to the first k columns."""
        return self.eigenfunctions if k is None else self.eigenfunctions[:, :k]

    def pinv(self, k=None):
        """Pseudo-inverse truncated to the first k rows."""
        return self.pseudo_inverse if k is None else self.pseudo_inverse[:k]

    def evals(self, k=None):
        return self.eigenvalues if k is None else self.eigenvalues[:k]


def cotan_operator(mesh):
    """Cotangent stiffness (n x n sparse, PSD, zero row sums) and lumped mass."""
    v, f = mesh.vertices, mesh.faces
    if np.any(mesh.face_areas <= 0):
        raise MeshError("degenerate (zero-area) triangle")
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for c in range(3):
        i = f[:, (c + 1) % 3]
        j = f[:, (c + 2) % 3]
        k = f[:, c]
        u = v[i] - v[k]
        w = v[j] - v[k]
        # cot of the angle at k, opposite edge (i, j)
        cot = np.einsum("ij,ij->i", u, w) / (2.0 * mesh.face_areas)
        half = 0.5 * cot
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-half, -half, half, half]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    stiffness = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return stiffness, mesh.vertex_areas.copy()


def eigenbasis(mesh, k):
    """Smallest-k generalized eigenpairs of (stiffness, mass), M-orthonormal.

    Eigenfunction signs are fixed so the entry of largest magnitude is
    positive (lowest index on ties), making bases reproducible across runs.
    """
    n = mesh.n_vertices
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for mesh with {n} vertices")
    stiffness, mass = cotan_operator(mesh)
    inv_sqrt_m = 1.0 / np.sqrt(mass)
    a = stiffness.toarray() * inv_sqrt_m[:, None] * inv_sqrt_m[None, :]
    a = 0.5 * (a + a.T)
    evals, evecs = linalg.eigh(a, subset_by_index=[0, k - 1])
    phi = evecs * inv_sqrt_m[:, None]
    # sign fix: largest-magnitude entry positive; argmax breaks ties low
    flip = phi[np.abs(phi).argmax(axis=0), np.arange(k)] < 0
    phi[:, flip] *= -1.0
    return SpectralBasis(mesh.content_hash(), evals, phi, mass)


def project(basis, f):
    """Coefficients of a per-vertex function in the reduced basis: Phi^T M f."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != basis.n:
        raise ValueError("function length does not match basis")
    return basis.pseudo_inverse @ f


def reconstruct(basis, coeffs):
    """Per-vertex function from reduced-basis coefficients: Phi c."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != basis.k:
        raise ValueError("coefficient length does not match basis")
    return basis.eigenfunctions @ coeffs


# -- optional on-disk eigenpair cache ----------------------------------------

def cache_path(cache_dir, mesh_hash, k):
    return os.path.join(cache_dir, f"{mesh_hash}_k{k}.eig")


def save_basis(path, basis):
    """Binary cache: ASCII header 'n k', then row-major doubles
    (eigenvalues, eigenfunctions, mass)."""
    with open(path, "wb") as fh:
        fh.write(f"{basis.n} {basis.k}\n".encode())
        fh.write(basis.eigenvalues.tobytes())
        fh.write(np.ascontiguousarray(basis.eigenfunctions).tobytes())
        fh.write(basis.mass.tobytes())


def load_basis(path, mesh_id=""):
    with open(path, "rb") as fh:
        header = fh.readline().decode()
        n, k = (int(t) for t in header.split())
        raw = np.frombuffer(fh.read(), dtype=np.float64)
    if raw.size != k + n * k + n:
        raise ValueError(f"eigenpair cache {path} is truncated")
    evals = raw[:k]
    phi = raw[k:k + n * k].reshape(n, k)
    mass = raw[k + n * k:]
    return SpectralBasis(mesh_id, evals, phi, mass)


def eigenbasis_cached(mesh, k, cache_dir=None):
    """eigenbasis() with an optional content-addressed on-disk cache."""
    if cache_dir is None:
        return eigenbasis(mesh, k)
    os.makedirs(cache_dir, exist_ok=True)
    mesh_hash = mesh.content_hash()
    path = cache_path(cache_dir, mesh_hash, k)
    if os.path.isfile(path):
        return load_basis(path, mesh_id=mesh_hash)
    basis = eigenbasis(mesh, k)
    save_basis(path, basis)
    return basis
