"""Elastic shell energies (membrane + bending), the reversibility energy of a
functional-map pair, and the chromosome fitness functional built on them.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import MeshError
from . import fmap as fm

MU_DEFAULT = 1.0
ETA_DEFAULT = 1e-3
GAMMA_DEFAULT = 5e-4
LOG_EXTENSION_DELTA = 1e-6
BENDING_AREA_FLOOR = 1e-12


class DeformedConfiguration:
    """An undeformed reference mesh together with deformed vertex positions
    sharing its connectivity."""

    def __init__(self, reference, deformed_coords):
        coords = np.asarray(deformed_coords, dtype=np.float64)
        if coords.shape != reference.vertices.shape:
            raise ValueError("deformed coordinates must match reference vertex count")
        if not np.all(np.isfinite(coords)):
            raise ValueError("deformed coordinates must be finite")
        self.reference = reference
        self.deformed_coords = coords


def extended_log(x, delta=LOG_EXTENSION_DELTA):
    """log with a linear, slope-continuous extension below delta, so energies
    stay finite when a face collapses."""
    x = np.asarray(x, dtype=np.float64)
    safe = np.maximum(x, delta)
    return np.where(x >= delta, np.log(safe), np.log(delta) + (x - delta) / delta)


def _edge_grams(vertices, faces):
    """Per-face Gram matrix entries of the two edge vectors (x1-x0, x2-x0)."""
    e1 = vertices[faces[:, 1]] - vertices[faces[:, 0]]
    e2 = vertices[faces[:, 2]] - vertices[faces[:, 0]]
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    return g11, g12, g22


def membrane_energy(config, mu_log_delta=LOG_EXTENSION_DELTA):
    """Membrane energy: sum_t a_t (tr(G)/2 + det(G)/4 - 3 log(det G)/4 - 5/4),
    with G the first-fundamental-form pullback of the per-face deformation.

    G is evaluated through the edge Gram matrices, so degenerate deformed
    faces are handled without constructing a 2D frame for them.
    """
    mesh = config.reference
    r11, r12, r22 = _edge_grams(mesh.vertices, mesh.faces)
    det_r = r11 * r22 - r12 * r12
    if np.any(det_r <= 0):
        raise MeshError("degenerate reference triangle")
    d11, d12, d22 = _edge_grams(config.deformed_coords, mesh.faces)
    # tr(G) = tr(Gram_ref^{-1} Gram_def), det(G) = det(Gram_def)/det(Gram_ref)
    tr_g = (r22 * d11 - 2.0 * r12 * d12 + r11 * d22) / det_r
    det_g = (d11 * d22 - d12 * d12) / det_r
    integrand = 0.5 * tr_g + 0.25 * det_g - 0.75 * extended_log(det_g, mu_log_delta) - 1.25
    return float(mesh.face_areas @ integrand)


def _dihedral_cosines(vertices, faces, edge_faces, interior):
    normals = np.cross(
        vertices[faces[:, 1]] - vertices[faces[:, 0]],
        vertices[faces[:, 2]] - vertices[faces[:, 0]],
    )
    areas = 0.5 * np.linalg.norm(normals, axis=1)
    norms = np.linalg.norm(normals, axis=1)
    unit = normals / np.maximum(norms, 1e-20)[:, None]
    t1 = edge_faces[interior, 0]
    t2 = edge_faces[interior, 1]
    cos = np.einsum("ij,ij->i", unit[t1], unit[t2])
    return cos, areas, t1, t2


def bending_energy(config):
    """Bending energy: sum over interior edges of
    (cos theta_def - cos theta_ref)^2 * l_def^2 / d_def, where d_def is a third
    of the two adjacent deformed face areas. Dihedral cosine convention: dot
    of consistently oriented face normals (flat = 1); only cosine differences
    enter, so the convention cancels. Boundary edges contribute nothing."""
    mesh = config.reference
    interior = mesh.edge_faces[:, 1] >= 0
    if not np.any(interior):
        return 0.0
    cos_ref, _, t1, t2 = _dihedral_cosines(mesh.vertices, mesh.faces,
                                           mesh.edge_faces, interior)
    cos_def, areas_def, _, _ = _dihedral_cosines(config.deformed_coords, mesh.faces,
                                                 mesh.edge_faces, interior)
    d_def = np.maximum((areas_def[t1] + areas_def[t2]) / 3.0, BENDING_AREA_FLOOR)
    edges = mesh.edges[interior]
    l_def = np.linalg.norm(
        config.deformed_coords[edges[:, 0]] - config.deformed_coords[edges[:, 1]],
        axis=1,
    )
    return float(np.sum((cos_def - cos_ref) ** 2 * l_def**2 / d_def))


def elastic_energy(config, mu=MU_DEFAULT, eta=ETA_DEFAULT):
    return mu * membrane_energy(config) + eta * bending_energy(config)


def elastic_energy_of_fmap(cmap, mesh_i, basis_i, basis_j, coords_j,
                           mu=MU_DEFAULT, eta=ETA_DEFAULT):
    """Elastic energy of deforming M_i onto the mapped coordinates
    Phi_{i,t} C_ij Phi_{j,s}^dagger X_j."""
    deformed = fm.map_coordinates(cmap, basis_i, basis_j, coords_j)
    return elastic_energy(DeformedConfiguration(mesh_i, deformed), mu, eta)


def reversibility_energy(c_12, c_21, basis_1, basis_2, coords_1, coords_2):
    """Round-trip coordinate error of the two directional maps in the reduced
    bases (Frobenius-squared, both directions summed)."""
    k_s, k_t = c_12.k_s, c_12.k_t
    mapped_1 = fm.map_coordinates(c_21, basis_2, basis_1, coords_1)  # (n_2, 3)
    mapped_2 = fm.map_coordinates(c_12, basis_1, basis_2, coords_2)  # (n_1, 3)
    r1 = c_12.matrix @ (basis_2.pinv(k_s) @ mapped_1) - basis_1.pinv(k_t) @ coords_1
    r2 = c_21.matrix @ (basis_1.pinv(k_s) @ mapped_2) - basis_2.pinv(k_t) @ coords_2
    return float(np.sum(r1**2) + np.sum(r2**2))


class FitnessReport:
    """Energy breakdown of one chromosome evaluation."""

    __slots__ = ("e_mem_12", "e_bnd_12", "e_mem_21", "e_bnd_21", "e_rev",
                 "e_fit", "mu", "eta", "gamma")

    def __init__(self, e_mem_12, e_bnd_12, e_mem_21, e_bnd_21, e_rev,
                 mu=MU_DEFAULT, eta=ETA_DEFAULT, gamma=GAMMA_DEFAULT):
        self.e_mem_12 = e_mem_12
        self.e_bnd_12 = e_bnd_12
        self.e_mem_21 = e_mem_21
        self.e_bnd_21 = e_bnd_21
        self.e_rev = e_rev
        self.mu = mu
        self.eta = eta
        self.gamma = gamma
        e_elstc_12 = mu * e_mem_12 + eta * e_bnd_12
        e_elstc_21 = mu * e_mem_21 + eta * e_bnd_21
        self.e_fit = gamma * (e_elstc_12 + e_elstc_21) + (1.0 - gamma) * e_rev

    def to_dict(self):
        return {
            "e_mem_12": self.e_mem_12, "e_bnd_12": self.e_bnd_12,
            "e_mem_21": self.e_mem_21, "e_bnd_21": self.e_bnd_21,
            "e_rev": self.e_rev, "e_fit": self.e_fit,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


class FitnessContext:
    """Everything needed to evaluate a landmark match: the two meshes, their
    spectral bases, basis sizes, solver weights, and a content-addressed
    fitness cache (idempotent inserts, safe to share)."""

    def __init__(self, mesh_1, mesh_2, basis_1, basis_2, k_s=30, k_t=60,
                 alpha=fm.ALPHA_DEFAULT, beta=fm.BETA_DEFAULT,
                 mu=MU_DEFAULT, eta=ETA_DEFAULT, gamma=GAMMA_DEFAULT):
        self.mesh_1 = mesh_1
        self.mesh_2 = mesh_2
        self.basis_1 = basis_1
        self.basis_2 = basis_2
        self.k_s = k_s
        self.k_t = k_t
        self.alpha = alpha
        self.beta = beta
        self.mu = mu
        self.eta = eta
        self.gamma = gamma
        self.cache = {}

    def solve_pair(self, match):
        """Least-squares maps in both directions for a vertex-pair match."""
        inverse = [(j, i) for i, j in match]
        c_12 = fm.solve_fmap(match, self.basis_1, self.basis_2, self.k_s,
                             self.k_t, self.alpha, self.beta, direction=(1, 2))
        c_21 = fm.solve_fmap(inverse, self.basis_2, self.basis_1, self.k_s,
                             self.k_t, self.alpha, self.beta, direction=(2, 1))
        return c_12, c_21

    def refine_pair(self, c_12, c_21):
        c_12r, p_12 = fm.refine(c_12, self.basis_1, self.basis_2,
                                self.mesh_2.vertices)
        c_21r, p_21 = fm.refine(c_21, self.basis_2, self.basis_1,
                                self.mesh_1.vertices)
        return c_12r, c_21r, p_12, p_21

    def report(self, c_12, c_21):
        x1, x2 = self.mesh_1.vertices, self.mesh_2.vertices
        cfg_12 = DeformedConfiguration(
            self.mesh_1, fm.map_coordinates(c_12, self.basis_1, self.basis_2, x2))
        cfg_21 = DeformedConfiguration(
            self.mesh_2, fm.map_coordinates(c_21, self.basis_2, self.basis_1, x1))
        mem_12, bnd_12 = membrane_energy(cfg_12), bending_energy(cfg_12)
        mem_21, bnd_21 = membrane_energy(cfg_21), bending_energy(cfg_21)
        e_rev = reversibility_energy(c_12, c_21, self.basis_1, self.basis_2, x1, x2)
        return FitnessReport(mem_12, bnd_12, mem_21, bnd_21, e_rev,
                             self.mu, self.eta, self.gamma)


def fitness(match, ctx):
    """Reversible elastic energy of the refined functional-map pair induced by
    a landmark match (list of (vertex on M_1, vertex on M_2) pairs).

    Results are cached by match content; evaluation is deterministic.
    """
    key = tuple(sorted(match))
    if not key:
        raise ValueError("match must contain at least one pair")
    cached = ctx.cache.get(key)
    if cached is not None:
        return cached
    c_12, c_21 = ctx.solve_pair(key)
    c_12r, c_21r, _, _ = ctx.refine_pair(c_12, c_21)
    report = ctx.report(c_12r, c_21r)
    ctx.cache[key] = report
    return report
