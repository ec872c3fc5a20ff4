"""End-to-end assembly: meshes -> landmarks -> gene bank -> genetic search."""

from __future__ import annotations

import numpy as np

from . import descriptors, genetic, spectral
from .elastic import FitnessContext
from .mesh import normalize_area


def prepare_mesh(mesh, cfg, cache_dir=None):
    """Area-normalize and compute the k_t eigenbasis (k_t + safety margin is
    clamped to the vertex count)."""
    norm = normalize_area(mesh)
    k = min(cfg.k_t, norm.n_vertices)
    basis = spectral.eigenbasis_cached(norm, k, cache_dir)
    return norm, basis


def landmark_set(mesh, basis, cfg):
    lset = descriptors.detect_landmarks(mesh, basis, d_eps=cfg.d_eps,
                                        m_max=cfg.m_max,
                                        n_center_funcs=min(30, basis.k - 1))
    descriptors.landmark_adjacency(mesh, lset, d_adj=cfg.d_adj)
    return lset


def build_context(mesh_1, mesh_2, cfg, cache_dir=None):
    """Everything the genetic algorithm needs, from two raw meshes."""
    m1, basis_1 = prepare_mesh(mesh_1, cfg, cache_dir)
    m2, basis_2 = prepare_mesh(mesh_2, cfg, cache_dir)
    lm_1 = landmark_set(m1, basis_1, cfg)
    lm_2 = landmark_set(m2, basis_2, cfg)
    wks_1 = descriptors.wks(basis_1)
    wks_2 = descriptors.wks(basis_2)
    bank, prominent = genetic.build_gene_bank(lm_1, lm_2, wks_1, wks_2,
                                              eps_wks=cfg.eps_wks)
    fit_ctx = FitnessContext(m1, m2, basis_1, basis_2, k_s=cfg.k_s,
                             k_t=min(cfg.k_t, basis_1.k, basis_2.k),
                             alpha=cfg.alpha, beta=cfg.beta, mu=cfg.mu,
                             eta=cfg.eta, gamma=cfg.gamma)
    return genetic.MatchingContext(fit_ctx, lm_1, lm_2, bank, prominent)


def run_match(mesh_1, mesh_2, cfg, cache_dir=None):
    """Full pipeline; returns (context, best genes, refined maps, run log)."""
    ctx = build_context(mesh_1, mesh_2, cfg, cache_dir)
    rng = np.random.default_rng(cfg.seed)
    best, maps, log = genetic.evolve(ctx, cfg, rng)
    return ctx, best, maps, log
