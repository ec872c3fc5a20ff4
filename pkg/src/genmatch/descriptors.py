"""Landmark detection and descriptors: AGD extrema, spectral centers,
salience-ordered distance filtering, geodesic-Voronoi adjacency, and
Wave Kernel Signatures.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import PipelineError

CAT_MAX = "Max"
CAT_MIN = "Min"
CAT_CENTER = "Center"
CATEGORY_PRIORITY = {CAT_MAX: 0, CAT_MIN: 1, CAT_CENTER: 2}

D_EPS_DEFAULT = 0.08
D_ADJ_DEFAULT = 0.3
M_MAX_DEFAULT = 35
WKS_SCALES = 100
WKS_SIGMA_FACTOR = 7.0 / 6.0


class Landmark:
    """A categorized landmark vertex."""

    __slots__ = ("vertex", "category", "salience_rank")

    def __init__(self, vertex, category, salience_rank):
        self.vertex = int(vertex)
        self.category = category
        self.salience_rank = int(salience_rank)

    def __repr__(self):
        return f"Landmark(v={self.vertex}, {self.category}, rank={self.salience_rank})"


class LandmarkSet:
    """Filtered landmarks of one mesh with their mutual geodesic structure.

    landmarks        : list of Landmark, in salience order
    pairwise         : (m, m) geodesic distances between landmark vertices
    vertex_distances : (m, n) geodesic distance from each landmark to every vertex
    adjacency        : list of frozensets of landmark indices (excludes self)
    voronoi_labels   : (n,) index of the nearest landmark per vertex
    """

    def __init__(self, landmarks, pairwise, vertex_distances, d_eps):
        self.landmarks = list(landmarks)
        self.pairwise = np.asarray(pairwise)
        self.vertex_distances = np.asarray(vertex_distances)
        self.d_eps = float(d_eps)
        self.voronoi_labels = self.vertex_distances.argmin(axis=0)
        self.adjacency = None  # filled by landmark_adjacency

    def __len__(self):
        return len(self.landmarks)

    @property
    def vertices(self):
        return np.array([l.vertex for l in self.landmarks], dtype=np.int64)

    @property
    def categories(self):
        return [l.category for l in self.landmarks]

    def indices_of_category(self, category):
        return [i for i, l in enumerate(self.landmarks) if l.category == category]

    def to_json(self):
        out = {
            "landmarks": [
                {"vertex": int(l.vertex), "category": l.category}
                for l in self.landmarks
            ],
        }
        if self.adjacency is not None:
            out["adjacency"] = sorted(
                [i, int(j)]
                for i in range(len(self)) for j in self.adjacency[i] if i < int(j)
            )
        return json.dumps(out, indent=2)


def agd(mesh):
    """Average Geodesic Distance: area-weighted mean distance to all vertices."""
    d = mesh.geodesic_matrix()
    return d @ mesh.vertex_areas


def local_extrema(mesh, f, kind):
    """Vertices whose value is strictly above (kind='max') or below
    (kind='min') all one-ring neighbors. Plateaus yield nothing."""
    f = np.asarray(f, dtype=np.float64)
    n = mesh.n_vertices
    best = np.full(n, -np.inf if kind == "max" else np.inf)
    for a, b in mesh.edges:
        if kind == "max":
            best[a] = max(best[a], f[b])
            best[b] = max(best[b], f[a])
        else:
            best[a] = min(best[a], f[b])
            best[b] = min(best[b], f[a])
    if kind == "max":
        mask = f > best
    else:
        mask = f < best
    # isolated vertices never count
    mask &= np.isfinite(best)
    return np.flatnonzero(mask)


def centers_function(basis, n_funcs=30):
    """Spectral saliency sum over eigenfunctions 2..N+1 (the constant
    eigenfunction is skipped: its 1/sqrt(lambda) weight diverges).
    Centers are the local minima of this function."""
    if basis.k < n_funcs + 1:
        raise ValueError(f"basis has {basis.k} eigenpairs, need {n_funcs + 1}")
    lam = basis.eigenvalues[1:n_funcs + 1]
    if np.any(lam <= 0):
        raise ValueError("nonpositive eigenvalue beyond the constant mode")
    phi = basis.eigenfunctions[:, 1:n_funcs + 1]
    sup = np.abs(phi).max(axis=0)
    return (np.abs(phi) / sup) @ (1.0 / np.sqrt(lam))


def detect_landmarks(mesh, basis, d_eps=D_EPS_DEFAULT, m_max=M_MAX_DEFAULT,
                     n_center_funcs=30):
    """AGD maxima, AGD minima, and centers, greedily filtered so all retained
    landmarks are at least d_eps apart (d_eps grows by 1.1x until at most
    m_max survive). Filtering order: Max, Min, Center; extrema by descending
    |AGD - mean|, centers by ascending saliency; vertex index breaks ties."""
    agd_vals = agd(mesh)
    f_n = centers_function(basis, n_center_funcs)
    mean_agd = float(agd_vals.mean())

    candidates = []  # (priority, sort_value, vertex, category)
    for v in local_extrema(mesh, agd_vals, "max"):
        candidates.append((0, -abs(agd_vals[v] - mean_agd), int(v), CAT_MAX))
    for v in local_extrema(mesh, agd_vals, "min"):
        candidates.append((1, -abs(agd_vals[v] - mean_agd), int(v), CAT_MIN))
    for v in local_extrema(mesh, f_n, "min"):
        candidates.append((2, f_n[v], int(v), CAT_CENTER))

    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    seen = set()
    ordered = []
    for prio, _, v, cat in candidates:
        if v in seen:  # same vertex in several categories: keep higher priority
            continue
        seen.add(v)
        ordered.append((v, cat))

    if len(ordered) < 3:
        raise PipelineError(
            f"insufficient features: only {len(ordered)} landmarks detected"
        )

    dmat = mesh.geodesic_matrix()
    verts = np.array([v for v, _ in ordered], dtype=np.int64)
    pair_d = dmat[np.ix_(verts, verts)]

    eps = d_eps
    while True:
        kept = []
        for i in range(len(ordered)):
            if all(pair_d[i, j] >= eps for j in kept):
                kept.append(i)
        if len(kept) <= m_max:
            break
        eps *= 1.1

    if len(kept) < 3:
        raise PipelineError("insufficient features after distance filtering")

    landmarks = [
        Landmark(ordered[i][0], ordered[i][1], rank) for rank, i in enumerate(kept)
    ]
    kept_verts = verts[kept]
    return LandmarkSet(
        landmarks,
        pair_d[np.ix_(kept, kept)],
        dmat[kept_verts],
        eps,
    )


def landmark_adjacency(mesh, lset, d_adj=D_ADJ_DEFAULT):
    """Two landmarks are adjacent if their geodesic distance is below d_adj or
    their geodesic Voronoi cells share a mesh edge. Fills lset.adjacency."""
    m = len(lset)
    adjacent = lset.pairwise < d_adj
    labels = lset.voronoi_labels
    for a, b in mesh.edges:
        la, lb = labels[a], labels[b]
        if la != lb:
            adjacent[la, lb] = adjacent[lb, la] = True
    np.fill_diagonal(adjacent, False)
    lset.adjacency = [frozenset(np.flatnonzero(adjacent[i])) for i in range(m)]
    return lset.adjacency


class WksTable:
    """Wave Kernel Signatures of all vertices of one mesh, (n, T)."""

    def __init__(self, signatures):
        self.signatures = np.asarray(signatures)
        self.signatures.setflags(write=False)


def wks(basis, k_t=None, n_scales=WKS_SCALES):
    """Standard WKS: T energies linearly spaced in [log lambda_2, log lambda_kt],
    Gaussian width sigma = 7/6 of the energy step, normalized per energy."""
    k_t = basis.k if k_t is None else k_t
    lam = basis.eigenvalues[1:k_t]
    if lam[0] <= 0:
        raise ValueError("second eigenvalue must be positive")
    log_lam = np.log(lam)
    energies = np.linspace(log_lam[0], log_lam[-1], n_scales)
    step = energies[1] - energies[0] if n_scales > 1 else 1.0
    sigma = WKS_SIGMA_FACTOR * step
    # (k, T) Gaussian weights
    g = np.exp(-((energies[None, :] - log_lam[:, None]) ** 2) / (2.0 * sigma**2))
    phi2 = basis.eigenfunctions[:, 1:k_t] ** 2
    sig = phi2 @ g
    norm = g.sum(axis=0)
    return WksTable(sig / norm[None, :])


def wks_raw_distance(table_1, table_2, v_1, candidates):
    """Scaled L1 distance between the signature of v_1 (mesh 1) and each
    candidate vertex (mesh 2): sum_t |a - b| / (a + b)."""
    a = table_1.signatures[v_1][None, :]
    b = table_2.signatures[np.asarray(candidates, dtype=np.int64)]
    denom = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(denom > 0, np.abs(a - b) / denom, 0.0)
    return terms.sum(axis=1)


def wks_distance(table_1, table_2, v_1, v_2, candidates):
    """Normalized WKS distance in [0, 1]: raw distance from v_1 to v_2 divided
    by the maximum raw distance from v_1 over the candidate set (which must
    contain v_2)."""
    candidates = list(candidates)
    raw = wks_raw_distance(table_1, table_2, v_1, candidates)
    peak = raw.max()
    if peak <= 0:
        return 0.0
    return float(raw[candidates.index(v_2)] / peak)


def wks_distance_row(table_1, table_2, v_1, candidates):
    """Normalized WKS distances from v_1 to every candidate at once."""
    raw = wks_raw_distance(table_1, table_2, v_1, candidates)
    peak = raw.max()
    if peak <= 0:
        return np.zeros_like(raw)
    return raw / peak
