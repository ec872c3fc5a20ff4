"""Triangle mesh representation, ASCII OBJ/OFF/PLY I/O, area normalization,
and approximate geodesic distances.

Geodesics are shortest paths on the edge graph augmented with one-ring
shortcuts: for every interior edge, the two opposite vertices are connected
by their straight-line distance in the planar unfolding of the two adjacent
triangles (only when the unfolded segment actually crosses the shared edge).
"""

from __future__ import annotations

import hashlib
import os

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import MeshError


class TriMesh:
    """Immutable indexed triangle mesh with edge topology and lumped areas.

    vertices : (n, 3) float array
    faces    : (F, 3) int array
    edges    : (E, 2) int array, each row sorted, unique
    edge_faces : (E, 2) int array of adjacent face indices, -1 for boundary
    """

    def __init__(self, vertices, faces):
        v = np.asarray(vertices, dtype=np.float64)
        f = np.asarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("faces must be an (F, 3) array of vertex triples")
        n = v.shape[0]
        if f.size and (f.min() < 0 or f.max() >= n):
            raise MeshError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise MeshError("degenerate face: repeated vertex index")

        self.vertices = v
        self.faces = f
        self.edges, self.edge_faces = _build_edges(f)

        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        self.face_areas = 0.5 * np.linalg.norm(cross, axis=1)
        va = np.zeros(n)
        np.add.at(va, f.ravel(), np.repeat(self.face_areas / 3.0, 3))
        self.vertex_areas = va

        for a in (self.vertices, self.faces, self.edges, self.edge_faces,
                  self.face_areas, self.vertex_areas):
            a.setflags(write=False)
        self._geo_graph = None
        self._geo_all = None

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def total_area(self):
        return float(self.face_areas.sum())

    def content_hash(self):
        """Stable hex digest of the geometry, used to key on-disk caches."""
        h = hashlib.sha256()
        h.update(self.vertices.tobytes())
        h.update(self.faces.tobytes())
        return h.hexdigest()

    # -- geodesics ---------------------------------------------------------

    def geodesic_graph(self):
        """Sparse symmetric graph of edge lengths plus unfolded one-ring shortcuts."""
        if self._geo_graph is None:
            self._geo_graph = _build_geodesic_graph(self)
        return self._geo_graph

    def geodesic_matrix(self):
        """All-pairs geodesic distances, (n, n). Cached; errors on disconnected mesh."""
        if self._geo_all is None:
            d = csgraph.dijkstra(self.geodesic_graph(), directed=False)
            if not np.all(np.isfinite(d)):
                raise MeshError("mesh is disconnected")
            d.setflags(write=False)
            self._geo_all = d
        return self._geo_all


class GeodesicField:
    """Per-vertex geodesic distances from a single source vertex."""

    def __init__(self, source_vertex, distances):
        self.source_vertex = int(source_vertex)
        self.distances = np.asarray(distances, dtype=np.float64)
        self.distances.setflags(write=False)


def geodesic_from(mesh, source):
    """Geodesic distances from `source` to every vertex (graph shortest paths)."""
    if not 0 <= source < mesh.n_vertices:
        raise MeshError(f"source vertex {source} out of range")
    d = csgraph.dijkstra(mesh.geodesic_graph(), directed=False, indices=source)
    if not np.all(np.isfinite(d)):
        raise MeshError("mesh is disconnected")
    return GeodesicField(source, d)


def normalize_area(mesh):
    """Scale to total surface area 1 and translate the area centroid to the origin."""
    area = mesh.total_area
    if area <= 0:
        raise MeshError("mesh has zero total area")
    scale = 1.0 / np.sqrt(area)
    v = mesh.vertices * scale
    w = mesh.vertex_areas / mesh.vertex_areas.sum()
    centroid = w @ v
    return TriMesh(v - centroid, mesh.faces)


def _build_edges(faces):
    pairs = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    pairs = np.sort(pairs, axis=1)
    face_ids = np.tile(np.arange(faces.shape[0]), 3)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    pairs, face_ids = pairs[order], face_ids[order]
    edges = []
    edge_faces = []
    i = 0
    while i < len(pairs):
        j = i + 1
        while j < len(pairs) and np.array_equal(pairs[j], pairs[i]):
            j += 1
        count = j - i
        if count > 2:
            raise MeshError(
                f"non-manifold edge {tuple(pairs[i])}: {count} adjacent faces"
            )
        edges.append(pairs[i])
        edge_faces.append([face_ids[i], face_ids[i + 1] if count == 2 else -1])
        i = j
    return np.array(edges, dtype=np.int64), np.array(edge_faces, dtype=np.int64)


def _build_geodesic_graph(mesh):
    v, f = mesh.vertices, mesh.faces
    lengths = {}

    def add(a, b, d):
        key = (a, b) if a < b else (b, a)
        prev = lengths.get(key)
        if prev is None or d < prev:
            lengths[key] = d

    el = np.linalg.norm(v[mesh.edges[:, 0]] - v[mesh.edges[:, 1]], axis=1)
    for (a, b), d in zip(mesh.edges, el):
        add(int(a), int(b), float(d))

    # Unfolded shortcut across each interior edge.
    interior = mesh.edge_faces[:, 1] >= 0
    for (a, b), (t1, t2) in zip(mesh.edges[interior], mesh.edge_faces[interior]):
        opp1 = _opposite_vertex(f[t1], a, b)
        opp2 = _opposite_vertex(f[t2], a, b)
        d = _unfolded_distance(v[a], v[b], v[opp1], v[opp2])
        if d is not None:
            add(int(opp1), int(opp2), d)

    keys = np.array(list(lengths.keys()), dtype=np.int64)
    vals = np.array(list(lengths.values()))
    n = mesh.n_vertices
    g = sparse.csr_matrix((vals, (keys[:, 0], keys[:, 1])), shape=(n, n))
    return g + g.T


def _opposite_vertex(face, a, b):
    for x in face:
        if x != a and x != b:
            return int(x)
    raise MeshError("face does not contain the shared edge")  # pragma: no cover


def _unfolded_distance(pa, pb, p1, p2):
    """Distance between the opposite vertices after unfolding the two triangles
    into the plane across edge (pa, pb). None when the straight segment does
    not cross the shared edge (the path through an endpoint is shorter and
    already present in the graph)."""
    L = np.linalg.norm(pb - pa)
    if L <= 0:
        return None

    def planar(p, ysign):
        da = np.linalg.norm(p - pa)
        db = np.linalg.norm(p - pb)
        x = (da * da + L * L - db * db) / (2.0 * L)
        y2 = max(da * da - x * x, 0.0)
        return x, ysign * np.sqrt(y2)

    x1, y1 = planar(p1, 1.0)
    x2, y2 = planar(p2, -1.0)
    if y1 <= 0 or y2 >= 0:
        return None
    t = y1 / (y1 - y2)
    xc = x1 + t * (x2 - x1)
    if xc < 0 or xc > L:
        return None
    return float(np.hypot(x2 - x1, y2 - y1))


# -- file I/O ---------------------------------------------------------------

def load_mesh(path):
    """Read an ASCII OBJ/OFF/PLY triangle mesh. Topology is validated; the
    mesh is NOT area-normalized."""
    if not os.path.isfile(path):
        raise MeshError(f"no such file: {path}")
    ext = os.path.splitext(path)[1].lower()
    with open(path, "r", errors="replace") as fh:
        text = fh.read()
    if ext == ".obj":
        return _parse_obj(text)
    if ext == ".off":
        return _parse_off(text)
    if ext == ".ply":
        return _parse_ply(text)
    raise MeshError(f"unsupported mesh format: {ext!r} (expected .obj/.off/.ply)")


def _parse_obj(text):
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise MeshError(f"malformed OBJ vertex line: {line!r}")
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            if len(idx) != 3:
                raise MeshError("non-triangle face in OBJ file")
            faces.append(idx)
    if not verts or not faces:
        raise MeshError("OBJ file contains no triangle mesh")
    return TriMesh(verts, faces)


def _parse_off(text):
    tokens = []
    for line in text.splitlines():
        line = line.split("#")[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError("missing OFF header")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4  # skip edge count
        verts = []
        for _ in range(nv):
            verts.append([float(t) for t in tokens[pos:pos + 3]])
            pos += 3
        faces = []
        for _ in range(nf):
            cnt = int(tokens[pos])
            if cnt != 3:
                raise MeshError("non-triangle face in OFF file")
            faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
            pos += 1 + cnt
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed OFF file: {exc}") from exc
    return TriMesh(verts, faces)


def _parse_ply(text):
    lines = iter(text.splitlines())
    if next(lines, "").strip() != "ply":
        raise MeshError("missing ply header")
    n_vert = n_face = None
    vert_props = []
    current = None
    for line in lines:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise MeshError("only ASCII PLY is supported")
        elif parts[0] == "element":
            current = parts[1]
            if current == "vertex":
                n_vert = int(parts[2])
            elif current == "face":
                n_face = int(parts[2])
        elif parts[0] == "property" and current == "vertex":
            vert_props.append(parts[-1])
        elif parts[0] == "end_header":
            break
    if n_vert is None or n_face is None:
        raise MeshError("PLY header missing vertex or face element")
    try:
        ix, iy, iz = (vert_props.index(c) for c in "xyz")
    except ValueError as exc:
        raise MeshError("PLY vertex element lacks x/y/z properties") from exc
    verts, faces = [], []
    try:
        for _ in range(n_vert):
            parts = next(lines).split()
            verts.append([float(parts[ix]), float(parts[iy]), float(parts[iz])])
        for _ in range(n_face):
            parts = next(lines).split()
            if int(parts[0]) != 3:
                raise MeshError("non-triangle face in PLY file")
            faces.append([int(parts[1]), int(parts[2]), int(parts[3])])
    except (StopIteration, ValueError, IndexError) as exc:
        raise MeshError(f"malformed PLY body: {exc}") from exc
    return TriMesh(verts, faces)


def save_ply(path, vertices, faces, colors=None):
    """Write an ASCII PLY, optionally with per-vertex uchar RGB colors."""
    v = np.asarray(vertices, dtype=np.float64)
    f = np.asarray(faces, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(v)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if colors is not None:
            colors = np.asarray(colors, dtype=np.uint8)
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write(f"element face {len(f)}\n")
        fh.write("property list uchar int vertex_indices\nend_header\n")
        for i, p in enumerate(v):
            line = f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}"
            if colors is not None:
                c = colors[i]
                line += f" {c[0]} {c[1]} {c[2]}"
            fh.write(line + "\n")
        for tri in f:
            fh.write(f"3 {tri[0]} {tri[1]} {tri[2]}\n")
