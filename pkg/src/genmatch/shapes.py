"""Procedural test shapes: icosphere, stretched ellipsoid, bumpy sphere."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh


def icosahedron():
    """Unit-radius icosahedron."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts[0])
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return verts, faces


def icosphere(subdivisions=3, radius=1.0):
    """Subdivided icosahedron projected onto a sphere of the given radius.

    Vertex counts by level: 12, 42, 162, 642, 2562.
    """
    verts, faces = icosahedron()
    verts = [tuple(p) for p in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                p = np.add(verts[i], verts[j]) / 2.0
                p /= np.linalg.norm(p)
                verts.append(tuple(p))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new_faces, dtype=np.int64)
    v = np.array(verts)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return TriMesh(v * radius, faces)


def stretched_icosphere(subdivisions=3, radius=1.0, stretch=1.2,
                        axis=(1.0, 2.0, 3.0)):
    """Icosphere stretched by `stretch` along a (generically oriented) axis.

    Same connectivity and vertex order as icosphere(subdivisions, radius),
    so vertex i corresponds to vertex i.
    """
    sphere = icosphere(subdivisions, radius)
    a = np.asarray(axis, dtype=np.float64)
    a /= np.linalg.norm(a)
    v = sphere.vertices
    v = v + (stretch - 1.0) * (v @ a)[:, None] * a[None, :]
    return TriMesh(v, sphere.faces)


def lobed_sphere(subdivisions=2, amplitude=0.3, asymmetry=0.08):
    """Sphere with three equatorial lobes related by an approximate 120-degree
    rotational symmetry, weakly broken by a one-lobe perturbation.

    The near-symmetry makes the WKS gene banks of a self-match contain
    plausible non-identity candidates, while the broken symmetry keeps the
    identity correspondence the unique lowest-energy match; useful as a
    self-match fixture where selection has a gradient to act on.
    """
    sphere = icosphere(subdivisions)
    v = sphere.vertices
    x, y, z = v[:, 0], v[:, 1], v[:, 2]
    phi = np.arctan2(y, x)
    ring = 1.0 - z ** 2
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    bump = (np.cos(3.0 * phi) * ring + asymmetry * np.cos(phi) * ring
            + 0.4 * np.sin(2.0 * theta))
    r = 1.0 + amplitude * bump / np.abs(bump).max()
    return TriMesh(v * r[:, None], sphere.faces)


def bumpy_sphere(subdivisions=2, radius=1.0, amplitude=0.25):
    """Sphere with a smooth asymmetric radial modulation; has well-separated
    AGD extrema, useful as a self-match fixture."""
    sphere = icosphere(subdivisions, radius)
    v = sphere.vertices
    x, y, z = v[:, 0] / radius, v[:, 1] / radius, v[:, 2] / radius
    bump = (np.sin(3.0 * x + 1.0) * np.cos(2.0 * y - 0.5)
            + 0.5 * np.sin(4.0 * z + 2.0) + 0.3 * np.cos(5.0 * x * y + 1.7))
    r = 1.0 + amplitude * bump / np.abs(bump).max()
    return TriMesh(v * r[:, None], sphere.faces)
