"""Automatic sparse landmark correspondence between non-isometric triangle
meshes via genetic optimization of a dense functional-map fitness energy."""

from .config import RunConfig
from .errors import GenmatchError, MeshError, PipelineError
from .mesh import TriMesh, geodesic_from, load_mesh, normalize_area, save_ply
from .pipeline import build_context, run_match

__all__ = [
    "RunConfig", "GenmatchError", "MeshError", "PipelineError",
    "TriMesh", "geodesic_from", "load_mesh", "normalize_area", "save_ply",
    "build_context", "run_match",
]
