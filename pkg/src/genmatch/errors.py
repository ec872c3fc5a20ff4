"""Exception types shared across the package."""


class GenmatchError(Exception):
    """Base class for all package errors."""


class MeshError(GenmatchError):
    """Invalid mesh input: parse failure, bad topology, degenerate geometry."""


class PipelineError(GenmatchError):
    """A pipeline stage could not produce a result (e.g. no admissible chromosomes)."""
