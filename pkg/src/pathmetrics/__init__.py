"""Edge distance and similarity analysis of observed network paths."""

from .model import DirectedEdge, Path, PathRecord, PathSet, RoutingMatrix, WeightScheme, build_routing_matrix, row_of

__version__ = "0.1.0"

__all__ = [
    "DirectedEdge",
    "Path",
    "PathRecord",
    "PathSet",
    "RoutingMatrix",
    "WeightScheme",
    "build_routing_matrix",
    "row_of",
]
