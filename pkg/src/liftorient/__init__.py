"""Edge lifting, immersions and k-arc-connected orientations of finite and one-ended graphs."""

__version__ = "0.1.0"

from .errors import DomainError, InvariantViolation, LiftOrientError, ResourceError
from .multigraph import MultiGraph, is_k_edge_connected, is_s_k_edge_connected, local_edge_connectivity
from .lifting import classify, is_k_liftable, lift, lifting_graph
from .orient import extend_orientation, orient, verify_k_arc_connected

__all__ = [
    "DomainError",
    "InvariantViolation",
    "LiftOrientError",
    "MultiGraph",
    "ResourceError",
    "classify",
    "extend_orientation",
    "is_k_edge_connected",
    "is_k_liftable",
    "is_s_k_edge_connected",
    "lift",
    "lifting_graph",
    "local_edge_connectivity",
    "orient",
    "verify_k_arc_connected",
]
