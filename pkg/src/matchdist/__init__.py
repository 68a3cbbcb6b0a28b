"""Matching distance between R^2-valued functions on closed surfaces via the foliation method."""

from .bottleneck import MatchingWitness, bottleneck_distance, brute_force_bottleneck, point_distance
from .geometry import BiFunctionSample, DomainError, LineParam, normalized_slice, uniform_norm
from .mesh import Mesh, MeshError, icosahedron, icosphere, read_off, torus
from .pareto import ExtendedParetoGrid, line_intersections, load_contours, position_check, sphere_affine_epg
from .persistence import PersistenceDiagram, build_lower_star, compute_diagram, surface_diagrams
from .search import db_at, matching_distance_candidates, matching_distance_grid, verify_main_theorem
from .special import SpecialValue, find_special_values, is_special

__version__ = "0.1.0"

__all__ = [
    "BiFunctionSample",
    "DomainError",
    "ExtendedParetoGrid",
    "LineParam",
    "MatchingWitness",
    "Mesh",
    "MeshError",
    "PersistenceDiagram",
    "SpecialValue",
    "bottleneck_distance",
    "brute_force_bottleneck",
    "build_lower_star",
    "compute_diagram",
    "db_at",
    "find_special_values",
    "icosahedron",
    "icosphere",
    "is_special",
    "line_intersections",
    "load_contours",
    "matching_distance_candidates",
    "matching_distance_grid",
    "normalized_slice",
    "point_distance",
    "position_check",
    "read_off",
    "sphere_affine_epg",
    "surface_diagrams",
    "torus",
    "uniform_norm",
    "verify_main_theorem",
]
