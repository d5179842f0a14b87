"""Alpha filtration, persistence tree, diagrams and volumes of planar point sets."""
from .filtration import Filtration, Triangulation, alpha_filtration, delaunay, jitter_points
from .tree import (
    PersistencePair,
    PersistenceTree,
    build_persistence_tree,
    diagram_h0,
    diagram_h1,
    validate_filtration,
)
from .volumes import (
    Volume,
    minimum_volume,
    rasterize_volume,
    stable_volume,
    sv_size_curve,
    top_components,
    tune_epsilon,
)

__all__ = [
    "Filtration",
    "Triangulation",
    "alpha_filtration",
    "delaunay",
    "jitter_points",
    "PersistencePair",
    "PersistenceTree",
    "build_persistence_tree",
    "diagram_h0",
    "diagram_h1",
    "validate_filtration",
    "Volume",
    "minimum_volume",
    "rasterize_volume",
    "stable_volume",
    "sv_size_curve",
    "top_components",
    "tune_epsilon",
]
