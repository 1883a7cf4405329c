"""Nerve and flag complexes of cover families over finite ground models,
inverse systems with coordinate-projection bonds, and cell-structure checks."""

from .complexes import (
    BarycentricPoint,
    LambdaIndex,
    SimplicialComplex,
    SimplicialMap,
    Vertex,
    build_flag,
    build_nerve,
    build_vertices,
    carrier_wedge,
    flag_completion,
    identified_nerve,
    product_weights,
)
from .ground import (
    Cover,
    CoverElement,
    CoverFamily,
    GroundSpace,
    Metric,
    WeightTable,
    check_local_refinement,
    check_selection_completeness,
    generate_cover,
    generate_space,
    partition_of_unity,
    restrict_family,
)
from .homology import BettiVector, betti, betti_stabilization
from .systems import (
    InverseSystem,
    PointThread,
    VertexThread,
    bonding_map,
    build_system,
    canonical_map,
    canonical_thread,
    fiber,
    fiber_homotopy,
    thread_image,
    vertex_threads,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
