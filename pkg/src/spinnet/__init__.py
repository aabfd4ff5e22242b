"""Spin-network kinematics on embedded graphs.

SU(2) harmonic analysis (Wigner matrices, Clebsch-Gordan coupling,
intertwiners), cylindrical functions with holonomies and Haar inner products,
and the flux / area / volume operators acting on them.
"""

from .su2 import (
    GroupElement,
    HalfInt,
    IntertwinerBasis,
    LieVector,
    WignerMatrix,
    adjoint_rotation,
    angular_momentum,
    casimir_eigenvalue,
    clebsch_gordan,
    haar_sample,
    intertwiner_basis,
    invariant_generator,
    multiply,
    wigner,
)
from .graphs import (
    Edge,
    EmbeddedGraph,
    IllPosedIntersectionError,
    InvalidGraphError,
    NonConformingOverlapError,
    Puncture,
    PunctureHalfEdge,
    PunctureResult,
    RefinementMap,
    Surface,
    common_refinement,
    ensure_valid,
    half_edges_at,
    is_spurious,
    outgoing_tangent,
    punctures,
    subdivide,
    subdivide_many,
    tangent_orientation,
)
from .cyl import (
    Connection,
    CylFun,
    GaugeTransformation,
    SpinNetworkState,
    evaluate,
    gram,
    holonomy,
    inner_product,
    mc_inner_product,
    monomial,
    promote,
    spin_network_basis,
    states_for_spins,
    transform_at_vertices,
    wilson_loop,
)
from .operators import (
    AreaVertexOperator,
    EdgeVertexOperator,
    FluxSpec,
    Spectrum,
    SpectrumEntry,
    VolumeVertexOperator,
    area_apply,
    area_matrix,
    area_spectrum,
    area_vertex_matrix,
    edge_vertex_operator,
    flux_apply,
    flux_commutator,
    flux_commutator_closed_form,
    flux_matrix,
    vertex_generator,
    volume_spectrum,
    volume_vertex_matrix,
)

__all__ = [
    "GroupElement",
    "HalfInt",
    "IntertwinerBasis",
    "LieVector",
    "WignerMatrix",
    "adjoint_rotation",
    "angular_momentum",
    "casimir_eigenvalue",
    "clebsch_gordan",
    "haar_sample",
    "intertwiner_basis",
    "invariant_generator",
    "multiply",
    "wigner",
    "Edge",
    "EmbeddedGraph",
    "IllPosedIntersectionError",
    "InvalidGraphError",
    "NonConformingOverlapError",
    "Puncture",
    "PunctureHalfEdge",
    "PunctureResult",
    "RefinementMap",
    "Surface",
    "common_refinement",
    "ensure_valid",
    "half_edges_at",
    "is_spurious",
    "outgoing_tangent",
    "punctures",
    "subdivide",
    "subdivide_many",
    "tangent_orientation",
    "Connection",
    "CylFun",
    "GaugeTransformation",
    "SpinNetworkState",
    "evaluate",
    "gram",
    "holonomy",
    "inner_product",
    "mc_inner_product",
    "monomial",
    "promote",
    "spin_network_basis",
    "states_for_spins",
    "transform_at_vertices",
    "wilson_loop",
    "AreaVertexOperator",
    "EdgeVertexOperator",
    "FluxSpec",
    "Spectrum",
    "SpectrumEntry",
    "VolumeVertexOperator",
    "area_apply",
    "area_matrix",
    "area_spectrum",
    "area_vertex_matrix",
    "edge_vertex_operator",
    "flux_apply",
    "flux_commutator",
    "flux_commutator_closed_form",
    "flux_matrix",
    "vertex_generator",
    "volume_spectrum",
    "volume_vertex_matrix",
]

__version__ = "0.1.0"
