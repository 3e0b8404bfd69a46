"""Morse-Smale complexes of convex polyhedra under the radial distance
function from an interior reference point."""

from .errors import (
    InternalInconsistencyError,
    MeshValidationError,
    NonGenericError,
    OracleInconclusiveError,
    PolymorseError,
    ProbeInconclusiveError,
)
from .geom import TolerancePolicy
from .poly import (
    Polyhedron,
    ReferencedPolyhedron,
    SurfacePoint,
    build,
    radial_function,
    solid_centroid,
    triangulate,
    with_reference,
)
from .fixtures import (
    BADGUY_ORIGIN,
    PEX_ORIGIN,
    convex_hull_mesh,
    make_badguy,
    make_cube,
    make_pex,
    make_random_hull,
    make_tetrahedron,
)
from .equilibria import (
    EdgeClass,
    EdgeClassification,
    Equilibrium,
    Finding,
    NondegeneracyReport,
    classify_edge,
    classify_edges,
    find_equilibria,
    is_vertex_equilibrium,
)
from .flow import (
    AscendingCurve,
    ExtendedGradient,
    ProbeResult,
    extended_gradient,
    probe_genericity,
    trace_all,
    trace_down_from_saddle,
    trace_up_from_saddle,
)
from .mscomplex import (
    MSCell,
    MSComplex,
    MSGraph,
    ValidationReport,
    build_ms_complex,
    to_graph,
    validate,
)
from .meshio import load_mesh, write_off
from .document import (
    AnalysisDocument,
    build_document,
    export_curves,
    export_graph,
    parse,
    serialize,
)
from .oracle import (
    OracleResult,
    complex_adjacency,
    openness_violations,
    oracle_basins,
    sample_surface,
)
from .bench import run_bench

__version__ = "0.1.0"

__all__ = [
    "BADGUY_ORIGIN",
    "AnalysisDocument",
    "AscendingCurve",
    "EdgeClass",
    "EdgeClassification",
    "Equilibrium",
    "ExtendedGradient",
    "Finding",
    "InternalInconsistencyError",
    "MSCell",
    "MSComplex",
    "MSGraph",
    "MeshValidationError",
    "NonGenericError",
    "NondegeneracyReport",
    "OracleInconclusiveError",
    "OracleResult",
    "PEX_ORIGIN",
    "Polyhedron",
    "PolymorseError",
    "ProbeInconclusiveError",
    "ProbeResult",
    "ReferencedPolyhedron",
    "SurfacePoint",
    "TolerancePolicy",
    "ValidationReport",
    "build",
    "build_document",
    "build_ms_complex",
    "classify_edge",
    "classify_edges",
    "complex_adjacency",
    "convex_hull_mesh",
    "export_curves",
    "export_graph",
    "extended_gradient",
    "find_equilibria",
    "is_vertex_equilibrium",
    "load_mesh",
    "make_badguy",
    "make_cube",
    "make_pex",
    "make_random_hull",
    "make_tetrahedron",
    "openness_violations",
    "oracle_basins",
    "parse",
    "probe_genericity",
    "radial_function",
    "run_bench",
    "sample_surface",
    "serialize",
    "solid_centroid",
    "to_graph",
    "trace_all",
    "trace_down_from_saddle",
    "trace_up_from_saddle",
    "triangulate",
    "validate",
    "with_reference",
    "write_off",
]
