"""Steklov (Dirichlet-to-Neumann) spectra of lattice domains and finite graphs."""
from .bounds import BoundReport, constants, inverse_eigen_sum, verify_corollary, verify_theorem
from .exceptions import (
    DegenerateClosureError,
    DisconnectedPairError,
    InvalidSpecError,
    InvalidTrialFamilyError,
    InvariantViolation,
    NonSymmetricError,
    PreconditionError,
    SteklovError,
)
from .geometry import geometry_report, pair_integral, total_double_integral
from .graph import (
    FiniteGraph,
    SubgraphProblem,
    build_gadget_chain,
    connected_components,
    effective_resistance,
    gadget_problem,
    subgraph_problem,
)
from .lattice import LatticeDomain, LatticeEdge, ShapeSpec, boundary_profile, generate
from .spectral import assemble_energy, dtn_matrix, harmonic_extension, solve, steklov_spectrum

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "constants", "inverse_eigen_sum", "verify_corollary", "verify_theorem",
    "DegenerateClosureError", "DisconnectedPairError", "InvalidSpecError", "InvalidTrialFamilyError",
    "InvariantViolation", "NonSymmetricError", "PreconditionError", "SteklovError",
    "geometry_report", "pair_integral", "total_double_integral",
    "FiniteGraph", "SubgraphProblem", "build_gadget_chain", "connected_components",
    "effective_resistance", "gadget_problem", "subgraph_problem",
    "LatticeDomain", "LatticeEdge", "ShapeSpec", "boundary_profile", "generate",
    "assemble_energy", "dtn_matrix", "harmonic_extension", "solve", "steklov_spectrum",
]
