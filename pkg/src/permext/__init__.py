"""Exact-arithmetic tools for extended formulations of the permutahedron."""

from .exactnum import RatMatrix, Rational, format_rational, parse_rational, solve_exact_lp
from .permgroup import Permutation, parse_permutation
from .polytope import permutahedron_facets, permutahedron_vertices
from .formulation import (
    Formulation,
    SubspaceExtension,
    birkhoff_z_extension,
    build_birkhoff_extension,
    to_subspace_extension,
    verify_projection,
)
from .section import Section, canonical_birkhoff_section
from .audit import Verdict, audit_extension

__all__ = [
    "Formulation", "Permutation", "RatMatrix", "Rational", "Section", "SubspaceExtension", "Verdict",
    "audit_extension", "birkhoff_z_extension", "build_birkhoff_extension", "canonical_birkhoff_section",
    "format_rational", "parse_permutation", "parse_rational", "permutahedron_facets", "permutahedron_vertices",
    "solve_exact_lp", "to_subspace_extension", "verify_projection",
]
__version__ = "0.1.0"
