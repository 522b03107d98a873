"""Writhe of polygonal and lattice knots from the arrangement of their spherical indicatrix."""
from .arrangement import Arrangement, build_arrangement, coordinate_guides, verify_corollary
from .errors import GeometryError, KnotValidationError, PLWritheError
from .indicatrix import Indicatrix, build_indicatrix
from .knot import LatticeKnot, PLKnot, build_pl_knot, edge_directions, load_knot, parse_lattice, sample_closed_curve
from .projection import classify_direction, crossing_sign, project_diagram, tait_grid, tait_number
from .writhe import WritheReport, acn_monte_carlo, writhe_formula, writhe_lattice, writhe_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "Arrangement", "GeometryError", "Indicatrix", "KnotValidationError", "LatticeKnot", "PLKnot",
    "PLWritheError", "WritheReport", "acn_monte_carlo", "build_arrangement", "build_indicatrix",
    "build_pl_knot", "classify_direction", "coordinate_guides", "crossing_sign", "edge_directions",
    "load_knot", "parse_lattice", "project_diagram", "sample_closed_curve", "tait_grid", "tait_number",
    "verify_corollary", "writhe_formula", "writhe_lattice", "writhe_monte_carlo",
]
