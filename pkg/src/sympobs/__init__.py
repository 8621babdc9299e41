"""Exact Chern-class factorization obstructions, linear symplectic normal forms,
generating-function blending and Calabi invariants."""

from .catalog import blowup_cp3_point, cp, cp2xcp2, product, sphere2
from .factor import SearchConfig, decide_even_factorization, divide_check, obstruction_report
from .ring import ManifoldData, RingElement, RingPresentation, invert_unit, is_integral, mul, chern_degree, project_degree

__all__ = [
    "ManifoldData",
    "RingElement",
    "RingPresentation",
    "SearchConfig",
    "blowup_cp3_point",
    "cp",
    "cp2xcp2",
    "decide_even_factorization",
    "divide_check",
    "invert_unit",
    "is_integral",
    "mul",
    "obstruction_report",
    "chern_degree",
    "product",
    "project_degree",
    "sphere2",
]

__version__ = "0.1.0"
