"""Exact Polya-urn asymptotics for fringe statistics of random trees.

Subpackages by task:

``exact``, ``roots``
    Rational matrices and polynomials, certified polynomial roots.
``mst``, ``pa``
    m-ary search trees and linear preferential attachment trees.
``urns``
    Urn builders for fringe subtrees, protected nodes and out-degrees.
``asymptotics``, ``sylvester``
    Exact limit means and covariances of balanced urns.
``simulation``
    Monte Carlo validation.
"""

from .exact import RatMatrix, RatPoly, char_poly, det, nullspace, rat_solve
from .mst import IsoMode, MstTree, parse_mst
from .pa import PaTree, PaWeights, parse_pa
from .roots import gamma_condition, poly_roots
from .urns import (
    UrnSpec,
    build_mst_degree_urn,
    build_mst_fringe_urn,
    build_pa_degree_urn,
    build_pa_fringe_urn,
    build_protected_urn,
    validate_urn,
)
from .asymptotics import NotNormalRegime, UrnAnalysis, analyze_urn

__version__ = "0.1.0"

__all__ = [
    "RatMatrix",
    "RatPoly",
    "char_poly",
    "det",
    "nullspace",
    "rat_solve",
    "IsoMode",
    "MstTree",
    "parse_mst",
    "PaTree",
    "PaWeights",
    "parse_pa",
    "gamma_condition",
    "poly_roots",
    "UrnSpec",
    "build_mst_fringe_urn",
    "build_pa_fringe_urn",
    "build_protected_urn",
    "build_mst_degree_urn",
    "build_pa_degree_urn",
    "validate_urn",
    "NotNormalRegime",
    "UrnAnalysis",
    "analyze_urn",
]
