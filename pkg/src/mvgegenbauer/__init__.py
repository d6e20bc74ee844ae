"""Matrix-valued Gegenbauer polynomials of arbitrary size and parameter nu > 0."""
from .params import WeightParams, parse_ell
from .matpoly import MatrixPolynomial, WeightedMatrixFunction

__all__ = ["WeightParams", "parse_ell", "MatrixPolynomial", "WeightedMatrixFunction"]
__version__ = "0.1.0"
