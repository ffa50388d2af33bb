"""Foundation numerics: quadrature, symmetric eigensolver, zero tools."""
from .eigen import BACKEND, SymMatrix, sym_eig, sym_eig_arrays
from .piecewise import PanelPoly
from .quadrature import (InvalidInputError, QuadratureRule, gauss_legendre,
                         make_composite_gauss)
from .zeros import (DivergenceError, Rectangle, ResolutionError,
                    ZeroOnBoundaryError, count_zeros, refine_zero)

__all__ = [
    "BACKEND", "SymMatrix", "sym_eig", "sym_eig_arrays", "PanelPoly",
    "InvalidInputError", "QuadratureRule", "gauss_legendre",
    "make_composite_gauss", "DivergenceError", "Rectangle", "ResolutionError",
    "ZeroOnBoundaryError", "count_zeros", "refine_zero",
]
