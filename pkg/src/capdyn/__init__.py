"""Numerical toolkit for capture components of polynomial families.

Submodules: ``poly`` (marked polynomials and families), ``rays`` (external
and internal rays, Fatou boundary parametrization), ``scheme`` (mapping
schemes and the model space), ``dimension`` (Poincaré exponents, box
counting, turning, Mori and transfer checks), ``scan`` (parameter-space
classification and component boundaries), ``render``, ``suites`` and ``cli``.
"""
from .errors import CapdynError
from .poly import MarkedPolynomial, build_from_marking, chart, quadratic

__all__ = ["CapdynError", "MarkedPolynomial", "build_from_marking", "chart", "quadratic"]
__version__ = "0.1.0"
