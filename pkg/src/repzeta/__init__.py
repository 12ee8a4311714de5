"""Weil-style representation zeta functions over finite fields.

Counts absolutely irreducible representations of profinite group and ring
families over F_{p^j}, assembles the Euler-product zeta series, evaluates
and truncates it with tail bounds, extracts rational local factors,
estimates abscissae of convergence, and verifies the reciprocal
generation-probability identity both exactly and by Monte Carlo.
"""

from . import arith, gf, probgen, repcount, wedderburn, zeta
from .errors import RepzetaError

__version__ = "0.1.0"

__all__ = ["arith", "gf", "repcount", "wedderburn", "zeta", "probgen", "RepzetaError"]
