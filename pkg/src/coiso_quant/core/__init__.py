"""Exact polynomial and rational-function arithmetic over Q."""

from .groebner import GroebnerBudgetExceeded, Ideal, MissingBasisError, divide, groebner, reduce
from .linsolve import Infeasible, LinSystem, Solution, solve_linear
from .parse import ParseError, parse_poly
from .poly import MONOMIAL_ORDERS, Poly, UnsupportedOrderError, monomials_up_to
from .ring import (LocalIdeal, NotAUnitError, RatFunc, Ring, UndecidedError, Verdict, det,
                   mat_inverse, mat_mul, saturate_membership, substitute)
