"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Sequence

import sympy

from coiso_quant.core.poly import Poly, monomials_up_to
from coiso_quant.core.ring import RatFunc, Ring
from coiso_quant.diffops import DiffOp
from coiso_quant.poisson import SubvarietyChart
from coiso_quant.scenes import load_bundled

P1_DEGREES = list(range(-3, 4))


def p1_scene(d: int):
    return load_bundled(f"p1-in-t-star-p1-O({d})")


def random_poly(rng: random.Random, vars: Sequence[str], degree: int, terms: int = 4, bound: int = 3) -> Poly:
    exps = list(monomials_up_to(len(vars), degree))
    out = {}
    for _ in range(terms):
        e = rng.choice(exps)
        out[e] = out.get(e, 0) + rng.randint(-bound, bound)
    return Poly(vars, out)


def random_rf(rng: random.Random, ring: Ring, degree: int = 3, terms: int = 4, kmax: int = 0) -> RatFunc:
    return RatFunc(random_poly(rng, ring.vars, degree, terms), rng.randint(0, kmax), ring)


def _in_complement(rng: random.Random, Y: SubvarietyChart, degree: int) -> RatFunc:
    """A random polynomial in the complementary coordinates y."""
    ring = Y.ring
    acc = ring.zero()
    for e in monomials_up_to(Y.m, degree):
        c = rng.randint(-2, 2)
        if not c:
            continue
        t = ring.poly(c)
        for y, k in zip(Y.y, e):
            for _ in range(k):
                t = t * y
        acc = acc + t
    return acc


def tangent_gauge(rng: random.Random, Y: SubvarietyChart, order: int = 2, constant: bool = False) -> DiffOp:
    """sum_mu c_mu(y) W_y^mu with 1 <= |mu| <= order, plus optionally c_0(y).

    Operators along Y map I to I, so they act on L = O_Y e.  Without the
    constant term beta(1) = 0.
    """
    ring = Y.ring
    fields = [Y.Wy(k).as_diffop() for k in range(Y.m)]
    op = DiffOp(ring)
    for mu in monomials_up_to(Y.m, order):
        if not any(mu) and not constant:
            continue
        term = DiffOp.multiplication(_in_complement(rng, Y, 2))
        for k, e in enumerate(mu):
            for _ in range(e):
                term = term.compose(fields[k])
        op = op + term
    return op


def monomial_basis(ring: Ring, degree: int) -> List[RatFunc]:
    return [RatFunc(Poly.monomial(e, ring.vars), 0, ring) for e in monomials_up_to(len(ring.vars), degree)]


# -- P^1 Laurent cochains and a dense brute-force coboundary oracle -----------------

def random_laurent(rng: random.Random, lo: int = -4, hi: int = 4, terms: int = 3) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for _ in range(terms):
        e = rng.randint(lo, hi)
        out[e] = out.get(e, Fraction(0)) + rng.randint(-3, 3)
    return {e: c for e, c in out.items() if c}


def laurent_to_rf(coeffs: Dict[int, Fraction], ring: Ring, var: int = 0) -> RatFunc:
    """sum c_e z^e on a ring whose denominator is the variable z itself."""
    k = max([0] + [-e for e in coeffs])
    n = len(ring.vars)
    terms = {}
    for e, c in coeffs.items():
        exp = [0] * n
        exp[var] = e + k
        terms[tuple(exp)] = c
    return RatFunc(Poly(ring.vars, terms), k, ring)


def dense_coboundary_oracle(coeffs: Dict[int, Fraction], tag: str, D: int) -> bool:
    """Is c = f_0(z) - M(z) f_1(1/z) solvable with deg f_0, deg f_1 <= D?

    M = 1 for functions and -z^(-2) for the normal bundle and 1-forms of the
    zero section P^1 in T*P^1.  Every coefficient of both polynomials is an
    unknown; the system is solved by sympy.
    """
    z = sympy.Symbol("z")
    a = sympy.symbols(f"a0:{D + 1}")
    b = sympy.symbols(f"b0:{D + 1}")
    M = sympy.Integer(1) if tag == "functions" else -z ** -2
    c = sum((sympy.Rational(v.numerator, v.denominator) * z ** e for e, v in coeffs.items()), sympy.Integer(0))
    f0 = sum((a[k] * z ** k for k in range(D + 1)), sympy.Integer(0))
    f1 = sum((b[k] * z ** -k for k in range(D + 1)), sympy.Integer(0))
    expr = sympy.expand((f0 - M * f1 - c) * z ** (D + 8))
    eqs = sympy.Poly(expr, z).coeffs()
    sol = sympy.linsolve(eqs, list(a) + list(b))
    return sol != sympy.EmptySet
