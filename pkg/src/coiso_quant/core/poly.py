"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple, Union

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]

MONOMIAL_ORDERS = ("lex", "grlex", "grevlex", "elim1")


class UnsupportedOrderError(ValueError):
    pass


def order_key(order: str) -> Callable[[Exponent], tuple]:
    """Sort key for exponent vectors; larger key means larger monomial.

    ``elim1`` is a block order eliminating the first variable, with grevlex
    on the remaining ones.
    """
    if order == "lex":
        return lambda e: e
    if order == "grlex":
        return lambda e: (sum(e), e)
    if order == "grevlex":
        return lambda e: (sum(e), tuple(-x for x in reversed(e)))
    if order == "elim1":
        return lambda e: (e[0], sum(e[1:]), tuple(-x for x in reversed(e[1:])))
    raise UnsupportedOrderError(f"unsupported monomial order {order!r}")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"inexact coefficient {c!r}; only int and Fraction are allowed")


class Poly:
    """Immutable sparse polynomial over Q in an ordered list of variables."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exponent, Scalar] | None = None):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match variables {self.vars}")
                c = _as_fraction(c)
                if c:
                    clean[tuple(e)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, vars: tuple, terms: Dict[Exponent, Fraction]) -> "Poly":
        # trusted constructor: no zero coefficients, tuple exponents
        p = object.__new__(cls)
        p.vars = vars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Scalar, vars: Sequence[str]) -> "Poly":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "Poly":
        return cls._raw(tuple(vars), {})

    @classmethod
    def one(cls, vars: Sequence[str]) -> "Poly":
        return cls.constant(1, vars)

    @classmethod
    def variable(cls, name: Union[str, int], vars: Sequence[str]) -> "Poly":
        vars = tuple(vars)
        i = vars.index(name) if isinstance(name, str) else name
        e = [0] * len(vars)
        e[i] = 1
        return cls._raw(vars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Exponent, vars: Sequence[str], coeff: Scalar = 1) -> "Poly":
        return cls(tuple(vars), {tuple(exp): coeff})

    def gens(self):
        return [Poly.variable(i, self.vars) for i in range(len(self.vars))]

    # -- inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def leading(self, order: str = "grevlex") -> Tuple[Exponent, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = order_key(order)
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def sorted_terms(self, order: str = "grevlex"):
        key = order_key(order)
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other, self.vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = c
            else:
                s += c
                if s:
                    t[e] = s
                else:
                    del t[e]
        return Poly._raw(self.vars, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c0 = _as_fraction(other)
            if not c0:
                return Poly.zero(self.vars)
            return Poly._raw(self.vars, {e: c * c0 for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = t.get(e, 0) + c1 * c2
                if s:
                    t[e] = s
                else:
                    t.pop(e, None)
        return Poly._raw(self.vars, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _as_fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Poly.one(self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_term(self, exp: Exponent, coeff: Fraction) -> "Poly":
        if not coeff:
            return Poly.zero(self.vars)
        return Poly._raw(
            self.vars,
            {tuple(a + b for a, b in zip(e, exp)): c * coeff for e, c in self.terms.items()},
        )

    # -- calculus and substitution -----------------------------------------
    def diff(self, var: Union[int, str]) -> "Poly":
        i = self.vars.index(var) if isinstance(var, str) else var
        t = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = list(e)
                e2[i] = k - 1
                t[tuple(e2)] = c * k
        return Poly._raw(self.vars, t)

    def diff_multi(self, mu: Exponent) -> "Poly":
        """Apply the partial derivative with multi-index ``mu``."""
        t = {}
        for e, c in self.terms.items():
            f = c
            e2 = []
            for a, m in zip(e, mu):
                if a < m:
                    f = 0
                    break
                for j in range(m):
                    f *= a - j
                e2.append(a - m)
            if f:
                e2 = tuple(e2)
                t[e2] = t.get(e2, 0) + f
        return Poly(self.vars, t)

    def subs(self, images: Sequence["Poly"]) -> "Poly":
        """Compose: replace variable i by ``images[i]`` (all in one target ring)."""
        if len(images) != len(self.vars):
            raise ValueError("need one image per variable")
        target = images[0].vars if images else ()
        result = Poly.zero(target)
        powers: Dict[Tuple[int, int], Poly] = {}
        for e, c in self.terms.items():
            term = Poly.constant(c, target)
            for i, k in enumerate(e):
                if k:
                    p = powers.get((i, k))
                    if p is None:
                        p = images[i] ** k
                        powers[(i, k)] = p
                    term = term * p
            result = result + term
        return result

    def extend(self, new_vars: Sequence[str]) -> "Poly":
        """Embed into a ring whose variable list contains this one's."""
        new_vars = tuple(new_vars)
        idx = [new_vars.index(v) for v in self.vars]
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * len(new_vars)
            for i, k in zip(idx, e):
                e2[i] = k
            t[tuple(e2)] = c
        return Poly._raw(new_vars, t)

    def restrict(self, new_vars: Sequence[str]) -> "Poly":
        """Drop variables that do not occur; raises if a dropped one occurs."""
        new_vars = tuple(new_vars)
        idx = [self.vars.index(v) for v in new_vars]
        dropped = [i for i in range(len(self.vars)) if i not in idx]
        t = {}
        for e, c in self.terms.items():
            if any(e[i] for i in dropped):
                raise ValueError("polynomial involves a dropped variable")
            t[tuple(e[i] for i in idx)] = c
        return Poly._raw(new_vars, t)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        total = Fraction(0)
        vals = [_as_fraction(point[v]) for v in self.vars]
        for e, c in self.terms.items():
            m = c
            for v, k in zip(vals, e):
                if k:
                    m *= v ** k
            total += m
        return total

    def monic(self, order: str = "grevlex") -> "Poly":
        if not self.terms:
            return self
        return self / self.leading(order)[1]

    # -- comparison, hashing, printing -------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(other, self.vars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms("grevlex"):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r}, vars={self.vars})"


def monomials_up_to(nvars: int, degree: int) -> Iterable[Exponent]:
    """All exponent vectors of total degree <= ``degree``, graded then lex."""
    def rec(prefix, remaining, left):
        if left == 0:
            yield tuple(prefix)
            return
        for k in range(remaining + 1):
            yield from rec(prefix + [k], remaining - k, left - 1)

    out = list(rec([], degree, nvars))
    out.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    return out


def multi_binomial(mu: Exponent, lam: Exponent) -> int:
    r = 1
    for m, l in zip(mu, lam):
        r *= comb(m, l)
    return r


def sub_multi_indices(mu: Exponent) -> Iterable[Exponent]:
    """All lambda <= mu componentwise."""
    def rec(i):
        if i == len(mu):
            yield ()
            return
        for k in range(mu[i] + 1):
            for rest in rec(i + 1):
                yield (k,) + rest

    return rec(0)
