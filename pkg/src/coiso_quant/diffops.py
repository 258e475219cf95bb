"""Multidifferential operators with coefficients in a chart ring.

An operator with ``n`` slots is a finite sum

    D(f_1, ..., f_n) = sum c_{mu_1..mu_n} * d^{mu_1} f_1 * ... * d^{mu_n} f_n

stored as a map from tuples of multi-indices to :class:`RatFunc`.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .core.poly import Exponent, Poly, monomials_up_to, multi_binomial, sub_multi_indices
from .core.ring import LocalIdeal, RatFunc, Ring, Verdict

Key = Tuple[Exponent, ...]


def _add_idx(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def _sub_idx(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x - y for x, y in zip(a, b))


class MultiDiffOp:
    nslots: int = 0

    def __init__(self, ring: Ring, coeffs: Optional[Dict[Key, RatFunc]] = None, nslots: Optional[int] = None):
        self.ring = ring
        if nslots is not None:
            self.nslots = nslots
        clean: Dict[Key, RatFunc] = {}
        n = len(ring.vars)
        for key, c in (coeffs or {}).items():
            if len(key) != self.nslots or any(len(m) != n for m in key):
                raise ValueError(f"bad multi-index key {key}")
            if not isinstance(c, RatFunc):
                c = RatFunc(c, 0, ring) if isinstance(c, Poly) else ring.poly(c)
            if c.ring != ring:
                c = c.to_ring(ring)
            if not c.is_zero():
                clean[tuple(tuple(m) for m in key)] = c
        self.coeffs = clean

    @property
    def nvars(self) -> int:
        return len(self.ring.vars)

    def _new(self, coeffs) -> "MultiDiffOp":
        return _make(self.ring, coeffs, self.nslots)

    # -- linear structure ----------------------------------------------------
    def __add__(self, other: "MultiDiffOp") -> "MultiDiffOp":
        if other.nslots != self.nslots or other.ring != self.ring:
            raise ValueError("incompatible operators")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return self._new(out)

    def __neg__(self):
        return self._new({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "MultiDiffOp":
        """Multiply every coefficient by a function or scalar."""
        return self._new({k: c * f for k, c in self.coeffs.items()})

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self, slot: int) -> int:
        return max((sum(k[slot]) for k in self.coeffs), default=0)

    def orders(self) -> Tuple[int, ...]:
        return tuple(self.order(s) for s in range(self.nslots))

    def total_order(self) -> int:
        return max((sum(sum(m) for m in k) for k in self.coeffs), default=0)

    # -- evaluation ----------------------------------------------------------
    def apply(self, *args) -> RatFunc:
        if len(args) != self.nslots:
            raise ValueError(f"expected {self.nslots} arguments")
        target = self.ring
        conv = []
        for a in args:
            if isinstance(a, Poly):
                a = RatFunc(a, 0, self.ring)
            elif isinstance(a, (int, Fraction)):
                a = self.ring.poly(a)
            conv.append(a)
        rings = {a.ring for a in conv}
        if len(rings) > 1:
            raise ValueError("arguments live in different rings")
        target = conv[0].ring if conv else self.ring
        if target.vars != self.ring.vars:
            raise ValueError("arguments use different chart variables")
        cache: List[Dict[Exponent, RatFunc]] = [dict() for _ in conv]
        out = target.zero()
        for key, c in self.coeffs.items():
            term = c if target == self.ring else c.to_ring(target)
            for s, mu in enumerate(key):
                d = cache[s].get(mu)
                if d is None:
                    d = conv[s].diff_multi(mu)
                    cache[s][mu] = d
                if d.is_zero():
                    term = None
                    break
                term = term * d
            if term is not None:
                out = out + term
        return out

    __call__ = apply

    def apply_monomials(self, exps: Sequence[Exponent]) -> Tuple[Dict[int, Poly]]:
        """Fast evaluation on monomial arguments; returns ``{k: numerator}``
        with the value equal to sum numerator / h**k."""
        acc: Dict[int, Dict[Exponent, Fraction]] = {}
        for key, c in self.coeffs.items():
            shift = None
            factor = Fraction(1)
            for mu, e in zip(key, exps):
                f = 1
                for a, m in zip(e, mu):
                    if a < m:
                        f = 0
                        break
                    for j in range(m):
                        f *= a - j
                if not f:
                    factor = 0
                    break
                factor *= f
                d = _sub_idx(e, mu)
                shift = d if shift is None else _add_idx(shift, d)
            if not factor:
                continue
            bucket = acc.setdefault(c.k, {})
            for te, tc in c.num.terms.items():
                t = _add_idx(te, shift)
                s = bucket.get(t, 0) + tc * factor
                if s:
                    bucket[t] = s
                else:
                    bucket.pop(t, None)
        return {k: Poly._raw(self.ring.vars, t) for k, t in acc.items() if t}

    def value_on_monomials(self, exps: Sequence[Exponent]) -> RatFunc:
        out = self.ring.zero()
        for k, num in self.apply_monomials(exps).items():
            out = out + RatFunc(num, k, self.ring)
        return out

    # -- reduction modulo an ideal -------------------------------------------
    def reduce(self, ideal: LocalIdeal) -> "MultiDiffOp":
        return self._new({k: ideal.normal_form(c) for k, c in self.coeffs.items()})

    def nonzero_mod(self, ideal: LocalIdeal) -> Dict[Key, RatFunc]:
        """Coefficients not in the ideal (the coefficient-wise zero test)."""
        bad = {}
        for k, c in self.coeffs.items():
            v = ideal.membership(c)
            if v is not Verdict.TRUE:
                bad[k] = ideal.normal_form(c)
        return bad

    def to_json(self):
        names = self.ring.vars

        def idx(mu):
            return "*".join(f"d{v}" if k == 1 else f"d{v}^{k}" for v, k in zip(names, mu) if k) or "1"

        items = sorted(self.coeffs.items(), key=lambda kv: (kv[0]))
        return [[[idx(m) for m in k], str(c)] for k, c in items]

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"


class DiffOp(MultiDiffOp):
    """Single-slot operator sum c_mu d^mu."""

    nslots = 1

    @classmethod
    def multiplication(cls, f: RatFunc) -> "DiffOp":
        ring = f.ring
        return cls(ring, {((0,) * len(ring.vars),): f})

    @classmethod
    def identity(cls, ring: Ring) -> "DiffOp":
        return cls(ring, {((0,) * len(ring.vars),): ring.one()})

    @classmethod
    def partial(cls, ring: Ring, i: int, coeff=None) -> "DiffOp":
        mu = [0] * len(ring.vars)
        mu[i] = 1
        return cls(ring, {(tuple(mu),): coeff if coeff is not None else ring.one()})

    @classmethod
    def from_components(cls, ring: Ring, components: Sequence[RatFunc]) -> "DiffOp":
        n = len(ring.vars)
        coeffs = {}
        for i, c in enumerate(components):
            mu = [0] * n
            mu[i] = 1
            coeffs[(tuple(mu),)] = c
        return cls(ring, coeffs)

    def compose(self, other: "DiffOp") -> "DiffOp":
        """(self o other)(f) = self(other(f))."""
        out: Dict[Key, RatFunc] = {}
        for (mu,), c in self.coeffs.items():
            for (nu,), d in other.coeffs.items():
                for lam in sub_multi_indices(mu):
                    dl = d.diff_multi(lam)
                    if dl.is_zero():
                        continue
                    key = (_add_idx(_sub_idx(mu, lam), nu),)
                    term = c * dl * multi_binomial(mu, lam)
                    out[key] = out[key] + term if key in out else term
        return DiffOp(self.ring, out)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other)

    def commutator(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) - other.compose(self)

    def zeroth(self) -> RatFunc:
        return self.coeffs.get(((0,) * self.nvars,), self.ring.zero())

    def symbol_components(self) -> List[RatFunc]:
        """First-order coefficients c_i of d_i."""
        out = []
        for i in range(self.nvars):
            mu = [0] * self.nvars
            mu[i] = 1
            out.append(self.coeffs.get((tuple(mu),), self.ring.zero()))
        return out


class BiDiffOp(MultiDiffOp):
    nslots = 2


class TriDiffOp(MultiDiffOp):
    nslots = 3


_CLASSES = {1: DiffOp, 2: BiDiffOp, 3: TriDiffOp}


def _make(ring, coeffs, nslots) -> MultiDiffOp:
    cls = _CLASSES.get(nslots)
    if cls is None:
        return MultiDiffOp(ring, coeffs, nslots)
    return cls(ring, coeffs)


def tensor(*ops: DiffOp) -> MultiDiffOp:
    """(f_1, ..., f_n) -> D_1(f_1) * ... * D_n(f_n)."""
    ring = ops[0].ring
    out: Dict[Key, RatFunc] = {}
    for combo in itertools.product(*[list(op.coeffs.items()) for op in ops]):
        key = tuple(k[0] for k, _ in combo)
        c = combo[0][1]
        for _, d in combo[1:]:
            c = c * d
        out[key] = out[key] + c if key in out else c
    return _make(ring, out, len(ops))


def verify_identity(op: MultiDiffOp, ideal: Optional[LocalIdeal] = None, degrees: Optional[Sequence[int]] = None):
    """Decide whether ``op`` vanishes (modulo ``ideal``) by evaluating it on
    every tuple of monomials whose degree in slot s is at most
    ``degrees[s]`` (default: order bound + 1).

    Returns ``(True, None)`` or ``(False, (exponents, value))`` for the first
    failing tuple in enumeration order.
    """
    if degrees is None:
        degrees = [o + 1 for o in op.orders()]
    n = op.nvars
    ring = op.ring
    monos = [monomials_up_to(n, d) for d in degrees]
    # accumulate key by key: only monomials e >= mu contribute to a key
    acc: Dict[Tuple[int, ...], Dict[int, Dict[Exponent, Fraction]]] = {}
    for key, c in op.coeffs.items():
        per_slot = []
        for mu, ms in zip(key, monos):
            lst = []
            for idx, e in enumerate(ms):
                f = 1
                for a, m in zip(e, mu):
                    if a < m:
                        f = 0
                        break
                    for j in range(m):
                        f *= a - j
                if f:
                    lst.append((idx, f, _sub_idx(e, mu)))
            if not lst:
                break
            per_slot.append(lst)
        else:
            for combo in itertools.product(*per_slot):
                tup = tuple(x[0] for x in combo)
                factor = 1
                shift = (0,) * n
                for _, f, d in combo:
                    factor *= f
                    shift = _add_idx(shift, d)
                bucket = acc.setdefault(tup, {}).setdefault(c.k, {})
                for te, tc in c.num.terms.items():
                    t = _add_idx(te, shift)
                    v = bucket.get(t, 0) + tc * factor
                    if v:
                        bucket[t] = v
                    else:
                        bucket.pop(t, None)
    for tup in sorted(acc):
        parts = {k: t for k, t in acc[tup].items() if t}
        if not parts:
            continue
        kmax = max(parts)
        num = Poly.zero(ring.vars)
        for k, t in parts.items():
            p = Poly._raw(ring.vars, t)
            num = num + (p * ring.h ** (kmax - k) if kmax > k else p)
        if num.is_zero():
            continue
        val = RatFunc(num, kmax, ring)
        exps = tuple(monos[s][i] for s, i in enumerate(tup))
        if ideal is None:
            return False, (exps, val)
        if ideal.membership(val) is not Verdict.TRUE:
            return False, (exps, ideal.normal_form(val))
    return True, None


def coefficient_zero(op: MultiDiffOp, ideal: Optional[LocalIdeal] = None) -> bool:
    """Coefficient-wise zero test (the direct route, independent of evaluation)."""
    if ideal is None:
        return op.is_zero()
    return not op.nonzero_mod(ideal)


def split_slot(op: MultiDiffOp, slot: int) -> MultiDiffOp:
    """Operator with one extra slot: (.., f, g, ..) -> op(.., f*g, ..)."""
    out: Dict[Key, RatFunc] = {}
    for key, c in op.coeffs.items():
        mu = key[slot]
        for lam in sub_multi_indices(mu):
            k = key[:slot] + (lam, _sub_idx(mu, lam)) + key[slot + 1:]
            t = c * multi_binomial(mu, lam)
            out[k] = out[k] + t if k in out else t
    return _make(op.ring, out, op.nslots + 1)


def fix_slot(op: MultiDiffOp, slot: int, f: RatFunc) -> MultiDiffOp:
    """Operator with ``slot`` evaluated at the fixed function f."""
    out: Dict[Key, RatFunc] = {}
    cache = {}
    for key, c in op.coeffs.items():
        mu = key[slot]
        d = cache.get(mu)
        if d is None:
            d = cache[mu] = f.diff_multi(mu)
        if d.is_zero():
            continue
        k = key[:slot] + key[slot + 1:]
        out[k] = out[k] + c * d if k in out else c * d
    return _make(op.ring, out, op.nslots - 1)


def premultiply_slot(op: MultiDiffOp, slot: int, f: RatFunc) -> MultiDiffOp:
    """(.., g, ..) -> op(.., f*g, ..)."""
    out: Dict[Key, RatFunc] = {}
    for key, c in op.coeffs.items():
        mu = key[slot]
        for lam in sub_multi_indices(mu):
            d = f.diff_multi(_sub_idx(mu, lam))
            if d.is_zero():
                continue
            k = key[:slot] + (lam,) + key[slot + 1:]
            t = c * d * multi_binomial(mu, lam)
            out[k] = out[k] + t if k in out else t
    return _make(op.ring, out, op.nslots)


def embed(op: MultiDiffOp, nslots: int, slots: Sequence[int]) -> MultiDiffOp:
    """Place op's slots at positions ``slots`` of a wider operator (order 0 elsewhere)."""
    zero = (0,) * op.nvars
    out = {}
    for key, c in op.coeffs.items():
        k = [zero] * nslots
        for s, mu in zip(slots, key):
            k[s] = mu
        out[tuple(k)] = c
    return _make(op.ring, out, nslots)
