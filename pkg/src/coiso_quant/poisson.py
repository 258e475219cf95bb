"""Bivectors, brackets, coisotropy and the null foliation of a subvariety."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .core.linsolve import LinSystem, solve_linear
from .core.poly import Poly
from .core.ring import LocalIdeal, NotAUnitError, RatFunc, Ring, Verdict, det, mat_inverse
from .diffops import DiffOp
from .errors import InconsistencyError, PreconditionError, SceneError


def _as_rf(f, ring: Ring) -> RatFunc:
    if isinstance(f, RatFunc):
        return f if f.ring == ring else f.to_ring(ring)
    if isinstance(f, Poly):
        return RatFunc(f, 0, ring)
    return ring.poly(f)


class Bivector:
    """Antisymmetric matrix P^{ab} of chart functions."""

    def __init__(self, ring: Ring, matrix: Sequence[Sequence]):
        n = len(ring.vars)
        m = [[_as_rf(matrix[a][b], ring) for b in range(n)] for a in range(n)]
        for a in range(n):
            if not m[a][a].is_zero():
                raise ValueError(f"diagonal entry P^{ring.vars[a]}{ring.vars[a]} must vanish")
            for b in range(a):
                if m[a][b] != -m[b][a]:
                    raise ValueError(f"P is not antisymmetric at ({ring.vars[b]}, {ring.vars[a]})")
        self.ring = ring
        self.matrix = m

    @classmethod
    def from_upper(cls, ring: Ring, upper: Dict[Tuple[int, int], object]) -> "Bivector":
        n = len(ring.vars)
        m = [[ring.zero() for _ in range(n)] for _ in range(n)]
        for (a, b), v in upper.items():
            if a == b:
                raise ValueError("diagonal bivector entries are not allowed")
            v = _as_rf(v, ring)
            if a > b:
                a, b, v = b, a, -v
            m[a][b] = v
            m[b][a] = -v
        return cls(ring, m)

    @classmethod
    def symplectic(cls, ring: Ring, pairs: Sequence[Tuple[str, str]]) -> "Bivector":
        """Standard form with {q, p} = 1 for each (q, p) pair."""
        idx = {v: i for i, v in enumerate(ring.vars)}
        return cls.from_upper(ring, {(idx[q], idx[p]): 1 for q, p in pairs})

    @classmethod
    def zero(cls, ring: Ring) -> "Bivector":
        return cls.from_upper(ring, {})

    def __neg__(self) -> "Bivector":
        return Bivector(self.ring, [[-c for c in row] for row in self.matrix])

    def __eq__(self, other):
        return isinstance(other, Bivector) and self.ring == other.ring and all(
            a == b for ra, rb in zip(self.matrix, other.matrix) for a, b in zip(ra, rb))

    def localize(self, ring: Ring) -> "Bivector":
        return Bivector(ring, [[c.to_ring(ring) for c in row] for row in self.matrix])

    def entry(self, a: int, b: int) -> RatFunc:
        return self.matrix[a][b]

    def upper(self) -> Dict[str, str]:
        v = self.ring.vars
        return {f"{v[a]},{v[b]}": str(self.matrix[a][b])
                for a in range(len(v)) for b in range(a + 1, len(v)) if not self.matrix[a][b].is_zero()}

    def determinant(self) -> RatFunc:
        return det(self.matrix)

    def bracket(self, f, g) -> RatFunc:
        return bracket(f, g, self)

    def hamiltonian(self, f) -> "VectorField":
        """The vector field {f, .}."""
        f = _as_rf(f, self.ring)
        n = len(self.ring.vars)
        df = [f.diff(a) for a in range(n)]
        comps = []
        for b in range(n):
            c = self.ring.zero()
            for a in range(n):
                if not df[a].is_zero() and not self.matrix[a][b].is_zero():
                    c = c + df[a] * self.matrix[a][b]
            comps.append(c)
        return VectorField(self.ring, comps)


def bracket(f, g, P: Bivector) -> RatFunc:
    """{f,g} = sum_{a<b} P^{ab} (d_a f d_b g - d_b f d_a g)."""
    ring = P.ring
    f, g = _as_rf(f, ring), _as_rf(g, ring)
    n = len(ring.vars)
    df = [f.diff(a) for a in range(n)]
    dg = [g.diff(a) for a in range(n)]
    out = ring.zero()
    for a in range(n):
        for b in range(a + 1, n):
            p = P.matrix[a][b]
            if p.is_zero():
                continue
            t = df[a] * dg[b] - df[b] * dg[a]
            if not t.is_zero():
                out = out + p * t
    return out


def jacobi_defect(P: Bivector) -> Dict[Tuple[str, str, str], RatFunc]:
    """Jacobiator {a,{b,c}} + {b,{c,a}} + {c,{a,b}} for every coordinate triple a<b<c."""
    ring = P.ring
    coords = [ring.var(v) for v in ring.vars]
    out = {}
    for a, b, c in itertools.combinations(range(len(coords)), 3):
        x, y, z = coords[a], coords[b], coords[c]
        j = bracket(x, P.matrix[b][c], P) + bracket(y, P.matrix[c][a], P) + bracket(z, P.matrix[a][b], P)
        out[(ring.vars[a], ring.vars[b], ring.vars[c])] = j
    return out


def is_poisson(P: Bivector) -> bool:
    return all(j.is_zero() for j in jacobi_defect(P).values())


def nondegenerate(P: Bivector, ring: Optional[Ring] = None) -> bool:
    """Is det(P) a unit of the chart ring?"""
    if ring is not None and ring != P.ring:
        P = P.localize(ring)
    if len(P.ring.vars) % 2:
        return False
    return P.determinant().is_unit()


class VectorField:
    def __init__(self, ring: Ring, components: Sequence):
        if len(components) != len(ring.vars):
            raise ValueError("vector field needs one component per chart variable")
        self.ring = ring
        self.components = tuple(_as_rf(c, ring) for c in components)

    def apply(self, f) -> RatFunc:
        f = _as_rf(f, self.ring)
        out = self.ring.zero()
        for i, c in enumerate(self.components):
            if not c.is_zero():
                d = f.diff(i)
                if not d.is_zero():
                    out = out + c * d
        return out

    __call__ = apply

    def bracket(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ring, [self.apply(b) - other.apply(a)
                                       for a, b in zip(self.components, other.components)])

    def __add__(self, other):
        return VectorField(self.ring, [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.ring, [-a for a in self.components])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "VectorField":
        return VectorField(self.ring, [a * f for a in self.components])

    def reduce(self, ideal: LocalIdeal) -> "VectorField":
        return VectorField(self.ring, [ideal.normal_form(c) for c in self.components])

    def as_diffop(self) -> DiffOp:
        return DiffOp.from_components(self.ring, self.components)

    def localize(self, ring: Ring) -> "VectorField":
        return VectorField(ring, [c.to_ring(ring) for c in self.components])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.ring == other.ring and all(
            a == b for a, b in zip(self.components, other.components))

    def to_json(self):
        return {v: str(c) for v, c in zip(self.ring.vars, self.components) if not c.is_zero()}

    def __str__(self):
        terms = [f"({c})*d{v}" for v, c in zip(self.ring.vars, self.components) if not c.is_zero()]
        return " + ".join(terms) or "0"

    __repr__ = __str__


class SubvarietyChart:
    """Y = V(x_1..x_r) on a chart, with complementary coordinates y_1..y_m.

    The adapted coordinates are u = (x, y); ``W[k]`` is the field d/du_k
    written in the ambient variables.
    """

    def __init__(self, ring: Ring, x: Sequence, y: Optional[Sequence] = None, saturation_bound: int = 10,
                 chart: str = "0"):
        self.ring = ring
        self.chart = chart
        self.x = [_as_rf(f, ring) for f in x]
        self.y = None if y is None else [_as_rf(f, ring) for f in y]
        self.saturation_bound = saturation_bound
        self.ideal = LocalIdeal(ring, [f.num for f in self.x], saturation_bound)
        self._ideal_sq = [a.num * b.num for a, b in itertools.combinations_with_replacement(self.x, 2)]
        self._ideal_sq_li: Optional[LocalIdeal] = None
        self.jacobian = self.jacobian_inverse = None
        self._W: Optional[List[VectorField]] = None
        if self.y is not None:
            self._build_frame()

    def _build_frame(self):
        ring, chart = self.ring, self.chart
        n = len(ring.vars)
        if len(self.x) + len(self.y) != n:
            raise SceneError(f"chart {chart}: {len(self.x)} generators + {len(self.y)} complements != {n} variables")
        u = self.x + self.y
        self.jacobian = [[f.diff(a) for a in range(n)] for f in u]
        try:
            inv = mat_inverse(self.jacobian)
        except NotAUnitError:
            try:
                inv = mat_inverse(self.jacobian, det_reducer=self.ideal.normal_form)
            except NotAUnitError:
                raise SceneError(f"chart {chart}: Jacobian determinant of the adapted frame is not a unit")
        self.jacobian_inverse = inv
        self._W = [VectorField(ring, [inv[a][k] for a in range(n)]) for k in range(n)]

    def require_frame(self) -> None:
        self.W

    @property
    def has_frame(self) -> bool:
        return self._W is not None

    @property
    def W(self) -> List[VectorField]:
        if self._W is None:
            raise PreconditionError(f"chart {self.chart}: missing adapted frame (complementary coordinates)")
        return self._W

    @property
    def r(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.y) if self.y is not None else len(self.ring.vars) - len(self.x)

    @property
    def ideal_sq(self) -> LocalIdeal:
        if self._ideal_sq_li is None:
            self._ideal_sq_li = LocalIdeal(self.ring, self._ideal_sq, self.saturation_bound)
        return self._ideal_sq_li

    def Wx(self, s: int) -> VectorField:
        return self.W[s]

    def Wy(self, k: int) -> VectorField:
        return self.W[self.r + k]

    def nf(self, f) -> RatFunc:
        return self.ideal.normal_form(_as_rf(f, self.ring))

    def in_ideal(self, f) -> Verdict:
        return self.ideal.membership(_as_rf(f, self.ring))

    def localize(self, ring: Ring) -> "SubvarietyChart":
        y = None if self.y is None else [f.to_ring(ring) for f in self.y]
        return SubvarietyChart(ring, [f.to_ring(ring) for f in self.x], y, self.saturation_bound, self.chart)

    def to_json(self):
        out = {"ideal": [str(f) for f in self.x]}
        if self.y is not None:
            out["complement"] = [str(f) for f in self.y]
        return out


@dataclass
class CoisotropyResult:
    verdict: Verdict
    certificate: Dict[Tuple[int, int], str] = field(default_factory=dict)
    generators: Tuple[str, ...] = ()

    def __bool__(self):
        return self.verdict is Verdict.TRUE

    def to_json(self):
        g = self.generators
        return {
            "verdict": self.verdict.value,
            "brackets": [{"pair": [g[s], g[t]], "normal_form": nf}
                         for (s, t), nf in sorted(self.certificate.items())],
        }


def is_coisotropic(Y: SubvarietyChart, P: Bivector) -> CoisotropyResult:
    """Test {x_s, x_t} in I for every pair of generators.

    By the Leibniz rule this decides {I, I} in I; the certificate is the
    normal form of each generator bracket.
    """
    if P.ring != Y.ring:
        P = P.localize(Y.ring)
    cert = {}
    verdict = Verdict.TRUE
    for s, t in itertools.combinations(range(Y.r), 2):
        b = bracket(Y.x[s], Y.x[t], P)
        v = Y.in_ideal(b)
        cert[(s, t)] = str(Y.nf(b))
        if v is Verdict.FALSE:
            verdict = Verdict.FALSE
        elif v is Verdict.UNDECIDED and verdict is Verdict.TRUE:
            verdict = Verdict.UNDECIDED
    return CoisotropyResult(verdict, cert, tuple(str(f) for f in Y.x))


def require_nondegenerate(P: Bivector, ring: Optional[Ring] = None) -> None:
    if not nondegenerate(P, ring):
        raise PreconditionError("unsupported: requires a nondegenerate Poisson bivector on the chart")


def null_frame(Y: SubvarietyChart, P: Bivector) -> List[VectorField]:
    """v_s = P(dx_s, .) reduced mod I; each v_s is checked tangent to Y."""
    if P.ring != Y.ring:
        P = P.localize(Y.ring)
    require_nondegenerate(P)
    if not is_coisotropic(Y, P):
        raise PreconditionError("requires Y coisotropic for the bivector")
    frame = []
    for s, xs in enumerate(Y.x):
        v = P.hamiltonian(xs).reduce(Y.ideal)
        for t, xt in enumerate(Y.x):
            if Y.in_ideal(v.apply(xt)) is not Verdict.TRUE:
                raise InconsistencyError(f"null frame vector {s} is not tangent: v(x_{t}) = {Y.nf(v.apply(xt))}")
        frame.append(v)
    return frame


def adapted_components(v: VectorField, Y: SubvarietyChart) -> List[RatFunc]:
    """Components of v in the adapted coordinates (x, y), reduced mod I."""
    Y.require_frame()
    return [Y.nf(v.apply(u)) for u in Y.x + Y.y]


@dataclass
class InvolutivityResult:
    verdict: Verdict
    coefficients: Dict[Tuple[int, int], List[RatFunc]] = field(default_factory=dict)
    degree_bound: int = 6

    def __bool__(self):
        return self.verdict is Verdict.TRUE

    def structure(self, s: int, t: int) -> List[RatFunc]:
        """C^u_{st} with [v_s, v_t] = sum_u C^u_{st} v_u mod I."""
        if s == t:
            return None
        if s < t:
            return self.coefficients[(s, t)]
        return [-c for c in self.coefficients[(t, s)]]

    def to_json(self):
        return {
            "verdict": self.verdict.value,
            "degree_bound": self.degree_bound,
            "coefficients": {f"{s},{t}": [str(c) for c in cs] for (s, t), cs in sorted(self.coefficients.items())},
        }


def involutive(frame: Sequence[VectorField], Y: SubvarietyChart, degree: int = 6) -> InvolutivityResult:
    """Solve [v_s, v_t] = sum_u c_u v_u mod I with polynomial ansatz of degree <= ``degree``."""
    ring = Y.ring
    r = len(frame)
    coeffs = {}
    verdict = Verdict.TRUE
    zero = [ring.zero()] * r
    for s, t in itertools.combinations(range(r), 2):
        w = frame[s].bracket(frame[t])
        if all(Y.in_ideal(c) is Verdict.TRUE for c in w.components):
            coeffs[(s, t)] = list(zero)
            continue
        sol = _solve_combination(w, frame, Y, degree)
        if sol is None:
            verdict = Verdict.UNDECIDED
        else:
            coeffs[(s, t)] = sol
    return InvolutivityResult(verdict, coeffs, degree)


def _solve_combination(w: VectorField, frame: Sequence[VectorField], Y: SubvarietyChart, degree: int):
    ring = Y.ring
    li = Y.ideal
    K = max([c.k for c in w.components] + [0])
    monos = li.standard_monomials(degree)
    sys = LinSystem()
    # one row per (ambient component, monomial) of NF(h^k * (w_b - sum c_u v_u,b))
    for u, v in enumerate(frame):
        for e in monos:
            sys.add_unknown((u, e))
    rows: Dict[Tuple[int, Tuple], Dict] = {}
    rhs: Dict[Tuple[int, Tuple], object] = {}
    for b in range(len(ring.vars)):
        kmax = max([K] + [v.components[b].k for v in frame])
        target = w.components[b]
        t_num = li.reduce_poly(target.num * ring.h ** (kmax - target.k))
        for e, c in t_num.terms.items():
            rhs[(b, e)] = c
            rows.setdefault((b, e), {})
        for u, v in enumerate(frame):
            vb = v.components[b]
            if vb.is_zero():
                continue
            base = vb.num * ring.h ** (kmax - vb.k)
            for m in monos:
                nf = li.reduce_poly(base.mul_term(m, 1))
                for e, c in nf.terms.items():
                    rows.setdefault((b, e), {})[(u, m)] = c
    for key, row in sorted(rows.items()):
        sys.add_row(row, rhs.get(key, 0))
    res = solve_linear(sys)
    if not res.feasible:
        return None
    out = []
    for u in range(len(frame)):
        num = Poly(ring.vars, {m: res.values[(u, m)] for m in monos if res.values[(u, m)]})
        out.append(Y.nf(RatFunc(num, 0, ring)))
    # confirm exactly
    combo = VectorField(ring, [ring.zero()] * len(ring.vars))
    for c, v in zip(out, frame):
        combo = combo + v.scale(c)
    if not all(Y.in_ideal(a) is Verdict.TRUE for a in (w - combo).components):
        return None
    return out
