"""Operators along the null foliation: the splitting gamma, its involution,
bracket compatibility and partial connections on Hom and tensor bundles.

A chart-level ``PartialConnection`` stores, for every null-frame vector
v_s = {x_s, .}, the first-order operator D_s = v_s + c_s on L, together with
a twist tau fixing how gamma extends off the frame:

    gamma(a v_s) = a D_s + tau v_s(a).

Splittings gamma: T_F -> At_n(L) coming from module structures have
tau = 1/2; honest partial connections have tau = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core.parse import parse_poly
from .core.poly import Poly, monomials_up_to
from .core.ring import RatFunc, Verdict
from .deformation import HALF, ModuleStructure, check_module_structure
from .diffops import DiffOp, coefficient_zero, fix_slot
from .errors import InconsistencyError, PreconditionError
from .poisson import Bivector, SubvarietyChart, VectorField, involutive, is_poisson, null_frame, require_nondegenerate


@dataclass
class PartialConnection:
    chart: SubvarietyChart
    P: Bivector
    frame: List[VectorField]
    terms: List[RatFunc]
    twist: Fraction = Fraction(0)
    bundle: str = "L"

    def __post_init__(self):
        if len(self.terms) != len(self.frame):
            raise ValueError("one connection term per frame vector")
        self.terms = [self.chart.nf(c) for c in self.terms]
        self.twist = Fraction(self.twist)

    @property
    def ring(self):
        return self.chart.ring

    @property
    def rank(self) -> int:
        return len(self.frame)

    def operator(self, s: int) -> DiffOp:
        """D_s = v_s + c_s."""
        return self.frame[s].as_diffop() + DiffOp.multiplication(self.terms[s])

    def along(self, coeffs: Sequence[RatFunc]) -> DiffOp:
        """gamma(sum_s a_s v_s) as an operator."""
        ring = self.ring
        op = DiffOp(ring)
        extra = ring.zero()
        for s, a in enumerate(coeffs):
            if a.is_zero():
                continue
            op = op + DiffOp.multiplication(a).compose(self.operator(s))
            extra = extra + self.frame[s].apply(a)
        if self.twist:
            op = op + DiffOp.multiplication(extra * self.twist)
        return op

    def act(self, f: RatFunc, b: RatFunc) -> RatFunc:
        """gamma(f, b) for f in I, through f = sum_s W_{x_s}(f) x_s mod I^2."""
        Y = self.chart
        coeffs = [Y.nf(Y.Wx(s).apply(f)) for s in range(Y.r)]
        return Y.nf(self.along(coeffs).apply(b))

    def shifted(self, delta: Sequence[RatFunc]) -> "PartialConnection":
        return PartialConnection(self.chart, self.P, self.frame, [c + d for c, d in zip(self.terms, delta)],
                                 self.twist, self.bundle)

    def equals(self, other: "PartialConnection") -> bool:
        return self.twist == other.twist and all(
            self.chart.in_ideal(a - b) is Verdict.TRUE for a, b in zip(self.terms, other.terms))

    def to_json(self):
        return {
            "bundle": self.bundle,
            "twist": str(self.twist),
            "frame": [v.to_json() for v in self.frame],
            "terms": [str(c) for c in self.terms],
        }


def _monomials(Y: SubvarietyChart, degree: int) -> List[RatFunc]:
    ring = Y.ring
    return [RatFunc(Poly.monomial(e, ring.vars), 0, ring) for e in monomials_up_to(len(ring.vars), degree)]


def connection(Y: SubvarietyChart, P: Bivector, terms: Sequence, twist=0, bundle: str = "L") -> PartialConnection:
    if P.ring != Y.ring:
        P = P.localize(Y.ring)
    frame = null_frame(Y, P)
    ring = Y.ring
    terms = [t if isinstance(t, RatFunc) else ring.poly(parse_poly(str(t), ring.vars)) for t in terms]
    return PartialConnection(Y, P, frame, terms, Fraction(twist), bundle)


def extract_gamma(ms: ModuleStructure, degree: int = 2) -> PartialConnection:
    """gamma(x_s, l) = alpha_L(x_s, l) read as D_s = v_s + c_s, tau = 1/2.

    Both defining identities are re-checked against alpha_L itself on
    monomials a, l of degree <= ``degree``.
    """
    Y, P = ms.chart, ms.P
    require_nondegenerate(P)
    if not check_module_structure(ms)["defect_zero"]:
        raise PreconditionError("requires a module structure (module defect is nonzero)")
    frame = null_frame(Y, P)
    one = ms.ring.one()
    terms = [ms.act(x, one) for x in Y.x]
    g = PartialConnection(Y, P, frame, terms, HALF)
    for s, x in enumerate(Y.x):
        diff = fix_slot(ms.alpha_L, 0, x) - g.operator(s)
        if not coefficient_zero(diff, Y.ideal):
            raise InconsistencyError(f"alpha_L(x_{s}, .) is not v_{s} + c_{s} modulo I")
    monos = _monomials(Y, degree)
    for s, x in enumerate(Y.x):
        v = frame[s]
        for a in monos:
            for l in monos:
                one_null = ms.act(a * x, l) - a * ms.act(x, l) - v.apply(a) * l * HALF
                two_null = ms.act(x, a * l) - a * ms.act(x, l) - v.apply(a) * l
                for name, val in (("gamma-one", one_null), ("gamma-two", two_null)):
                    if Y.in_ideal(val) is not Verdict.TRUE:
                        raise InconsistencyError(f"{name} identity fails for s={s}, a={a}, l={l}: {Y.nf(val)}")
    return g


def gamma_identities(g: PartialConnection, degree: int = 2) -> Dict[str, object]:
    """gamma(a x, l) - a gamma(x, l) = x(a) l / 2 and gamma(x, a l) - a gamma(x, l) = x(a) l,
    evaluated through ``act`` on monomials; the first failing triple is reported."""
    Y = g.chart
    monos = _monomials(Y, degree)
    out: Dict[str, object] = {"gamma_one": True, "gamma_two": True}
    for s, x in enumerate(Y.x):
        v = g.frame[s]
        for a in monos:
            for l in monos:
                base = a * g.act(x, l)
                if out["gamma_one"] and Y.in_ideal(g.act(a * x, l) - base - v.apply(a) * l * HALF) is not Verdict.TRUE:
                    out["gamma_one"] = False
                    out["gamma_one_failure"] = {"s": s, "a": str(a), "l": str(l)}
                if out["gamma_two"] and Y.in_ideal(g.act(x, a * l) - base - v.apply(a) * l) is not Verdict.TRUE:
                    out["gamma_two"] = False
                    out["gamma_two_failure"] = {"s": s, "a": str(a), "l": str(l)}
    return out


# -- the anti-involution ---------------------------------------------------------

@dataclass
class Involution:
    """* on At_n(L) written in the basis f + sum_s g_s D_s:

        (f, g) -> (f - 2 tau sum_s v_s(g_s), -g)

    i.e. +1 on functions and -1 on the image of gamma."""

    gamma: PartialConnection

    def apply(self, f: RatFunc, g: Sequence[RatFunc]) -> Tuple[RatFunc, List[RatFunc]]:
        gm = self.gamma
        shift = gm.ring.zero()
        for s, gs in enumerate(g):
            shift = shift + gm.frame[s].apply(gs)
        return gm.chart.nf(f - shift * (2 * gm.twist)), [gm.chart.nf(-gs) for gs in g]

    def as_operator(self, f: RatFunc, g: Sequence[RatFunc]) -> DiffOp:
        out = DiffOp.multiplication(f)
        for s, gs in enumerate(g):
            out = out + DiffOp.multiplication(gs).compose(self.gamma.operator(s))
        return out

    def star(self, f: RatFunc, g: Sequence[RatFunc]) -> DiffOp:
        return self.as_operator(*self.apply(f, g))

    def recover(self) -> PartialConnection:
        """The unique gamma with gamma o sigma the projection (d - d*)/2."""
        gm = self.gamma
        Y = gm.chart
        ring = gm.ring
        zero = [ring.zero()] * gm.rank
        terms = []
        twist = None
        for s in range(gm.rank):
            e = list(zero)
            e[s] = ring.one()
            proj = self._project(e)
            terms.append(Y.nf(proj.zeroth()))
            for a in _monomials(Y, 2):
                va = Y.nf(gm.frame[s].apply(a))
                if twist is not None or va.is_zero():
                    continue
                e2 = list(zero)
                e2[s] = a
                extra = Y.nf((self._project(e2) - DiffOp.multiplication(a).compose(proj)).zeroth())
                exp, c = next(iter(va.num.terms.items()))
                cand = Fraction(extra.num.terms.get(exp, 0)) / c
                if extra.k == va.k and Y.in_ideal(extra - va * cand) is Verdict.TRUE:
                    twist = cand
                else:
                    raise InconsistencyError("projection onto the (-1)-eigenspace is not a twisted splitting")
        if twist is None:
            raise PreconditionError("null frame acts trivially on functions; twist is not determined")
        return PartialConnection(gm.chart, gm.P, gm.frame, terms, twist, gm.bundle)

    def _project(self, g: Sequence[RatFunc]) -> DiffOp:
        zero = self.gamma.ring.zero()
        return (self.as_operator(zero, g) - self.star(zero, g)).scale(HALF)


@dataclass
class InvolutionCheck:
    ok: bool
    involution: Optional[Involution]
    failing_pair: Optional[Tuple[int, str]] = None
    defect: Optional[str] = None

    def to_json(self):
        out = {"ok": self.ok}
        if self.failing_pair is not None:
            out["failing_pair"] = {"frame_index": self.failing_pair[0], "f": self.failing_pair[1]}
            out["defect"] = self.defect
        if self.involution is not None:
            out["rule"] = f"(f, g) -> (f - {2 * self.involution.gamma.twist} sum_s v_s(g_s), -g)"
        return out


def star_involution(g: PartialConnection, degree: int = 2) -> InvolutionCheck:
    """Build * and verify (f gamma(v_s))* = gamma(v_s)* f as operators for monomial f."""
    inv = Involution(g)
    Y = g.chart
    ring = g.ring
    zero = [ring.zero()] * g.rank
    for s in range(g.rank):
        e = list(zero)
        e[s] = ring.one()
        right_base = inv.star(ring.zero(), e)
        for f in _monomials(Y, degree):
            fe = list(zero)
            fe[s] = f
            lhs = inv.star(ring.zero(), fe)
            rhs = right_base.compose(DiffOp.multiplication(f))
            diff = (lhs - rhs).reduce(Y.ideal)
            if not diff.is_zero():
                return InvolutionCheck(False, None, (s, str(f)), str(diff.to_json()))
    for s in range(g.rank):
        e = list(zero)
        e[s] = ring.one()
        f1, g1 = inv.apply(*inv.apply(ring.zero(), e))
        if not (f1.is_zero() and all(Y.in_ideal(a - b) is Verdict.TRUE for a, b in zip(g1, e))):
            raise InconsistencyError("* does not square to the identity")
    return InvolutionCheck(True, inv)


# -- brackets and curvature --------------------------------------------------------

@dataclass
class CurvatureForm:
    entries: Dict[Tuple[int, int], RatFunc]
    rank: int
    formula_agrees: bool = True

    def entry(self, s: int, t: int) -> RatFunc:
        if s == t:
            return None
        return self.entries[(s, t)] if s < t else -self.entries[(t, s)]

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.entries.values())

    def to_json(self):
        return {"flat": self.is_zero, "entries": {f"{s},{t}": str(c) for (s, t), c in sorted(self.entries.items())},
                "formula_agrees": self.formula_agrees}


def _require_second_order(g: PartialConnection) -> None:
    if not is_poisson(g.P):
        raise PreconditionError("second-order checks require a Poisson bivector (Jacobi defect is nonzero)")


def bracket_defect(g: PartialConnection) -> CurvatureForm:
    """[gamma(v_s), gamma(v_t)] - gamma([v_s, v_t]), a function on Y for every s < t.

    Computed from operator commutators and checked against
    v_s(c_t) - v_t(c_s) - sum_u C^u c_u - tau sum_u v_u(C^u).
    """
    _require_second_order(g)
    Y = g.chart
    inv = involutive(g.frame, Y)
    if not inv:
        raise PreconditionError(f"null frame involutivity is {inv.verdict.value} at degree {inv.degree_bound}")
    entries = {}
    agrees = True
    zero = (0,) * len(g.ring.vars)
    for s in range(g.rank):
        for t in range(s + 1, g.rank):
            C = inv.structure(s, t)
            op = (g.operator(s).commutator(g.operator(t)) - g.along(C)).reduce(Y.ideal)
            stray = [k for k in op.coeffs if k != (zero,)]
            if stray:
                raise InconsistencyError(f"bracket defect ({s},{t}) is not a multiplication operator")
            val = Y.nf(op.zeroth())
            formula = (g.frame[s].apply(g.terms[t]) - g.frame[t].apply(g.terms[s])
                       - sum((C[u] * g.terms[u] for u in range(g.rank)), g.ring.zero())
                       - sum((g.frame[u].apply(C[u]) for u in range(g.rank)), g.ring.zero()) * g.twist)
            if Y.in_ideal(formula - val) is not Verdict.TRUE:
                agrees = False
            entries[(s, t)] = val
    if not agrees:
        raise InconsistencyError("bracket defect: operator and closed formula disagree")
    return CurvatureForm(entries, g.rank, agrees)


def curvature(gm: PartialConnection) -> CurvatureForm:
    """gamma_M(v_s) gamma_M(v_t) - gamma_M(v_t) gamma_M(v_s) - gamma_M([v_s, v_t])."""
    if gm.twist != 0:
        raise PreconditionError("curvature is defined for partial connections (twist 0); use bracket_defect")
    return bracket_defect(gm)


# -- Hom and tensor ----------------------------------------------------------------

def _same_frame(g1: PartialConnection, g2: PartialConnection) -> None:
    if g1.ring != g2.ring or len(g1.frame) != len(g2.frame) or any(a != b for a, b in zip(g1.frame, g2.frame)):
        raise PreconditionError("connections must share a chart and a null frame")


def gamma_M(g1: PartialConnection, g2: PartialConnection, degree: int = 2) -> PartialConnection:
    """On M = Hom(L1, L2) trivialized by e2 (x) e1^*:

        gamma_M(v, phi)(l1) = gamma_2(v, phi(l1)) - phi(gamma_1(v, l1)).

    The operator m -> gamma_M(v_s, m phi_0)(e_1) is read off as D2_s - c1_s and
    then verified to be O_Y-linear in l1 and to satisfy the Leibniz rule.
    """
    _same_frame(g1, g2)
    Y = g1.chart
    ring = g1.ring
    ops = [g2.operator(s) - DiffOp.multiplication(g1.terms[s]) for s in range(g1.rank)]
    terms = [Y.nf(op.zeroth()) for op in ops]
    gm = PartialConnection(Y, g1.P, g1.frame, terms, g2.twist - g1.twist, f"Hom({g1.bundle}, {g2.bundle})")
    monos = _monomials(Y, degree)
    for s in range(g1.rank):
        for m in monos:
            for b in monos:
                # gamma_M(v_s, m phi_0)(b e_1) = (gamma_M(v_s, m phi_0)(e_1)) b
                lhs = g2.operator(s).apply(m * b) - m * g1.operator(s).apply(b)
                if Y.in_ideal(lhs - ops[s].apply(m) * b) is not Verdict.TRUE:
                    raise InconsistencyError("gamma_M is not O_Y-linear in l1")
            for f in monos:
                leib = gm.operator(s).apply(f * m) - f * gm.operator(s).apply(m) - g1.frame[s].apply(f) * m
                if Y.in_ideal(leib) is not Verdict.TRUE:
                    raise InconsistencyError("gamma_M fails the Leibniz rule")
    return gm


def twist(gm: PartialConnection, g1: PartialConnection, degree: int = 2) -> PartialConnection:
    """gamma_2(v, m (x) l1) = gamma_M(v, m) (x) l1 + m (x) gamma_1(v, l1) on M (x) L1."""
    _same_frame(gm, g1)
    Y = g1.chart
    g2 = PartialConnection(Y, g1.P, g1.frame, [a + b for a, b in zip(gm.terms, g1.terms)],
                           gm.twist + g1.twist, f"{gm.bundle} (x) {g1.bundle}")
    monos = _monomials(Y, degree)
    for s in range(g1.rank):
        for m in monos:
            for a in monos:
                for b in (g1.ring.one(),) + tuple(monos[:3]):
                    # m (x) a b against m a (x) b, and agreement with the product formula
                    left = gm.operator(s).apply(m) * a * b + m * g1.operator(s).apply(a * b)
                    right = gm.operator(s).apply(m * a) * b + m * a * g1.operator(s).apply(b)
                    if Y.in_ideal(left - right) is not Verdict.TRUE:
                        raise InconsistencyError("gamma_2 is not well defined on M (x) L1")
                    if Y.in_ideal(left - g2.operator(s).apply(m * a * b)) is not Verdict.TRUE:
                        raise InconsistencyError("gamma_2 differs from the tensor formula")
    return g2


# -- scene level -----------------------------------------------------------------

def require_section4(scene) -> None:
    """Nondegenerate P on every chart and kappa restricting to zero (beta(I) in I)."""
    from .obstruction import kappa_tangent

    for ch in scene.charts:
        require_nondegenerate(ch.P)
    if not kappa_tangent(scene):
        raise PreconditionError("requires kappa = 0, or every gluing field preserving I")


def connection_from_spec(scene, spec) -> PartialConnection:
    ch = scene.charts[spec.chart]
    return connection(ch.Y, ch.P, spec.terms, spec.twist, spec.name)


@dataclass
class GlueResult:
    glues: bool
    mismatch: object
    matched: Optional[object] = None

    def to_json(self):
        out = {"glues": self.glues, "mismatch": self.mismatch.to_json()}
        if self.matched is not None:
            out["normalization_change"] = self.matched.to_json()
        return out


def glue_gamma(scene, gammas: Optional[Dict[int, PartialConnection]] = None, bundle: str = "L") -> GlueResult:
    """Overlap agreement of per-chart gammas, as an N-valued mismatch cochain

        m_ij(x_s) = phi^*[gamma_j(psi^* x_s, psi^* B)] Binv - gamma_i(x_s, 1) + beta_ij(x_s).

    A nonzero mismatch that is a coboundary is reported with the change of
    normalization (a 0-cochain of terms) that makes the gammas glue.
    """
    from .cech import CechCochain, coboundary_solve
    from .core.ring import substitute
    from .deformation import build_alpha_L
    from .obstruction import _bundle, _require_bundle

    require_section4(scene)
    cover = scene.cover
    if gammas is None:
        gammas = {ch.index: extract_gamma(build_alpha_L(ch.Y, ch.P)) for ch in scene.charts}
    if not cover.overlaps:
        return GlueResult(True, CechCochain.zero(1, "N", cover))
    _require_bundle(scene, bundle)
    comps = {}
    for (i, j) in cover.simplices(1):
        ov = cover.overlaps[(i, j)]
        ring = ov.ring
        Y = cover.Y(ring)
        tr = scene.transitions[(i, j)]
        B, Binv = _bundle(tr, bundle)
        gj = gammas[j]
        gj_loc = _localized(gj, cover.Y(ov.back_ring))
        gi_loc = _localized(gammas[i], Y)
        Bj = substitute(B, ov.back, ov.back_ring)
        out = []
        for xs in Y.x:
            xj = substitute(xs, ov.back, ov.back_ring)
            acc = cover.pull(gj_loc.act(xj, Bj), i, j, ring) * Binv - gi_loc.act(xs, ring.one())
            if tr.beta is not None:
                acc = acc + tr.beta.apply(xs)
            out.append(Y.nf(acc))
        comps[(i, j)] = out
    mismatch = CechCochain(1, "N", comps, cover)
    if mismatch.is_zero():
        return GlueResult(True, mismatch)
    res = coboundary_solve(mismatch, scene, check_cocycle=False)
    return GlueResult(False, mismatch, res.witness if res.coboundary else None)


def _localized(g: PartialConnection, Y: SubvarietyChart) -> PartialConnection:
    if Y.ring == g.ring:
        return g
    return PartialConnection(Y, g.P.localize(Y.ring), [v.localize(Y.ring) for v in g.frame],
                             [c.to_ring(Y.ring) for c in g.terms], g.twist, g.bundle)
