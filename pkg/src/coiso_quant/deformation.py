"""Chart-level first-order module structures over a deformed algebra.

On a chart the deformed algebra is O + eps*O with product
f*g = fg + eps*alpha_X(f, g), alpha_X = P/2.  A left module structure on
L + eps*L is a bidifferential operator alpha_L with

    alpha_L(a a', l) - alpha_L(a, a' l) + alpha_X(a, a') l - a alpha_L(a', l) = 0.

``build_alpha_L`` produces one in adapted coordinates u = (x, y), with the
normalization alpha_L(x_s, e) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core.poly import monomials_up_to
from .core.ring import RatFunc, Verdict
from .diffops import (BiDiffOp, DiffOp, MultiDiffOp, TriDiffOp, coefficient_zero, embed, fix_slot,
                      premultiply_slot, split_slot, tensor, verify_identity)
from .errors import InconsistencyError, PreconditionError
from .poisson import Bivector, SubvarietyChart, is_coisotropic

HALF = Fraction(1, 2)


def alpha_X(P: Bivector) -> BiDiffOp:
    """alpha_X(f, g) = P(df, dg) / 2."""
    ring = P.ring
    n = len(ring.vars)
    coeffs = {}
    for a in range(n):
        for b in range(n):
            p = P.matrix[a][b]
            if not p.is_zero():
                mu = [0] * n
                nu = [0] * n
                mu[a] = 1
                nu[b] = 1
                coeffs[(tuple(mu), tuple(nu))] = p * HALF
    return BiDiffOp(ring, coeffs)


def module_defect(aL: BiDiffOp, aX: BiDiffOp) -> TriDiffOp:
    """(a, a', l) -> aL(aa', l) - aL(a, a'l) + aX(a, a')l - a aL(a', l)."""
    return (split_slot(aL, 0) - split_slot(aL, 1) + embed(aX, 3, (0, 1)) - embed(aL, 3, (1, 2)))


def gauge_term(beta: DiffOp) -> BiDiffOp:
    """Hochschild coboundary (a, l) -> a beta(l) - beta(a l)."""
    return embed(beta, 2, (1,)) - split_slot(beta, 0)


@dataclass
class ModuleStructure:
    chart: SubvarietyChart
    P: Bivector
    alpha_X: BiDiffOp
    alpha_L: BiDiffOp
    section: str = "e"
    normalization: str = "alpha_L(x_s, e) = 0"

    @property
    def ring(self):
        return self.chart.ring

    def act(self, a, b) -> RatFunc:
        """alpha_L(a, b*e) as a function mod I."""
        return self.chart.nf(self.alpha_L.apply(a, b))

    def defect(self) -> TriDiffOp:
        return module_defect(self.alpha_L, self.alpha_X).reduce(self.chart.ideal)

    def shifted(self, op: BiDiffOp, tag: str = "shifted") -> "ModuleStructure":
        return ModuleStructure(self.chart, self.P, self.alpha_X, (self.alpha_L + op).reduce(self.chart.ideal),
                               self.section, tag)

    def conormal_restriction(self) -> List[DiffOp]:
        """The operators b -> alpha_L(x_s, b) (the restriction to N^dual (x) L)."""
        return [fix_slot(self.alpha_L, 0, xs).reduce(self.chart.ideal) for xs in self.chart.x]

    def to_json(self):
        return {
            "section": self.section,
            "normalization": self.normalization,
            "alpha_L": self.alpha_L.to_json(),
        }


def _frame_half(P: Bivector, f: RatFunc) -> DiffOp:
    """V = alpha_X(f, .) as a first-order operator."""
    return P.hamiltonian(f).as_diffop().scale(HALF)


def build_alpha_L(Y: SubvarietyChart, P: Bivector, section: str = "e", check: bool = True) -> ModuleStructure:
    """alpha_L(a, b e) = gamma(p(da), b e) + alpha_X(q(da), q(db)) e, with

        gamma(p(da), b e) = sum_s [V_s(W_s a) b + 2 W_s(a) V_s(b)] e,

    where W_k = d/du_k in adapted coordinates, V_s = alpha_X(x_s, .), and
    p, q are the dual-frame projectors onto span(dx) and span(dy).
    """
    if P.ring != Y.ring:
        P = P.localize(Y.ring)
    co = is_coisotropic(Y, P)
    if co.verdict is not Verdict.TRUE:
        raise PreconditionError(f"requires Y coisotropic (verdict {co.verdict.value})")
    Y.require_frame()
    ring = Y.ring
    ident = DiffOp.identity(ring)
    aX = alpha_X(P)
    total = BiDiffOp(ring)
    for s, xs in enumerate(Y.x):
        V = _frame_half(P, xs)
        W = Y.Wx(s).as_diffop()
        total = total + tensor(V.compose(W), ident) + tensor(W, V).scale(2)
    for k, yk in enumerate(Y.y):
        for l, yl in enumerate(Y.y):
            if k == l:
                continue
            c = P.bracket(yk, yl)
            if c.is_zero():
                continue
            total = total + tensor(Y.Wy(k).as_diffop(), Y.Wy(l).as_diffop()).scale(c * HALF)
    ms = ModuleStructure(Y, P, aX, total.reduce(Y.ideal), section)
    if check:
        rep = check_module_structure(ms)
        if not rep["defect_zero"] or not rep["vanishes_on_I2"] or not rep["well_defined_on_L"]:
            raise InconsistencyError(f"constructed alpha_L fails its identities: {rep}")
    return ms


def check_module_structure(ms: ModuleStructure) -> Dict[str, bool]:
    """Coefficient-wise checks of the defining identities."""
    Y = ms.chart
    li = Y.ideal
    defect_zero = coefficient_zero(module_defect(ms.alpha_L, ms.alpha_X), li)
    i2 = all(coefficient_zero(premultiply_slot(ms.alpha_L, 0, a * b), li)
             for i, a in enumerate(Y.x) for b in Y.x[i:])
    wd = all(coefficient_zero(premultiply_slot(ms.alpha_L, 1, xs), li) for xs in Y.x)
    normalized = all(Y.in_ideal(ms.alpha_L.apply(xs, ms.ring.one())) is Verdict.TRUE for xs in Y.x)
    return {"defect_zero": defect_zero, "vanishes_on_I2": i2, "well_defined_on_L": wd,
            "normalized": normalized}


def verify_module_structure(ms: ModuleStructure, degrees: Optional[Sequence[int]] = None) -> Dict[str, object]:
    """Monomial-basis checks (order bound + 1 per slot) of the same identities."""
    Y = ms.chart
    li = Y.ideal
    ok_defect, where = verify_identity(module_defect(ms.alpha_L, ms.alpha_X), li, degrees)
    ok_i2 = True
    for i, a in enumerate(Y.x):
        for b in Y.x[i:]:
            ok, w = verify_identity(premultiply_slot(ms.alpha_L, 0, a * b), li)
            ok_i2 = ok_i2 and ok
    return {"defect_zero": ok_defect, "defect_witness": where, "vanishes_on_I2": ok_i2}


def star_product_check(ms: ModuleStructure, degrees: Optional[Sequence[int]] = None) -> Tuple[bool, Optional[tuple]]:
    """(f*g)*l = f*(g*l) in (L + eps L) mod eps^2 for monomials f, g, l.

    Elements are pairs (x0, x1) meaning x0 + eps x1; the default degree bound
    per slot is the operator order bound of alpha_L (2 for functions, 1 for l).
    """
    Y = ms.chart
    ring = ms.ring
    o1 = max(ms.alpha_L.order(0), ms.alpha_X.order(0), ms.alpha_X.order(1))
    o2 = ms.alpha_L.order(1)
    if degrees is None:
        degrees = (o1, o1, o2)
    n = len(ring.vars)
    aX, aL = ms.alpha_X, ms.alpha_L

    def mono(e):
        return ring.frac(ring.one().num.mul_term(e, 1), 0)

    def alg(u, v, eu, ev):
        return (u[0] * v[0], u[0] * v[1] + u[1] * v[0] + aX.value_on_monomials((eu, ev)))

    def act(u, w, eu, ew):
        return (u[0] * w[0], u[0] * w[1] + u[1] * w[0] + aL.value_on_monomials((eu, ew)))

    for ef in monomials_up_to(n, degrees[0]):
        f = (mono(ef), ring.zero())
        for eg in monomials_up_to(n, degrees[1]):
            g = (mono(eg), ring.zero())
            fg = alg(f, g, ef, eg)
            efg = tuple(a + b for a, b in zip(ef, eg))
            for el in monomials_up_to(n, degrees[2]):
                l = (mono(el), ring.zero())
                egl = tuple(a + b for a, b in zip(eg, el))
                lhs = act(fg, l, efg, el)
                gl = act(g, l, eg, el)
                rhs = act(f, gl, ef, egl)
                diff = lhs[1] - rhs[1]
                if Y.in_ideal(lhs[0] - rhs[0]) is not Verdict.TRUE or Y.in_ideal(diff) is not Verdict.TRUE:
                    return False, (ef, eg, el, str(Y.nf(diff)))
    return True, None


@dataclass
class GaugeEquivalent:
    beta: DiffOp
    equivalent = True

    def to_json(self):
        return {"equivalent": True, "beta": self.beta.to_json()}


@dataclass
class NotEquivalent:
    certificate: Dict[int, list]
    reason: str = "difference does not vanish on the conormal restriction"
    equivalent = False

    def to_json(self):
        return {"equivalent": False, "reason": self.reason,
                "certificate": {str(k): v for k, v in sorted(self.certificate.items())}}


def compare_lifts(ms: ModuleStructure, ms2: ModuleStructure):
    """Find beta (order <= 2) with alpha - alpha' = beta(a l) - a beta(l).

    Any such beta is determined up to multiplication by a function by its
    values R(b, 1) with R = alpha - alpha', so beta(b) := R(b, 1) is taken
    and the identity is then verified exactly.
    """
    Y = ms.chart
    li = Y.ideal
    R = (ms.alpha_L - ms2.alpha_L).reduce(li)
    cert = {}
    for s, xs in enumerate(Y.x):
        rs = fix_slot(R, 0, xs).reduce(li)
        if not rs.is_zero():
            cert[s] = rs.to_json()
    if cert:
        return NotEquivalent(cert)
    beta = fix_slot(R, 1, ms.ring.one()).reduce(li)
    residual = (R + gauge_term(beta)).reduce(li)
    if not residual.is_zero():
        both_valid = all(check_module_structure(m)["defect_zero"] for m in (ms, ms2))
        if both_valid:
            raise InconsistencyError("difference vanishes on the conormal restriction but is not a coboundary")
        return NotEquivalent({-1: residual.to_json()}, "an input is not a module structure")
    if beta.total_order() > 2:
        raise InconsistencyError(f"gauge operator has order {beta.total_order()} > 2")
    return GaugeEquivalent(beta)
