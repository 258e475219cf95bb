"""Global obstruction to deforming L to a module over the glued algebra.

On each overlap U_i n U_j (chart-i coordinates, i < j) the N-valued value

    c_ij(x_s) = sum_{p,r} alpha_X(x_r, A_sp) Ainv_pr + 2 alpha_X(x_s, B) Binv + beta_ij(x_s)

is the difference of the chart module structures (normalized on conormal
generators) at (x_s, e), plus the algebra gluing field.  The cocycle is a
coboundary iff the chart structures can be re-gauged to agree on N^dual (x) L.
The same cocycle is also computed without the closed formula, by
transporting chart-j structures through the coordinate change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .cech import CechCochain, CoboundaryResult, Cover, cech_d, coboundary_solve, form_jacobian, transport
from .core.ring import NotAUnitError, RatFunc, Ring, Verdict, det, mat_inverse, substitute
from .deformation import (ModuleStructure, alpha_X, build_alpha_L, compare_lifts, GaugeEquivalent)
from .diffops import BiDiffOp, DiffOp, MultiDiffOp, embed, premultiply_slot, tensor
from .errors import InconsistencyError, PreconditionError
from .poisson import Bivector, SubvarietyChart, VectorField, is_coisotropic, nondegenerate

CONVENTIONS = {
    "overlap_coordinates": "components on U_i n U_j are written in chart i (i < j)",
    "cech_differential": "(d f)_ij = f_i - T_ij f_j, (d c)_ijk = T_ij c_jk - c_ik + c_ij",
    "normal_transition": "x^i_s = sum_p A^ij_sp x^j_p mod I^2, sections of N transform by A^ij",
    "line_bundle": "e^i = B^ij e^j",
    "chern_class": "c1(L)_ij = dB^ij / B^ij",
    "atiyah_class": "at(N)_ij = -dA^ij A^ji",
    "canonical_bundle": "B_K^ij = 1 / det(d y^j / d y^i)",
    "kappa_to_forms": "omega_k = 2 sum_s (M^-1)_ks n_s with M_sk = {x_s, y_k} mod I",
    "normalization": "alpha_L,i(x_s, e^i) = 0",
}


def _bundle(tr, which: str):
    if which == "L":
        return tr.B, tr.Binv
    if which == "L2":
        return tr.B2, tr.B2inv
    raise ValueError(f"unknown bundle {which!r}")


def _require_bundle(scene, which: str) -> None:
    for pair, tr in scene.transitions.items():
        if _bundle(tr, which)[0] is None:
            raise PreconditionError(f"overlap {pair}: no transition for line bundle {which}")


# -- characteristic cocycles --------------------------------------------------

def dlog_form(f: RatFunc, Y: SubvarietyChart) -> Tuple[RatFunc, ...]:
    """The 1-form df/f on Y in the frame dy_k."""
    Y.require_frame()
    inv = f.inverse()
    return tuple(Y.nf(Y.Wy(k).apply(f) * inv) for k in range(Y.m))


def c1_cocycle(scene, bundle: str = "L") -> CechCochain:
    """dlog B^ij on every overlap (forms)."""
    _require_bundle(scene, bundle)
    cover = scene.cover
    comps = {}
    for idx in cover.simplices(1):
        B, _ = _bundle(scene.transitions[idx], bundle)
        comps[idx] = dlog_form(B, cover.Y(idx))
    return CechCochain(1, "forms", comps, cover)


def c1_from_units(scene, units: Dict[Tuple[int, int], RatFunc]) -> CechCochain:
    cover = scene.cover
    return CechCochain(1, "forms", {idx: dlog_form(units[idx].to_ring(cover.ring(idx)), cover.Y(idx))
                                    for idx in cover.simplices(1)}, cover)


def atiyah_cocycle(scene) -> CechCochain:
    """-dA^ij A^ji as an End(N)-valued 1-form (row-major (s, q, k))."""
    cover = scene.cover
    comps = {}
    for idx in cover.simplices(1):
        Y = cover.Y(idx)
        Y.require_frame()
        tr = scene.transitions[idx]
        r = len(tr.A)
        out = []
        for s in range(r):
            for q in range(r):
                for k in range(Y.m):
                    acc = Y.ring.zero()
                    for p in range(r):
                        acc = acc + Y.Wy(k).apply(tr.A[s][p]) * tr.Ainv[p][q]
                    out.append(Y.nf(-acc))
        comps[idx] = out
    return CechCochain(1, "EndN_forms", comps, cover)


def canonical_units(scene) -> Dict[Tuple[int, int], RatFunc]:
    """B_K^ij = 1 / det J with dy^j = J dy^i, so that e_K^i = B_K^ij e_K^j."""
    cover = scene.cover
    out = {}
    for (i, j) in cover.simplices(1):
        ring = cover.ring((i, j))
        J = form_jacobian(i, j, ring, cover)
        d = cover.Y(ring).nf(det(J))
        try:
            out[(i, j)] = d.inverse()
        except NotAUnitError:
            raise InconsistencyError(f"overlap ({i},{j}): Jacobian of the Y-coordinate change is not a unit")
    return out


def kappa_restrict(scene) -> CechCochain:
    """n_s = beta_ij(x_s) mod I: the image of the gluing field in N."""
    cover = scene.cover
    comps = {}
    for idx in cover.simplices(1):
        Y = cover.Y(idx)
        beta = scene.transitions[idx].beta
        if beta is None:
            continue
        comps[idx] = tuple(Y.nf(beta.apply(x)) for x in Y.x)
    return CechCochain(1, "N", comps, cover)


def kappa_tangent(scene) -> bool:
    """Every gluing field preserves I (so its image in N vanishes identically)."""
    cover = scene.cover
    for idx in cover.simplices(1):
        beta = scene.transitions[idx].beta
        if beta is None:
            continue
        Y = cover.Y(idx)
        if any(Y.in_ideal(beta.apply(x)) is not Verdict.TRUE for x in Y.x):
            return False
    return True


def _conormal_pairing(Y: SubvarietyChart, P: Bivector) -> List[List[RatFunc]]:
    """M_sk = {x_s, y_k} mod I."""
    return [[Y.nf(P.bracket(x, y)) for y in Y.y] for x in Y.x]


def n_to_forms(c: CechCochain, scene) -> CechCochain:
    """N -> Omega^1_Y on Lagrangian scenes, n -> 2 M^-1 n."""
    cover = scene.cover
    comps = {}
    for idx, comp in c.components.items():
        ring = cover.ring(idx)
        Y = cover.Y(ring)
        P = cover.charts[idx[0]].P.localize(ring)
        Minv = mat_inverse(_conormal_pairing(Y, P), det_reducer=Y.nf)
        comps[idx] = tuple(Y.nf(sum((Minv[k][s] * comp[s] for s in range(1, len(comp))), Minv[k][0] * comp[0]) * 2)
                           for k in range(Y.m))
    return CechCochain(c.degree, "forms", comps, cover)


def kappa_to_forms(scene) -> CechCochain:
    return n_to_forms(kappa_restrict(scene), scene)


# -- the obstruction cocycle ----------------------------------------------------

def _check_coisotropic(scene) -> None:
    for ch in scene.charts:
        v = is_coisotropic(ch.Y, ch.P).verdict
        if v is not Verdict.TRUE:
            raise PreconditionError(f"chart {ch.name}: requires Y coisotropic (verdict {v.value})")


def obstruction_cocycle(scene, bundle: str = "L") -> CechCochain:
    """The N-valued cocycle from the closed overlap formula."""
    _require_bundle(scene, bundle)
    cover = scene.cover
    comps = {}
    for idx in cover.simplices(1):
        ring = cover.ring(idx)
        Y = cover.Y(ring)
        P = cover.charts[idx[0]].P.localize(ring)
        aX = alpha_X(P)
        tr = scene.transitions[idx]
        B, Binv = _bundle(tr, bundle)
        r = Y.r
        out = []
        for s in range(r):
            acc = aX.apply(Y.x[s], B) * Binv * 2
            for p in range(r):
                for q in range(r):
                    acc = acc + aX.apply(Y.x[q], tr.A[s][p]) * tr.Ainv[p][q]
            if tr.beta is not None:
                acc = acc + tr.beta.apply(Y.x[s])
            out.append(Y.nf(acc))
        comps[idx] = out
    return CechCochain(1, "N", comps, cover)


def chart_structures(scene) -> Dict[int, ModuleStructure]:
    return {ch.index: build_alpha_L(ch.Y, ch.P) for ch in scene.charts}


def shift_structures(structures: Dict[int, ModuleStructure], eta: CechCochain) -> Dict[int, ModuleStructure]:
    """alpha_i + sum_s eta_i,s W_{x_s}(a) b, which changes the cocycle by -d(eta)."""
    out = {}
    for i, ms in structures.items():
        Y = ms.chart
        ident = DiffOp.identity(ms.ring)
        op = BiDiffOp(ms.ring)
        for s, n in enumerate(eta.components[(i,)]):
            if not n.is_zero():
                op = op + tensor(Y.Wx(s).as_diffop(), ident).scale(n.to_ring(ms.ring))
        out[i] = ms.shifted(op, "shifted by a normal 0-cochain") if not op.is_zero() else ms
    return out


def direct_cocycle(scene, structures: Optional[Dict[int, ModuleStructure]] = None,
                   bundle: str = "L") -> CechCochain:
    """c_ij(x_s) = phi^*[alpha_j(psi^* x_s, psi^* B)] Binv - alpha_i(x_s, 1) + beta_ij(x_s).

    psi^* rewrites chart-i functions in chart-j coordinates, phi^* the reverse.
    """
    _require_bundle(scene, bundle)
    cover = scene.cover
    structures = structures or chart_structures(scene)
    comps = {}
    for (i, j) in cover.simplices(1):
        ov = cover.overlaps[(i, j)]
        ring = ov.ring
        Y = cover.Y(ring)
        Yj = cover.Y(ov.back_ring)
        tr = scene.transitions[(i, j)]
        B, Binv = _bundle(tr, bundle)
        Bj = substitute(B, ov.back, ov.back_ring)
        aj, ai = structures[j].alpha_L, structures[i].alpha_L
        out = []
        for s, xs in enumerate(Y.x):
            xj = substitute(xs, ov.back, ov.back_ring)
            val_j = Yj.nf(aj.apply(xj, Bj))
            acc = cover.pull(val_j, i, j, ring) * Binv - ai.apply(xs, ring.one())
            if tr.beta is not None:
                acc = acc + tr.beta.apply(xs)
            out.append(Y.nf(acc))
        comps[(i, j)] = out
    return CechCochain(1, "N", comps, cover)


# -- transport of operators and the triple-overlap class -------------------------

def _coordinate_fields(cover: Cover, i: int, j: int, target: Ring) -> List[DiffOp]:
    """d/dz^j_b written in chart-i coordinates on ``target``."""
    ov = cover.overlaps[(i, j)]
    nj = len(ov.back_ring.vars)
    out = []
    for b in range(nj):
        comps = [cover.pull(back.diff(b), i, j, target) for back in ov.back]
        out.append(DiffOp.from_components(target, comps))
    return out


def _power(fields: List[DiffOp], mu, target: Ring, cache) -> DiffOp:
    op = cache.get(mu)
    if op is None:
        op = DiffOp.identity(target)
        for b, e in enumerate(mu):
            for _ in range(e):
                op = op.compose(fields[b])
        cache[mu] = op
    return op


def transport_op(op: MultiDiffOp, cover: Cover, i: int, j: int, target: Ring) -> MultiDiffOp:
    """phi^* o op o psi^* for a chart-j operator, as a chart-i operator."""
    fields = _coordinate_fields(cover, i, j, target)
    cache: Dict[tuple, DiffOp] = {}
    out = None
    for key, c in op.coeffs.items():
        parts = [_power(fields, mu, target, cache) for mu in key]
        parts[0] = DiffOp.multiplication(cover.pull(c, i, j, target)).compose(parts[0])
        term = tensor(*parts) if len(parts) > 1 else parts[0]
        out = term if out is None else out + term
    if out is None:
        return type(op)(target) if op.nslots in (1, 2) else MultiDiffOp(target, {}, op.nslots)
    return out


def transported_structure(ms_j: ModuleStructure, scene, i: int, j: int, target: Ring,
                          bundle: str = "L") -> BiDiffOp:
    """(a, b) -> phi^* alpha_j(psi^* a, psi^*(b B)) Binv, the chart-j action in the e^i trivialization."""
    cover = scene.cover
    tr = scene.transitions[(i, j)]
    B, Binv = _bundle(tr, bundle)
    T = transport_op(ms_j.alpha_L, cover, i, j, target)
    return premultiply_slot(T, 1, B.to_ring(target)).scale(Binv.to_ring(target))


def transported_operator(beta: DiffOp, scene, i: int, j: int, target: Ring, bundle: str = "L") -> DiffOp:
    """A chart-j operator on L rewritten in chart i, l = b e^i."""
    cover = scene.cover
    tr = scene.transitions[(i, j)]
    B, Binv = _bundle(tr, bundle)
    T = transport_op(beta, cover, i, j, target)
    return DiffOp.multiplication(Binv.to_ring(target)).compose(T).compose(
        DiffOp.multiplication(B.to_ring(target)))


@dataclass
class TransitionSolve:
    """beta_L,ij on every overlap, and the resulting triple-overlap 2-cocycle."""

    betas: Dict[Tuple[int, int], DiffOp]
    cocycle: Optional[CechCochain]
    failures: Dict[Tuple[int, int], dict] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return not self.failures

    def to_json(self):
        out = {"solved": self.solved,
               "beta": {f"{i},{j}": b.to_json() for (i, j), b in sorted(self.betas.items())}}
        if self.failures:
            out["failures"] = {f"{i},{j}": v for (i, j), v in sorted(self.failures.items())}
        if self.cocycle is not None:
            out["h2_cocycle"] = self.cocycle.to_json()
        return out


def solve_transitions(scene, structures: Dict[int, ModuleStructure], bundle: str = "L") -> TransitionSolve:
    """beta_L with alpha_i(f, l) - alpha_j(f, l) - beta_X(f) l = beta_L(f l) - f beta_L(l).

    The sign of beta_X matches the obstruction cocycle: the algebra charts
    are glued by f -> f - eps beta_X(f).  ``structures`` must already make the
    obstruction cocycle vanish.
    """
    cover = scene.cover
    betas: Dict[Tuple[int, int], DiffOp] = {}
    failures = {}
    for (i, j) in cover.simplices(1):
        ring = cover.ring((i, j))
        Y = cover.Y(ring)
        P = cover.charts[i].P.localize(ring)
        aX = alpha_X(P)
        ai = structures[i].alpha_L
        ai = BiDiffOp(ring, {k: c.to_ring(ring) for k, c in ai.coeffs.items()})
        other = transported_structure(structures[j], scene, i, j, ring, bundle)
        beta = scene.transitions[(i, j)].beta
        if beta is not None:
            other = other + tensor(beta.as_diffop(), DiffOp.identity(ring))
        res = compare_lifts(ModuleStructure(Y, P, aX, ai.reduce(Y.ideal)),
                            ModuleStructure(Y, P, aX, other.reduce(Y.ideal), normalization="transported"))
        if isinstance(res, GaugeEquivalent):
            betas[(i, j)] = res.beta
        else:
            failures[(i, j)] = res.to_json()
    if failures or not cover.triples:
        return TransitionSolve(betas, None if failures else CechCochain.zero(2, "functions", cover), failures)
    comps = {}
    for (i, j, k) in cover.simplices(2):
        ring = cover.ring((i, j, k))
        Y = cover.Y(ring)
        bij = DiffOp(ring, {key: c.to_ring(ring) for key, c in betas[(i, j)].coeffs.items()})
        bik = DiffOp(ring, {key: c.to_ring(ring) for key, c in betas[(i, k)].coeffs.items()})
        bjk = transported_operator(betas[(j, k)], scene, i, j, ring, bundle)
        s = (bjk - bik + bij).reduce(Y.ideal)
        zero = (0,) * len(ring.vars)
        stray = {key: str(c) for key, c in s.coeffs.items() if key != (zero,)}
        if stray:
            raise InconsistencyError(f"triple ({i},{j},{k}): beta_ij + beta_jk + beta_ki is not a function: {stray}")
        comps[(i, j, k)] = [s.zeroth()]
    return TransitionSolve(betas, CechCochain(2, "functions", comps, cover))


# -- reports ---------------------------------------------------------------------

@dataclass
class ObstructionReport:
    side: str
    cocycle: CechCochain
    direct_agrees: bool
    h1: CoboundaryResult
    transitions: Optional[TransitionSolve] = None
    h2: Optional[CoboundaryResult] = None
    statements: List[str] = field(default_factory=list)
    conventions: Dict[str, str] = field(default_factory=lambda: dict(CONVENTIONS))

    @property
    def deformable(self) -> bool:
        if not self.h1.coboundary:
            return False
        return self.h2 is None or self.h2.coboundary

    @property
    def verdict(self) -> str:
        if not self.h1.coboundary:
            return "obstructed" if self.h1.verdict == "not-coboundary" else \
                f"obstructed-at-bound-{self.h1.degree_bound}"
        if self.h2 is not None and not self.h2.coboundary:
            return "h2-obstructed" if self.h2.verdict == "not-coboundary" else \
                f"h2-obstructed-at-bound-{self.h2.degree_bound}"
        return "deformable"

    def to_json(self):
        out = {
            "side": self.side,
            "verdict": self.verdict,
            "cocycle": self.cocycle.to_json(),
            "formula_and_direct_routes_agree": self.direct_agrees,
            "h1": self.h1.to_json(),
            "statements": list(self.statements),
            "conventions": dict(sorted(self.conventions.items())),
        }
        if self.transitions is not None:
            out["transition_solve"] = self.transitions.to_json()
        if self.h2 is not None:
            out["h2"] = self.h2.to_json()
        return out


def _check_cocycle(c: CechCochain, scene, what: str) -> None:
    if scene.cover.triples and not cech_d(c, scene).is_zero():
        raise InconsistencyError(f"{what} fails the cocycle condition; check the transition data")


def obstruction_class(scene, D: Optional[int] = None, structures: Optional[Dict[int, ModuleStructure]] = None,
                      bundle: str = "L", h2: bool = True) -> ObstructionReport:
    """Decide whether L deforms to a module over the glued algebra.

    Right modules are decided by passing ``side_flip(scene)`` (P negated).
    """
    side = scene.side
    work = scene
    D = work.degree_bound if D is None else D
    _check_coisotropic(work)
    _require_bundle(work, bundle)
    if structures is None:
        structures = chart_structures(work)
    c = obstruction_cocycle(work, bundle)
    _check_cocycle(c, work, "the obstruction cocycle")
    direct = direct_cocycle(work, structures, bundle)
    shifted = not all(ms.normalization == "alpha_L(x_s, e) = 0" for ms in structures.values())
    agrees = True if shifted else direct.equals(c)
    if not shifted and not agrees:
        raise InconsistencyError("closed formula and transported structures give different cocycles")
    target = direct if shifted else c
    h1 = coboundary_solve(target, work, D, check_cocycle=False)
    report = ObstructionReport(side, target, agrees, h1)
    if h1.coboundary and h2 and work.cover.overlaps:
        fixed = shift_structures(structures, h1.witness)
        if not direct_cocycle(work, fixed, bundle).is_zero():
            raise InconsistencyError("shifting by the witness did not kill the obstruction cocycle")
        ts = solve_transitions(work, fixed, bundle)
        report.transitions = ts
        if not ts.solved:
            raise InconsistencyError(f"transition solve failed on overlaps {sorted(ts.failures)}")
        if work.cover.triples:
            report.h2 = coboundary_solve(ts.cocycle, work, D)
    report.statements = _statements(report, work)
    return report


def _statements(report: ObstructionReport, scene) -> List[str]:
    side = report.side
    a = scene.assertions
    out = []
    h2_ok = report.h2.coboundary if report.h2 is not None else (
        not scene.cover.triples or a.get("H2_OY_zero", False))
    if report.h1.coboundary and h2_ok:
        out.append(f"L deforms to a {side} module over the first-order deformation")
    elif report.h1.coboundary:
        out.append("no compatible transition data: the triple-overlap class in H^2(Y, O_Y) is nonzero")
    else:
        out.append(f"L does not deform to a {side} module: the class in H^1(Y, N) is nonzero")
    if a.get("H2_OY_zero"):
        out.append("H^2(Y, O_Y) = 0 is asserted: the first-order condition alone decides existence")
    if a.get("H1_OY_zero") and report.deformable:
        out.append("H^1(Y, O_Y) = 0 is asserted: isomorphism classes of deformations are a torsor under H^0(Y, N)")
    if report.deformable:
        out.append("automorphisms of a deformation restricting to the identity form H^0(Y, O_Y)")
    if side == "right":
        out.append("decided on the opposite algebra (P negated): the condition reads [..] cup P - kappa = 0")
    if kappa_tangent(scene):
        out.append("every gluing field preserves I, so kappa restricts to zero in H^1(Y, N)")
    return out


# -- Lagrangian case ---------------------------------------------------------------

@dataclass
class LagrangianReport:
    side: str
    canonical: CechCochain
    bundle: CechCochain
    kappa: CechCochain
    total: CechCochain
    result: CoboundaryResult

    @property
    def deformable(self) -> bool:
        return self.result.coboundary

    @property
    def verdict(self) -> str:
        if self.result.coboundary:
            return "deformable"
        return "obstructed" if self.result.verdict == "not-coboundary" else \
            f"obstructed-at-bound-{self.result.degree_bound}"

    def to_json(self):
        return {
            "side": self.side,
            "verdict": self.verdict,
            "c1_K": self.canonical.to_json(),
            "c1_L": self.bundle.to_json(),
            "kappa_forms": self.kappa.to_json(),
            "total": self.total.to_json(),
            "result": self.result.to_json(),
            "conventions": dict(sorted(CONVENTIONS.items())),
        }


def lagrangian_criterion(scene, D: Optional[int] = None, bundle: str = "L") -> LagrangianReport:
    """-c1(K_Y) + 2 c1(L) + kappa (as forms) is a coboundary."""
    side = scene.side
    work = scene
    D = work.degree_bound if D is None else D
    for ch in work.charts:
        if not nondegenerate(ch.P):
            raise PreconditionError(f"chart {ch.name}: requires a nondegenerate Poisson bivector")
        n = len(ch.ring.vars)
        if 2 * ch.Y.r != n:
            raise PreconditionError(f"chart {ch.name}: requires dim Y = dim X / 2 (got codimension {ch.Y.r} in {n})")
        ch.Y.require_frame()
    _check_coisotropic(work)
    _require_bundle(work, bundle)
    cK = c1_from_units(work, canonical_units(work))
    cL = c1_cocycle(work, bundle)
    kap = kappa_to_forms(work)
    total = cL.scale(2) - cK + kap
    _check_cocycle(total, work, "the Lagrangian cocycle")
    return LagrangianReport(side, cK, cL, kap, total, coboundary_solve(total, work, D, check_cocycle=False))
