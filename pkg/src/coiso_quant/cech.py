"""Covers, transition data and Cech cochains with their differential.

Every component on an overlap U_i n U_j (or a triple) is written in the
coordinates of the lowest-index chart.  Cochain components are flat tuples
of chart functions; the coefficient tag fixes their shape:

    functions   (1,)        sections of O_Y
    forms       (m,)        1-forms on Y in the frame dy_1..dy_m
    N           (r,)        normal vectors n, stored as n(x_1)..n(x_r)
    EndN_forms  (r, r, m)   End(N)-valued 1-forms, row-major
    vectors     (n,)        ambient vector fields d/dz_1..d/dz_n
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core.linsolve import LinSystem, solve_linear
from .core.poly import Poly
from .core.ring import NotAUnitError, RatFunc, Ring, Verdict, mat_inverse, substitute
from .errors import InconsistencyError, PreconditionError, SceneError
from .poisson import Bivector, SubvarietyChart, VectorField

TAGS = ("functions", "forms", "N", "EndN_forms", "vectors")

Index = Tuple[int, ...]
Comp = Tuple[RatFunc, ...]


@dataclass
class Chart:
    index: int
    name: str
    ring: Ring
    P: Bivector
    Y: SubvarietyChart


@dataclass
class Overlap:
    """U_i n U_j for i < j.  ``fwd`` gives chart-j coordinates as functions
    on ``ring`` (chart-i variables); ``back`` the reverse on ``back_ring``."""

    i: int
    j: int
    ring: Ring
    fwd: Tuple[RatFunc, ...]
    back_ring: Ring
    back: Tuple[RatFunc, ...]


@dataclass
class Transition:
    """Data on U_i n U_j (i < j) in chart-i coordinates:
    x^i = A x^j mod I^2, e^i = B e^j, and the gluing field beta of the algebra."""

    A: List[List[RatFunc]]
    Ainv: List[List[RatFunc]]
    B: Optional[RatFunc] = None
    Binv: Optional[RatFunc] = None
    B2: Optional[RatFunc] = None
    B2inv: Optional[RatFunc] = None
    beta: Optional[VectorField] = None


class Cover:
    def __init__(self, charts: Sequence[Chart], overlaps: Dict[Tuple[int, int], Overlap],
                 triples: Optional[Dict[Tuple[int, int, int], Ring]] = None, kind: str = "generic"):
        self.charts = list(charts)
        self.overlaps = dict(overlaps)
        self.triples = dict(triples or {})
        self.kind = kind
        self._Y: Dict[Ring, SubvarietyChart] = {}
        self._images: Dict[tuple, Tuple[RatFunc, ...]] = {}

    def simplices(self, degree: int) -> List[Index]:
        if degree == 0:
            return [(c.index,) for c in self.charts]
        if degree == 1:
            return sorted(self.overlaps)
        if degree == 2:
            return sorted(self.triples)
        raise ValueError("only degrees 0, 1, 2 are supported")

    def ring(self, idx: Index) -> Ring:
        if len(idx) == 1:
            return self.charts[idx[0]].ring
        if len(idx) == 2:
            return self.overlaps[idx].ring
        return self.triples[idx]

    def Y(self, idx_or_ring) -> SubvarietyChart:
        """The subvariety chart of the lowest index, localized to the simplex ring."""
        ring = idx_or_ring if isinstance(idx_or_ring, Ring) else self.ring(idx_or_ring)
        owner = next(c for c in self.charts if c.ring.vars == ring.vars)
        if ring == owner.ring:
            return owner.Y
        y = self._Y.get(ring)
        if y is None:
            y = self._Y[ring] = owner.Y.localize(ring)
        return y

    def chart_of(self, ring: Ring) -> Chart:
        return next(c for c in self.charts if c.ring.vars == ring.vars)

    def fwd(self, i: int, j: int, target: Ring) -> Tuple[RatFunc, ...]:
        key = ("f", i, j, target)
        im = self._images.get(key)
        if im is None:
            im = self._images[key] = tuple(g.to_ring(target) for g in self.overlaps[(i, j)].fwd)
        return im

    def pull(self, f: RatFunc, i: int, j: int, target: Ring) -> RatFunc:
        """Chart-j function written in chart-i coordinates on ``target``."""
        return substitute(f, self.fwd(i, j, target), target)

    def check(self) -> List[str]:
        errs = []
        for (i, j), ov in sorted(self.overlaps.items()):
            ci, cj = self.charts[i], self.charts[j]
            for a, v in enumerate(ci.ring.vars):
                try:
                    back = substitute(ov.back[a], ov.fwd, ov.ring)
                except NotAUnitError as e:
                    errs.append(f"overlaps[{i},{j}]: back map not defined on the overlap ({e})")
                    break
                if back != ov.ring.var(v):
                    errs.append(f"overlaps[{i},{j}]: maps are not mutually inverse ({v} -> {back})")
            for b, v in enumerate(cj.ring.vars):
                try:
                    f = substitute(ov.fwd[b], ov.back, ov.back_ring)
                except NotAUnitError as e:
                    errs.append(f"overlaps[{i},{j}]: forward map not defined on the overlap ({e})")
                    break
                if f != ov.back_ring.var(v):
                    errs.append(f"overlaps[{i},{j}]: maps are not mutually inverse ({v} -> {f})")
        for (i, j, k), ring in sorted(self.triples.items()):
            for pair in ((i, j), (i, k), (j, k)):
                if pair not in self.overlaps:
                    errs.append(f"triples[{i},{j},{k}]: missing overlap {pair}")
            if errs:
                continue
            try:
                for pair in ((i, j), (i, k)):
                    RatFunc(self.overlaps[pair].ring.h, 0, ring).inverse()
                self.pull(RatFunc(self.overlaps[(j, k)].ring.h, 0, self.overlaps[(j, k)].ring), i, j, ring).inverse()
            except NotAUnitError:
                errs.append(f"triples[{i},{j},{k}]: overlap denominators are not units on the triple")
        return errs


def shape(tag: str, chart: Chart) -> Tuple[int, ...]:
    r = chart.Y.r
    m = chart.Y.m
    n = len(chart.ring.vars)
    return {"functions": (1,), "forms": (m,), "N": (r,), "EndN_forms": (r, r, m), "vectors": (n,)}[tag]


def on_Y(tag: str) -> bool:
    return tag != "vectors"


class CechCochain:
    def __init__(self, degree: int, tag: str, components: Dict[Index, Sequence[RatFunc]], cover: Cover):
        if tag not in TAGS:
            raise ValueError(f"unknown coefficient tag {tag!r}")
        self.degree = degree
        self.tag = tag
        self.cover = cover
        comps = {}
        for idx in cover.simplices(degree):
            ring = cover.ring(idx)
            size = _size(shape(tag, cover.charts[idx[0]]))
            data = components.get(idx)
            if data is None:
                data = [ring.zero()] * size
            data = tuple(_coerce(c, ring) for c in data)
            if len(data) != size:
                raise ValueError(f"component {idx} of a {tag} cochain needs {size} entries")
            if on_Y(tag):
                Y = cover.Y(ring)
                data = tuple(Y.nf(c) for c in data)
            comps[idx] = data
        extra = set(components) - set(comps)
        if extra:
            raise ValueError(f"components on unknown simplices {sorted(extra)}")
        self.components = comps

    @classmethod
    def zero(cls, degree: int, tag: str, cover: Cover) -> "CechCochain":
        return cls(degree, tag, {}, cover)

    def __add__(self, other):
        return CechCochain(self.degree, self.tag, {k: tuple(a + b for a, b in zip(v, other.components[k]))
                                                    for k, v in self.components.items()}, self.cover)

    def __neg__(self):
        return CechCochain(self.degree, self.tag, {k: tuple(-a for a in v) for k, v in self.components.items()},
                           self.cover)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "CechCochain":
        return CechCochain(self.degree, self.tag, {k: tuple(a * c for a in v) for k, v in self.components.items()},
                           self.cover)

    def component_is_zero(self, idx: Index) -> bool:
        comp = self.components[idx]
        if on_Y(self.tag):
            Y = self.cover.Y(idx)
            return all(Y.in_ideal(c) is Verdict.TRUE for c in comp)
        return all(c.is_zero() for c in comp)

    def is_zero(self) -> bool:
        return all(self.component_is_zero(idx) for idx in self.components)

    def equals(self, other: "CechCochain") -> bool:
        return (self - other).is_zero()

    def to_json(self):
        return {
            "degree": self.degree,
            "tag": self.tag,
            "components": {",".join(map(str, k)): [str(c) for c in v] for k, v in sorted(self.components.items())},
        }


def _size(shp):
    out = 1
    for s in shp:
        out *= s
    return out


def _coerce(c, ring: Ring) -> RatFunc:
    if isinstance(c, RatFunc):
        return c if c.ring == ring else c.to_ring(ring)
    if isinstance(c, Poly):
        return RatFunc(c, 0, ring)
    return ring.poly(c)


# -- transport of chart-j data into chart-i coordinates ------------------------

def transport(tag: str, comp: Comp, i: int, j: int, target: Ring, scene) -> Comp:
    """Chart-j component re-expressed in chart-i coordinates and frames on ``target``."""
    cover: Cover = scene.cover
    pulled = tuple(cover.pull(c, i, j, target) for c in comp)
    if tag == "functions":
        return pulled
    if tag == "vectors":
        return _push_vector(pulled, i, j, target, cover)
    Yi = cover.Y(target)
    if tag == "forms":
        return tuple(Yi.nf(c) for c in _forms_matrix_apply(pulled, i, j, target, cover))
    tr = _transition(scene, i, j)
    A = [[a.to_ring(target) for a in row] for row in tr.A]
    r = len(A)
    if tag == "N":
        return tuple(Yi.nf(sum((A[s][p] * pulled[p] for p in range(1, r)), A[s][0] * pulled[0]))
                     for s in range(r))
    if tag == "EndN_forms":
        Ainv = [[a.to_ring(target) for a in row] for row in tr.Ainv]
        m = Yi.m
        forms = {}
        for p in range(r):
            for t in range(r):
                forms[(p, t)] = _forms_matrix_apply(pulled[(p * r + t) * m:(p * r + t + 1) * m], i, j, target, cover)
        out = []
        for s in range(r):
            for q in range(r):
                for k in range(m):
                    acc = target.zero()
                    for p in range(r):
                        for t in range(r):
                            acc = acc + A[s][p] * forms[(p, t)][k] * Ainv[t][q]
                    out.append(Yi.nf(acc))
        return tuple(out)
    raise PreconditionError(f"no pullback rule for coefficient tag {tag!r}")


def _transition(scene, i, j) -> Transition:
    tr = scene.transitions.get((i, j))
    if tr is None:
        raise SceneError(f"missing transition data on overlap ({i},{j})")
    return tr


def form_jacobian(i: int, j: int, target: Ring, cover: Cover) -> List[List[RatFunc]]:
    """J[l][k] = d(y^j_l)/d(y^i_k) restricted to Y, so dy^j_l = sum_k J[l][k] dy^i_k."""
    Yi = cover.Y(target)
    Yj = cover.charts[j].Y
    Yj.require_frame()
    pulled = [cover.pull(y, i, j, target) for y in Yj.y]
    return [[Yi.nf(Yi.Wy(k).apply(g)) for k in range(Yi.m)] for g in pulled]


def _forms_matrix_apply(pulled: Sequence[RatFunc], i, j, target, cover) -> List[RatFunc]:
    J = form_jacobian(i, j, target, cover)
    m = len(J[0]) if J else 0
    return [sum((J[l][k] * pulled[l] for l in range(1, len(J))), J[0][k] * pulled[0]) for k in range(m)]


def _push_vector(pulled: Sequence[RatFunc], i, j, target, cover: Cover) -> Comp:
    ov = cover.overlaps[(i, j)]
    ring_i = target
    out = []
    for a, back in enumerate(ov.back):
        acc = ring_i.zero()
        for b, vb in enumerate(pulled):
            if vb.is_zero():
                continue
            d = back.diff(b)
            if not d.is_zero():
                acc = acc + vb * cover.pull(d, i, j, target)
        out.append(acc)
    return tuple(out)


# -- the differential -----------------------------------------------------------

def cech_d(c: CechCochain, scene) -> CechCochain:
    """(d f)_{ij} = f_i - f_j and (d c)_{ijk} = c_jk - c_ik + c_ij, all in chart i."""
    cover = scene.cover
    if c.degree == 0:
        out = {}
        for (i, j) in cover.simplices(1):
            ring = cover.ring((i, j))
            fi = tuple(a.to_ring(ring) for a in c.components[(i,)])
            fj = transport(c.tag, c.components[(j,)], i, j, ring, scene)
            out[(i, j)] = tuple(a - b for a, b in zip(fi, fj))
        return CechCochain(1, c.tag, out, cover)
    if c.degree == 1:
        out = {}
        for (i, j, k) in cover.simplices(2):
            ring = cover.ring((i, j, k))
            cjk = transport(c.tag, c.components[(j, k)], i, j, ring, scene)
            cik = tuple(a.to_ring(ring) for a in c.components[(i, k)])
            cij = tuple(a.to_ring(ring) for a in c.components[(i, j)])
            out[(i, j, k)] = tuple(a - b + e for a, b, e in zip(cjk, cik, cij))
        return CechCochain(2, c.tag, out, cover)
    raise PreconditionError("cech_d is defined on cochains of degree <= 1")


# -- coboundary decisions -------------------------------------------------------

@dataclass
class CoboundaryResult:
    coboundary: bool
    witness: Optional[CechCochain]
    degree_bound: int
    stability: str
    certificate: Optional[str] = None
    bounded_verdict: Optional[bool] = None

    @property
    def verdict(self) -> str:
        if self.coboundary:
            return "coboundary"
        if self.stability.startswith("exact"):
            return "not-coboundary"
        return f"not-coboundary-at-bound-{self.degree_bound}"

    def to_json(self):
        out = {"verdict": self.verdict, "degree_bound": self.degree_bound, "stability": self.stability}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.bounded_verdict is not None:
            out["bounded_ansatz_agrees"] = self.bounded_verdict == self.coboundary
        return out


def coboundary_solve(c: CechCochain, scene, D: int = 8, check_cocycle: bool = True) -> CoboundaryResult:
    """Is ``c`` = d(b) for a cochain b one degree lower?

    Degree 1: b has polynomial components of degree <= D on each chart.
    Degree 2: b has Laurent components m / h_ij^k on overlaps, deg m, k <= D.
    On the two-chart P^1 cover rank-one tags are decided exactly by the
    residue rule; the bounded ansatz is run alongside and must not contradict it.
    """
    cover = scene.cover
    if c.degree not in (1, 2):
        raise PreconditionError("coboundary_solve takes a 1- or 2-cocycle")
    if check_cocycle and c.degree == 1 and cover.triples and not cech_d(c, scene).is_zero():
        raise PreconditionError("input is not a cocycle")
    if not c.components:
        return CoboundaryResult(True, CechCochain.zero(c.degree - 1, c.tag, cover), D, "exact (no overlaps)")
    if c.is_zero():
        return CoboundaryResult(True, CechCochain.zero(c.degree - 1, c.tag, cover), D, "exact (zero cocycle)")
    bounded = _ansatz_solve(c, scene, D)
    if c.degree == 1 and cover.kind == "p1" and _size(shape(c.tag, cover.charts[0])) == 1:
        exact = _residue_rule(c, scene)
        if exact is not None:
            if bounded.coboundary and not exact.coboundary:
                raise InconsistencyError("bounded ansatz found a witness the residue rule excludes")
            exact.degree_bound = D
            exact.bounded_verdict = bounded.coboundary
            return exact
    return bounded


def _basis_degree0(tag, cover: Cover, D: int):
    """Unknowns (chart, component, monomial) for a polynomial 0-cochain."""
    out = []
    for ch in cover.charts:
        size = _size(shape(tag, ch))
        monos = ch.Y.ideal.standard_monomials(D) if on_Y(tag) else _all_monomials(ch.ring, D)
        for comp in range(size):
            for m in monos:
                out.append((ch.index, comp, m))
    return out


def _all_monomials(ring, D):
    from .core.poly import monomials_up_to
    return monomials_up_to(len(ring.vars), D)


def _unit_cochain(tag, cover: Cover, degree: int, idx: Index, comp: int, value: RatFunc) -> CechCochain:
    size = _size(shape(tag, cover.charts[idx[0]]))
    ring = cover.ring(idx)
    data = [ring.zero()] * size
    data[comp] = value
    return CechCochain(degree, tag, {idx: data}, cover)


def _ansatz_solve(c: CechCochain, scene, D: int) -> CoboundaryResult:
    cover = scene.cover
    lower = c.degree - 1
    if lower == 0:
        unknowns = []
        for (ci, comp, m) in _basis_degree0(c.tag, cover, D):
            ring = cover.ring((ci,))
            unknowns.append(((ci,), comp, m, 0, RatFunc(Poly.monomial(m, ring.vars), 0, ring)))
    else:
        unknowns = []
        for idx in cover.simplices(1):
            ring = cover.ring(idx)
            ch = cover.charts[idx[0]]
            size = _size(shape(c.tag, ch))
            monos = cover.Y(idx).ideal.standard_monomials(D) if on_Y(c.tag) else _all_monomials(ring, D)
            for comp in range(size):
                for k in range(D + 1):
                    for m in monos:
                        unknowns.append((idx, comp, m, k, RatFunc(Poly.monomial(m, ring.vars), k, ring)))
    # image of every basis element under d
    images = []
    for (idx, comp, m, k, val) in unknowns:
        images.append(cech_d(_unit_cochain(c.tag, cover, lower, idx, comp, val), scene))
    sys = LinSystem()
    for u in range(len(unknowns)):
        sys.add_unknown(u)
    for idx in sorted(c.components):
        ring = cover.ring(idx)
        reducer = cover.Y(idx).ideal if on_Y(c.tag) else None
        for b, target in enumerate(c.components[idx]):
            terms = [(u, img.components[idx][b]) for u, img in enumerate(images)
                     if not img.components[idx][b].is_zero()]
            K = max([target.k] + [t.k for _, t in terms])
            rows: Dict[tuple, Dict[int, Fraction]] = {}
            rhs: Dict[tuple, Fraction] = {}

            def nf(p):
                return reducer.reduce_poly(p) if reducer is not None else p

            tnum = nf(target.num * ring.h ** (K - target.k))
            for e, cf in tnum.terms.items():
                rhs[e] = cf
                rows.setdefault(e, {})
            for u, t in terms:
                for e, cf in nf(t.num * ring.h ** (K - t.k)).terms.items():
                    rows.setdefault(e, {})[u] = cf
            for e in sorted(rows):
                sys.add_row(rows[e], rhs.get(e, 0))
    res = solve_linear(sys)
    if not res.feasible:
        return CoboundaryResult(False, None, D, f"heuristic at bound {D}",
                                f"linear system infeasible ({len(sys.rows)} equations, "
                                f"{len(unknowns)} unknowns); certificate combines {len(res.certificate)} rows")
    comps: Dict[Index, List[RatFunc]] = {}
    for u, (idx, comp, m, k, val) in enumerate(unknowns):
        coef = res.values[u]
        if not coef:
            continue
        slot = comps.setdefault(idx, [cover.ring(idx).zero()] * _size(shape(c.tag, cover.charts[idx[0]])))
        slot[comp] = slot[comp] + val * coef
    witness = CechCochain(lower, c.tag, comps, cover)
    if not cech_d(witness, scene).equals(c):
        raise InconsistencyError("bounded coboundary witness does not reproduce the cocycle")
    return CoboundaryResult(True, witness, D, f"heuristic at bound {D}" if lower else "exact (witness found)")


def laurent_coefficients(f: RatFunc, Y: SubvarietyChart) -> Optional[Dict[int, Fraction]]:
    """f mod I as a Laurent polynomial in the single Y-coordinate, when the
    chart denominator is that coordinate; None otherwise."""
    ring = f.ring
    if Y.y is None or len(Y.y) != 1:
        return None
    y = Y.y[0]
    if y.k or len(y.num.terms) != 1 or y.num.total_degree() != 1:
        return None
    (ey, cy), = y.num.terms.items()
    if cy != 1:
        return None
    vi = ey.index(1)
    if not ring.affine and ring.h != y.num:
        return None
    num = Y.ideal.reduce_poly(f.num)
    out: Dict[int, Fraction] = {}
    for e, c in num.terms.items():
        if any(a for b, a in enumerate(e) if b != vi):
            return None
        out[e[vi] - f.k] = c
    return out


def _residue_rule(c: CechCochain, scene) -> Optional[CoboundaryResult]:
    """Exact decision on the two-chart P^1 cover.

    With z the chart-0 coordinate and T(w^e) = lam z^(mexp - e) the transport
    of chart-1 monomials, exponents >= 0 are reached from chart 0 and
    exponents <= mexp from chart 1; z^e with mexp < e < 0 is unreachable.
    """
    cover = scene.cover
    if len(cover.charts) != 2 or list(cover.overlaps) != [(0, 1)]:
        return None
    ring = cover.ring((0, 1))
    Y01 = cover.Y((0, 1))
    Y1 = cover.charts[1].Y
    one1 = cover.charts[1].ring.one()
    t1 = transport(c.tag, (one1,), 0, 1, ring, scene)[0]
    lc = laurent_coefficients(t1, Y01)
    coeffs = laurent_coefficients(c.components[(0, 1)][0], Y01)
    if lc is None or coeffs is None or len(lc) != 1 or Y1.y is None or len(Y1.y) != 1:
        return None
    (mexp, lam), = lc.items()
    w = Y1.y[0]
    wz = laurent_coefficients(cover.pull(w, 0, 1, ring), Y01)
    if wz is None or len(wz) != 1 or next(iter(wz)) != -1:
        return None
    mu = wz[-1]
    bad = {e: v for e, v in coeffs.items() if mexp < e < 0}
    if bad:
        e = max(bad)
        return CoboundaryResult(False, None, 0, "exact (residue rule)",
                                f"coefficient {bad[e]} of z^{e} lies in the unreachable window "
                                f"{mexp} < e < 0")
    z_idx = cover.charts[0].Y.y[0].num
    f0 = Poly.zero(cover.charts[0].ring.vars)
    f1 = Poly.zero(cover.charts[1].ring.vars)
    for e, v in sorted(coeffs.items()):
        if e >= 0:
            f0 = f0 + z_idx ** e * v
        else:
            # chart-1 monomial w^q maps to lam * mu^q * z^(mexp - q)
            q = mexp - e
            f1 = f1 - w.num ** q * (v / (lam * mu ** q))
    witness = CechCochain(0, c.tag, {(0,): [f0], (1,): [f1]}, cover)
    if not cech_d(witness, scene).equals(c):
        raise InconsistencyError("residue-rule witness does not reproduce the cocycle")
    return CoboundaryResult(True, witness, 0, "exact (residue rule)")
