"""Scene files: a JSON tree describing charts, the subvariety, the cover and
the transition data of N, L and the algebra gluing.

Polynomials are strings in the literal grammar of :mod:`coiso_quant.core.parse`.
A chart function is either such a string or a pair ``[num, k]`` meaning
``num / h**k`` for the ring's distinguished denominator ``h``.

Top-level keys::

    schema_version  1 (mandatory)
    name, description
    options         degree_bound (8), saturation_bound (10), side (left|right)
    assertions      H1_OY_zero, H2_OY_zero, regular_sequence (booleans)
    cover_kind      "affine" | "p1" | "generic"
    charts          [{name, vars, h, bivector {"a,b": poly}, subvariety {ideal, complement}}]
    overlaps        [{pair [i, j], h, map {var_j: f}, back_h, back_map {var_i: f},
                      N [[...]], L f, L2 f, kappa {var_i: f},
                      L_back f, L2_back f (optional explicit B^{ji})}]
    triples         [{indices [i, j, k], h}]
    connections     [{name, chart, twist, terms [...]}]
    expected        free-form documented verdicts
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .cech import Chart, Cover, Overlap, Transition
from .core.parse import ParseError, parse_poly
from .core.ring import NotAUnitError, RatFunc, Ring, Verdict, mat_inverse, mat_mul, substitute
from .errors import SceneError
from .poisson import Bivector, SubvarietyChart, VectorField, bracket

SCHEMA_VERSION = 1
DEFAULT_OPTIONS = {"degree_bound": 8, "saturation_bound": 10, "side": "left"}


@dataclass
class ConnectionSpec:
    name: str
    chart: int
    twist: Fraction
    terms: List[RatFunc]


@dataclass
class Scene:
    name: str
    options: Dict[str, Any]
    assertions: Dict[str, bool]
    cover: Cover
    transitions: Dict[Tuple[int, int], Transition]
    connections: List[ConnectionSpec] = field(default_factory=list)
    expected: Dict[str, Any] = field(default_factory=dict)
    description: str = ""
    raw: Dict[str, Any] = field(default_factory=dict)

    @property
    def charts(self) -> List[Chart]:
        return self.cover.charts

    @property
    def degree_bound(self) -> int:
        return self.options["degree_bound"]

    @property
    def side(self) -> str:
        return self.options["side"]

    @property
    def has_kappa(self) -> bool:
        return any(t.beta is not None and not t.beta.is_zero() for t in self.transitions.values())

    @property
    def has_bundle(self) -> bool:
        return all(t.B is not None for t in self.transitions.values())


# -- parsing helpers --------------------------------------------------------

def _rf(value, ring: Ring, where: str, errors: List[str]) -> Optional[RatFunc]:
    try:
        if isinstance(value, list):
            if len(value) != 2 or not isinstance(value[1], int) or value[1] < 0:
                raise ValueError("fraction must be [numerator, k] with k a non-negative integer")
            return RatFunc(parse_poly(value[0], ring.vars), value[1], ring)
        if isinstance(value, (int, str)):
            return RatFunc(parse_poly(value, ring.vars), 0, ring)
        raise ValueError(f"expected a polynomial string or [num, k], got {value!r}")
    except (ParseError, ValueError) as e:
        errors.append(f"{where}: {e}")
        return None


def _poly(value, vars, where: str, errors: List[str]):
    try:
        return parse_poly(value, vars)
    except ParseError as e:
        errors.append(f"{where}: {e}")
        return None


def _fraction(value, where, errors) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        errors.append(f"{where}: not a rational number: {value!r}")
        return Fraction(0)


def load_scene(source: Union[str, Path, Dict[str, Any]]) -> Scene:
    """Parse and validate a scene from a path, a JSON string or a dict."""
    if isinstance(source, dict):
        data = source
    else:
        text = None
        p = Path(source) if not (isinstance(source, str) and source.lstrip().startswith("{")) else None
        if p is not None:
            if not p.exists():
                raise SceneError(f"scene file not found: {p}")
            text = p.read_text()
        else:
            text = source
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SceneError(f"line {e.lineno} column {e.colno}: JSON syntax error: {e.msg}")
    scene = build_scene(data)
    errs = validate_scene(scene)
    if errs:
        raise SceneError(errs)
    return scene


parse_scene = load_scene


def build_scene(data: Dict[str, Any]) -> Scene:
    errors: List[str] = []
    if not isinstance(data, dict):
        raise SceneError("scene must be a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SceneError(f"schema_version: expected {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    options = dict(DEFAULT_OPTIONS)
    for k, v in (data.get("options") or {}).items():
        if k not in DEFAULT_OPTIONS:
            errors.append(f"options.{k}: unknown option")
        options[k] = v
    if options["side"] not in ("left", "right"):
        errors.append(f"options.side: must be 'left' or 'right', got {options['side']!r}")
    for k in ("degree_bound", "saturation_bound"):
        if not isinstance(options[k], int) or options[k] < 0:
            errors.append(f"options.{k}: must be a non-negative integer")
    charts_raw = data.get("charts")
    if not isinstance(charts_raw, list) or not charts_raw:
        raise SceneError(errors + ["charts: at least one chart is required"])
    seen_vars = {}
    charts: List[Chart] = []
    for ci, c in enumerate(charts_raw):
        at = f"charts[{ci}]"
        vars = c.get("vars")
        if not isinstance(vars, list) or not vars or not all(isinstance(v, str) for v in vars):
            errors.append(f"{at}.vars: list of variable names required")
            continue
        if len(set(vars)) != len(vars):
            errors.append(f"{at}.vars: duplicate variable names")
        for v in vars:
            if v in seen_vars:
                errors.append(f"{at}.vars: variable {v!r} already used by chart {seen_vars[v]}")
            seen_vars[v] = ci
        h = _poly(c.get("h", "1"), vars, f"{at}.h", errors)
        if h is None:
            continue
        try:
            ring = Ring(tuple(vars), h)
        except ValueError as e:
            errors.append(f"{at}.h: {e}")
            continue
        upper = {}
        for key, val in (c.get("bivector") or {}).items():
            names = [s.strip() for s in key.split(",")]
            if len(names) != 2 or any(n not in vars for n in names):
                errors.append(f"{at}.bivector[{key!r}]: key must be 'a,b' with declared variables")
                continue
            f = _rf(val, ring, f"{at}.bivector[{key!r}]", errors)
            if f is not None:
                upper[(vars.index(names[0]), vars.index(names[1]))] = f
        try:
            P = Bivector.from_upper(ring, upper)
        except ValueError as e:
            errors.append(f"{at}.bivector: {e}")
            continue
        sub = c.get("subvariety") or {}
        ideal = [_rf(g, ring, f"{at}.subvariety.ideal[{k}]", errors) for k, g in enumerate(sub.get("ideal", []))]
        comp = sub.get("complement")
        comp_rf = None if comp is None else [_rf(g, ring, f"{at}.subvariety.complement[{k}]", errors)
                                             for k, g in enumerate(comp)]
        if not ideal:
            errors.append(f"{at}.subvariety.ideal: at least one generator required")
        if None in ideal or (comp_rf is not None and None in comp_rf):
            continue
        try:
            Y = SubvarietyChart(ring, ideal, comp_rf, options["saturation_bound"], chart=c.get("name", str(ci)))
        except SceneError as e:
            errors.extend(f"{at}.subvariety: {m}" for m in e.errors)
            continue
        charts.append(Chart(ci, c.get("name", f"U{ci}"), ring, P, Y))
    if errors:
        raise SceneError(errors)

    overlaps: Dict[Tuple[int, int], Overlap] = {}
    transitions: Dict[Tuple[int, int], Transition] = {}
    for oi, o in enumerate(data.get("overlaps") or []):
        at = f"overlaps[{oi}]"
        pair = o.get("pair")
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) for x in pair)
                and 0 <= pair[0] < pair[1] < len(charts)):
            errors.append(f"{at}.pair: must be [i, j] with 0 <= i < j < number of charts")
            continue
        i, j = pair
        ci, cj = charts[i], charts[j]
        hi = _poly(o.get("h", "1"), ci.ring.vars, f"{at}.h", errors)
        hj = _poly(o.get("back_h", "1"), cj.ring.vars, f"{at}.back_h", errors)
        if hi is None or hj is None:
            continue
        ring = Ring(ci.ring.vars, hi * ci.ring.h)
        back_ring = Ring(cj.ring.vars, hj * cj.ring.h)
        fmap, bmap = o.get("map") or {}, o.get("back_map") or {}
        if set(fmap) != set(cj.ring.vars):
            errors.append(f"{at}.map: must give every variable of chart {j}: {list(cj.ring.vars)}")
            continue
        if set(bmap) != set(ci.ring.vars):
            errors.append(f"{at}.back_map: must give every variable of chart {i}: {list(ci.ring.vars)}")
            continue
        fwd = [_rf(fmap[v], ring, f"{at}.map[{v!r}]", errors) for v in cj.ring.vars]
        back = [_rf(bmap[v], back_ring, f"{at}.back_map[{v!r}]", errors) for v in ci.ring.vars]
        if None in fwd or None in back:
            continue
        overlaps[(i, j)] = Overlap(i, j, ring, tuple(fwd), back_ring, tuple(back))
        tr = _parse_transition(o, ring, ci, cj, at, errors)
        if tr is not None:
            transitions[(i, j)] = tr
    triples = {}
    for ti, t in enumerate(data.get("triples") or []):
        at = f"triples[{ti}]"
        idx = t.get("indices")
        if not (isinstance(idx, list) and len(idx) == 3 and idx == sorted(idx) and len(set(idx)) == 3
                and all(0 <= x < len(charts) for x in idx)):
            errors.append(f"{at}.indices: must be increasing [i, j, k] chart indices")
            continue
        h = _poly(t.get("h", "1"), charts[idx[0]].ring.vars, f"{at}.h", errors)
        if h is not None:
            triples[tuple(idx)] = Ring(charts[idx[0]].ring.vars, h * charts[idx[0]].ring.h)
    kind = data.get("cover_kind", "affine" if len(charts) == 1 else "generic")
    if kind not in ("affine", "p1", "generic"):
        errors.append(f"cover_kind: unknown kind {kind!r}")
    connections = []
    for k, c in enumerate(data.get("connections") or []):
        at = f"connections[{k}]"
        chart = c.get("chart", 0)
        if not isinstance(chart, int) or not 0 <= chart < len(charts):
            errors.append(f"{at}.chart: unknown chart")
            continue
        ring = charts[chart].ring
        terms = [_rf(v, ring, f"{at}.terms[{s}]", errors) for s, v in enumerate(c.get("terms", []))]
        if len(terms) != charts[chart].Y.r:
            errors.append(f"{at}.terms: need one term per null-frame vector ({charts[chart].Y.r})")
            continue
        if None in terms:
            continue
        connections.append(ConnectionSpec(c.get("name", f"connection{k}"), chart,
                                          _fraction(c.get("twist", 0), f"{at}.twist", errors), terms))
    assertions = {k: bool(v) for k, v in (data.get("assertions") or {}).items()}
    if errors:
        raise SceneError(errors)
    return Scene(
        name=data.get("name", "unnamed"),
        options=options,
        assertions=assertions,
        cover=Cover(charts, overlaps, triples, kind),
        transitions=transitions,
        connections=connections,
        expected=data.get("expected") or {},
        description=data.get("description", ""),
        raw=copy.deepcopy(data),
    )


def _parse_transition(o, ring: Ring, ci: Chart, cj: Chart, at: str, errors: List[str]) -> Optional[Transition]:
    r = ci.Y.r
    if cj.Y.r != r:
        errors.append(f"{at}: charts {ci.index} and {cj.index} have different codimension")
        return None
    A_raw = o.get("N")
    if A_raw is None:
        errors.append(f"{at}.N: normal-bundle transition matrix required")
        return None
    if not (isinstance(A_raw, list) and len(A_raw) == r and all(isinstance(row, list) and len(row) == r
                                                                for row in A_raw)):
        errors.append(f"{at}.N: must be a {r}x{r} matrix")
        return None
    A = [[_rf(v, ring, f"{at}.N[{s}][{p}]", errors) for p, v in enumerate(row)] for s, row in enumerate(A_raw)]
    if any(v is None for row in A for v in row):
        return None
    Yij = ci.Y.localize(ring)
    try:
        Ainv = mat_inverse(A, det_reducer=Yij.nf)
    except NotAUnitError:
        errors.append(f"{at}.N: transition matrix is not invertible on the overlap")
        return None
    B = Binv = B2 = B2inv = None
    for key in ("L", "L2"):
        if key in o:
            b = _rf(o[key], ring, f"{at}.{key}", errors)
            if b is None:
                return None
            if f"{key}_back" in o:
                # B^{ji} given explicitly; its product with B^{ij} is checked at validation
                binv = _rf(o[f"{key}_back"], ring, f"{at}.{key}_back", errors)
                if binv is None:
                    return None
            else:
                try:
                    binv = b.inverse()
                except NotAUnitError:
                    errors.append(f"{at}.{key}: B^{{{ci.index}{cj.index}}} = {b} is not a unit on the overlap")
                    return None
            if key == "L":
                B, Binv = b, binv
            else:
                B2, B2inv = b, binv
    beta = None
    if "kappa" in o:
        kap = o["kappa"] or {}
        bad = set(kap) - set(ring.vars)
        if bad:
            errors.append(f"{at}.kappa: unknown variables {sorted(bad)}")
            return None
        comps = []
        for v in ring.vars:
            comps.append(_rf(kap[v], ring, f"{at}.kappa[{v!r}]", errors) if v in kap else ring.zero())
        if None in comps:
            return None
        beta = VectorField(ring, comps)
    return Transition(A, Ainv, B, Binv, B2, B2inv, beta)


# -- load-time invariants ---------------------------------------------------

def validate_scene(scene: Scene) -> List[str]:
    cover = scene.cover
    errs = list(cover.check())
    if errs:
        return errs
    for (i, j), ov in sorted(cover.overlaps.items()):
        at = f"overlaps[{i},{j}]"
        tr = scene.transitions.get((i, j))
        if tr is None:
            continue
        ring = ov.ring
        ci, cj = cover.charts[i], cover.charts[j]
        Yij = cover.Y((i, j))
        # bivectors agree: {phi^* u, phi^* v}_i = phi^* {u, v}_j
        Pi = ci.P.localize(ring)
        for a in range(len(cj.ring.vars)):
            for b in range(a + 1, len(cj.ring.vars)):
                lhs = bracket(ov.fwd[a], ov.fwd[b], Pi)
                rhs = cover.pull(cj.P.matrix[a][b], i, j, ring)
                if lhs != rhs:
                    errs.append(f"{at}: bivectors disagree on ({cj.ring.vars[a]}, {cj.ring.vars[b]}): "
                                f"{lhs} != {rhs}")
        # x^i = A x^j mod I^2
        xj = [cover.pull(x, i, j, ring) for x in cj.Y.x]
        for s, xs in enumerate(ci.Y.x):
            combo = sum((tr.A[s][p] * xj[p] for p in range(1, len(xj))), tr.A[s][0] * xj[0])
            if Yij.ideal_sq.membership(xs.to_ring(ring) - combo) is not Verdict.TRUE:
                errs.append(f"{at}.N: x^{i}_{s} != sum_p A_sp x^{j}_p modulo I^2")
        prod = mat_mul(tr.A, tr.Ainv)
        for s, row in enumerate(prod):
            for p, v in enumerate(row):
                if Yij.in_ideal(v - (1 if s == p else 0)) is not Verdict.TRUE:
                    errs.append(f"{at}.N: A^{{{i}{j}}} A^{{{j}{i}}} != Id at ({s},{p})")
        for B, Binv, key in ((tr.B, tr.Binv, "L"), (tr.B2, tr.B2inv, "L2")):
            if B is not None and not (B * Binv - 1).is_zero():
                errs.append(f"{at}.{key}: B^{{{i}{j}}} B^{{{j}{i}}} != 1 for the pair ({i}, {j}): product is {B * Binv}")
    for (i, j, k), ring in sorted(cover.triples.items()):
        at = f"triples[{i},{j},{k}]"
        tij, tjk, tik = (scene.transitions.get(p) for p in ((i, j), (j, k), (i, k)))
        if None in (tij, tjk, tik):
            errs.append(f"{at}: missing transition data")
            continue
        Y = cover.Y(ring)
        Aij = [[a.to_ring(ring) for a in row] for row in tij.A]
        Ajk = [[cover.pull(a, i, j, ring) for a in row] for row in tjk.A]
        Aik = [[a.to_ring(ring) for a in row] for row in tik.A]
        for s, row in enumerate(mat_mul(Aij, Ajk)):
            for p, v in enumerate(row):
                if Y.in_ideal(v - Aik[s][p]) is not Verdict.TRUE:
                    errs.append(f"{at}.N: A^{{{i}{j}}}A^{{{j}{k}}} != A^{{{i}{k}}} at ({s},{p})")
        for key in ("B", "B2"):
            bij, bjk, bik = getattr(tij, key), getattr(tjk, key), getattr(tik, key)
            if bij is None and bjk is None and bik is None:
                continue
            if None in (bij, bjk, bik):
                errs.append(f"{at}: bundle {key} missing on some overlap")
                continue
            if bij.to_ring(ring) * cover.pull(bjk, i, j, ring) != bik.to_ring(ring):
                errs.append(f"{at}.{'L' if key == 'B' else 'L2'}: B^{{{i}{j}}}B^{{{j}{k}}} != B^{{{i}{k}}}")
        from .cech import transport
        betas = [t.beta for t in (tij, tjk, tik)]
        if any(b is not None for b in betas):
            zero = lambda rng: VectorField(rng, [rng.zero()] * len(rng.vars))
            bij = (betas[0] or zero(cover.ring((i, j)))).components
            bjk = (betas[1] or zero(cover.ring((j, k)))).components
            bik = (betas[2] or zero(cover.ring((i, k)))).components
            pushed = transport("vectors", bjk, i, j, ring, scene)
            for a, (x, y, z) in enumerate(zip(bij, pushed, bik)):
                if x.to_ring(ring) + y != z.to_ring(ring):
                    errs.append(f"{at}.kappa: beta_ij + beta_jk != beta_ik in component {ring.vars[a]}")
    return errs


# -- transformations --------------------------------------------------------

def side_flip(scene: Scene) -> Scene:
    """The same scene with P replaced by -P (right modules)."""
    charts = [Chart(c.index, c.name, c.ring, -c.P, c.Y) for c in scene.cover.charts]
    cover = Cover(charts, scene.cover.overlaps, scene.cover.triples, scene.cover.kind)
    options = dict(scene.options)
    options["side"] = "right" if scene.side == "left" else "left"
    raw = copy.deepcopy(scene.raw)
    for c in raw.get("charts", []):
        c["bivector"] = {k: _negate_literal(v) for k, v in (c.get("bivector") or {}).items()}
    raw.setdefault("options", {})["side"] = options["side"]
    return Scene(scene.name, options, dict(scene.assertions), cover, dict(scene.transitions),
                 list(scene.connections), dict(scene.expected), scene.description, raw)


def _negate_literal(v):
    if isinstance(v, list):
        return [f"-({v[0]})", v[1]]
    return f"-({v})"


def with_options(scene: Scene, **opts) -> Scene:
    options = dict(scene.options)
    options.update({k: v for k, v in opts.items() if v is not None})
    return Scene(scene.name, options, scene.assertions, scene.cover, scene.transitions, scene.connections,
                 scene.expected, scene.description, scene.raw)
