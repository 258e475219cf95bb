"""Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coiso_quant.cech import TAGS, CechCochain, cech_d, coboundary_solve  # noqa: E402
from coiso_quant.cli import run  # noqa: E402
from coiso_quant.core.ring import Verdict  # noqa: E402
from coiso_quant.deformation import (GaugeEquivalent, NotEquivalent, build_alpha_L, compare_lifts,  # noqa: E402
                                     gauge_term, verify_module_structure)
from coiso_quant.diffops import DiffOp, tensor  # noqa: E402
from coiso_quant.foliation import (PartialConnection, connection, connection_from_spec, curvature,  # noqa: E402
                                   extract_gamma, gamma_M, star_involution, twist)
from coiso_quant.obstruction import direct_cocycle, lagrangian_criterion, obstruction_class  # noqa: E402
from coiso_quant.poisson import jacobi_defect  # noqa: E402
from coiso_quant.scene import load_scene  # noqa: E402
from coiso_quant.scenes import load_bundled  # noqa: E402
from coiso_quant.scenes.catalog import _chart, _scene  # noqa: E402

from helpers import (P1_DEGREES, dense_coboundary_oracle, laurent_to_rf, monomial_basis, p1_scene,  # noqa: E402
                     random_laurent, random_poly, tangent_gauge)
from test_cech import _random_cochain  # noqa: E402
from test_obstruction import _random_gauges  # noqa: E402

A_SCENES = ["t-star-a1-zero-section", "t-star-a2-zero-section"]
B_SCENE = "hypersurface-q1-a4"
C_SCENE = "graph-lagrangian-q1sq-q2"
A4 = ["q1", "p1", "q2", "p2"]
STD = {"q1,p1": "1", "q2,p2": "1"}


def _gamma(ch):
    return extract_gamma(build_alpha_L(ch.Y, ch.P))


def _coisotropic(ideal):
    s = load_scene(_scene("ad-hoc", "", [_chart("U0", A4, STD, ideal)]))
    return run("check-coisotropic", s).results


def criterion_1():
    rng = random.Random(1)
    count = 0
    while count < 20:
        f = random_poly(rng, A4, 3, 5)
        if f.is_constant():
            continue
        count += 1
        if _coisotropic([str(f)])["coisotropic"] != "true":
            return False, f"hypersurface {f} reported non-coisotropic"
    bad = _coisotropic(["q1", "p1"])
    if bad["coisotropic"] != "false" or bad["charts"]["U0"]["brackets"] != [{"pair": ["q1", "p1"], "normal_form": "1"}]:
        return False, f"V(q1, p1): {bad}"
    if _coisotropic(["p1", "p2"])["coisotropic"] != "true":
        return False, "V(p1, p2) reported non-coisotropic"
    return True, "20 random hypersurfaces true; V(q1,p1) false with {q1,p1} = 1; V(p1,p2) true"


def criterion_2():
    names = A_SCENES + [B_SCENE, C_SCENE] + [f"p1-in-t-star-p1-O({d})" for d in P1_DEGREES]
    charts = 0
    for name in names:
        for ch in load_bundled(name).charts:
            rep = verify_module_structure(build_alpha_L(ch.Y, ch.P))
            charts += 1
            if not (rep["defect_zero"] and rep["vanishes_on_I2"]):
                return False, f"{name} chart {ch.name}: {rep}"
    return True, f"module defect and I^2-vanishing exact on {charts} charts of {len(names)} scenes"


def criterion_3():
    rng = random.Random(3)
    names = A_SCENES + [B_SCENE, C_SCENE, "p1-in-t-star-p1-O(1)"]
    for k in range(10):
        ch = load_bundled(names[k % len(names)]).charts[0]
        ms = build_alpha_L(ch.Y, ch.P)
        beta0 = tangent_gauge(rng, ch.Y, order=2)
        res = compare_lifts(ms, ms.shifted(gauge_term(beta0)))
        if not isinstance(res, GaugeEquivalent):
            return False, f"gauge {k}: not recognized as equivalent"
        for b in monomial_basis(ch.ring, 3):
            if ch.Y.in_ideal(res.beta.apply(b) - beta0.apply(b)) is not Verdict.TRUE:
                return False, f"gauge {k}: recovered operator differs on {b}"
    for name in names:
        ch = load_bundled(name).charts[0]
        ms = build_alpha_L(ch.Y, ch.P)
        pert = ms.shifted(tensor(ch.Y.Wx(0).as_diffop(), DiffOp.identity(ch.ring)))
        if not isinstance(compare_lifts(ms, pert), NotEquivalent):
            return False, f"{name}: normal perturbation reported equivalent"
    return True, "10 random gauges recovered exactly; normal perturbations not equivalent"


def criterion_4():
    found = []
    for d in P1_DEGREES:
        rep = lagrangian_criterion(p1_scene(d))
        if not rep.result.stability.startswith("exact"):
            return False, f"d = {d}: verdict not exact ({rep.result.stability})"
        if rep.deformable:
            found.append(d)
    return found == [-1], f"deformable for d in {found} among -3..3 (all verdicts exact)"


def criterion_5():
    for d in P1_DEGREES:
        s = p1_scene(d)
        base = obstruction_class(s)
        if base.deformable != lagrangian_criterion(s).deformable:
            return False, f"d = {d}: obstruction and Lagrangian criteria disagree"
        rng = random.Random(500 + d)
        for _ in range(3):
            structures, eta = _random_gauges(rng, s)
            if not direct_cocycle(s, structures).equals(base.cocycle - cech_d(eta, s)):
                return False, f"d = {d}: gauged cocycle is not cohomologous"
            if obstruction_class(s, structures=structures).verdict != base.verdict:
                return False, f"d = {d}: verdict changed under a gauge"
    return True, "7 scenes agree; 3 random gauges each leave the verdict unchanged"


def criterion_6():
    for name in A_SCENES + [B_SCENE, C_SCENE]:
        g = _gamma(load_bundled(name).charts[0])
        chk = star_involution(g)
        if not chk.ok or not chk.involution.recover().equals(g):
            return False, f"{name}: involution failed or did not round-trip"
        bad = PartialConnection(g.chart, g.P, g.frame, g.terms, 0)
        chk = star_involution(bad)
        if chk.ok or chk.failing_pair is None:
            return False, f"{name}: untwisted splitting not rejected"
    return True, "valid splittings round-trip; untwisted splitting rejected with a failing pair"


def criterion_7():
    rng = random.Random(7)
    for name in A_SCENES + [B_SCENE]:
        g1 = _gamma(load_bundled(name).charts[0])
        f = g1.ring.poly(random_poly(rng, g1.ring.vars, 3))
        g2 = g1.shifted([v.apply(f) for v in g1.frame])
        if not curvature(gamma_M(g1, g2)).is_zero:
            return False, f"{name}: gamma_M of a compatible pair is curved"
    s = load_bundled("t-star-a2-nonflat-connection")
    k = curvature(connection_from_spec(s, s.connections[0]))
    entry = k.entry(0, 1)
    if str(entry) not in ("1", "-1"):
        return False, f"seeded connection: curvature entry {entry}"
    ch = load_bundled("t-star-a2-zero-section").charts[0]
    g1 = _gamma(ch)
    for _ in range(10):
        conn = connection(ch.Y, ch.P, [ch.ring.poly(random_poly(rng, ch.ring.vars, 2)) for _ in range(ch.Y.r)])
        if not gamma_M(g1, twist(conn, g1)).equals(conn):
            return False, "twist then gamma_M is not the identity"
    return True, f"compatible pairs flat; seeded entry {entry}; 10 round-trips exact"


def criterion_8():
    three = load_bundled("p1-three-chart-O(0)")
    for tag in TAGS:
        rng = random.Random(hash(tag) % 1000)
        for _ in range(50):
            c = _random_cochain(rng, three, 0, tag)
            if not cech_d(cech_d(c, three), three).is_zero():
                return False, f"d^2 != 0 for tag {tag}"
    P1 = p1_scene(0)
    ring = P1.cover.ring((0, 1))
    rng = random.Random(8)
    disagreements = 0
    for tag in ("functions", "N", "forms"):
        for _ in range(20):
            coeffs = random_laurent(rng)
            c = CechCochain(1, tag, {(0, 1): [laurent_to_rf(coeffs, ring)]}, P1.cover)
            if coboundary_solve(c, P1, 8).coboundary != dense_coboundary_oracle(coeffs, tag, 8):
                disagreements += 1
    if disagreements:
        return False, f"{disagreements} disagreements with the dense oracle"
    return True, f"d^2 = 0 on 50 cochains x {len(TAGS)} tags; 60 cocycles agree with the dense oracle"


def criterion_9():
    so3 = jacobi_defect(load_bundled("so3-linear-poisson").charts[0].P)
    if not all(v.is_zero() for v in so3.values()):
        return False, "so(3) bracket has a Jacobi defect"
    bad = jacobi_defect(load_bundled("non-jacobi").charts[0].P)
    val = bad[("x", "y", "z")]
    return str(val) == "-z", f"so(3) defect 0; J(x, y, z) = {val}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


def _run(k, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    ok = ok and dt < 60
    return ok, f"criterion {k}: {'PASS' if ok else 'FAIL'} ({dt:.1f}s) {detail}"


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k, capsys):
    ok, line = _run(k, CRITERIA[k - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_run(k, fn) for k, fn in enumerate(CRITERIA, 1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
