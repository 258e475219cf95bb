import random

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from coiso_quant.cech import TAGS, CechCochain, cech_d, coboundary_solve, laurent_coefficients, shape
from coiso_quant.core.poly import Poly
from coiso_quant.core.ring import RatFunc
from coiso_quant.errors import PreconditionError
from coiso_quant.scenes import load_bundled

from helpers import dense_coboundary_oracle, laurent_to_rf, p1_scene, random_laurent, random_poly

THREE = load_bundled("p1-three-chart-O(0)")
P1 = p1_scene(0)


def _random_cochain(rng, scene, degree, tag):
    cover = scene.cover
    comps = {}
    for idx in cover.simplices(degree):
        ring = cover.ring(idx)
        n = 1
        for s in shape(tag, cover.charts[idx[0]]):
            n *= s
        comps[idx] = [RatFunc(random_poly(rng, ring.vars, 3), rng.randint(0, 2) if not ring.affine else 0, ring)
                      for _ in range(n)]
    return CechCochain(degree, tag, comps, cover)


@pytest.mark.parametrize("tag", TAGS)
@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 10 ** 9))
def test_d_squared_zero(tag, seed):
    c = _random_cochain(random.Random(seed), THREE, 0, tag)
    assert cech_d(cech_d(c, THREE), THREE).is_zero()


@pytest.mark.parametrize("tag", ["functions", "N", "forms"])
def test_coboundary_of_random_zero_cochain_is_recognized(tag):
    rng = random.Random(7)
    for _ in range(5):
        b = _random_cochain(rng, P1, 0, tag)
        res = coboundary_solve(cech_d(b, P1), P1)
        assert res.coboundary
        assert cech_d(res.witness, P1).equals(cech_d(b, P1))


@pytest.mark.parametrize("tag", ["functions", "N", "forms"])
def test_coboundary_solve_matches_dense_oracle(tag):
    rng = random.Random(2024)
    ring = P1.cover.ring((0, 1))
    for _ in range(20):
        coeffs = random_laurent(rng)
        c = CechCochain(1, tag, {(0, 1): [laurent_to_rf(coeffs, ring)]}, P1.cover)
        res = coboundary_solve(c, P1, 8)
        assert res.coboundary == dense_coboundary_oracle(coeffs, tag, 8), coeffs
        if res.coboundary:
            assert cech_d(res.witness, P1).equals(c)


def test_residue_rule_examples():
    ring = P1.cover.ring((0, 1))
    inv_z = RatFunc(Poly.one(ring.vars), 1, ring)
    fun = coboundary_solve(CechCochain(1, "functions", {(0, 1): [inv_z]}, P1.cover), P1)
    assert fun.coboundary
    for tag in ("N", "forms"):
        res = coboundary_solve(CechCochain(1, tag, {(0, 1): [inv_z]}, P1.cover), P1)
        assert res.verdict == "not-coboundary"
        assert "exact" in res.stability


def test_laurent_coefficients_reads_exponents():
    ring = P1.cover.ring((0, 1))
    Y = P1.cover.Y((0, 1))
    f = laurent_to_rf({-3: 2, 0: 1, 2: -5}, ring)
    assert laurent_coefficients(f, Y) == {-3: 2, 0: 1, 2: -5}


def test_three_chart_bounded_verdict_is_qualified():
    ring = THREE.cover.ring((0, 1))
    from coiso_quant.obstruction import obstruction_cocycle

    c = obstruction_cocycle(THREE)
    assert cech_d(c, THREE).is_zero()
    res = coboundary_solve(c, THREE, 4)
    assert res.verdict == "not-coboundary-at-bound-4"
    assert ring.vars == ("z", "p")


def test_non_cocycle_rejected():
    rng = random.Random(3)
    c = _random_cochain(rng, THREE, 1, "functions")
    if not cech_d(c, THREE).is_zero():
        with pytest.raises(PreconditionError):
            coboundary_solve(c, THREE)
