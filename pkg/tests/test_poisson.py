import random

import pytest
from hypothesis import given, settings, strategies as st

from coiso_quant.core.ring import Ring, Verdict
from coiso_quant.errors import PreconditionError
from coiso_quant.poisson import (Bivector, SubvarietyChart, bracket, involutive, is_coisotropic, is_poisson,
                                 jacobi_defect, nondegenerate, null_frame)
from coiso_quant.scenes import load_bundled

from helpers import random_poly

A4 = Ring(("q1", "p1", "q2", "p2"))
STD = Bivector.symplectic(A4, [("q1", "p1"), ("q2", "p2")])
R3 = Ring(("x", "y", "z"))

seeds = st.integers(0, 10 ** 9)


def _random_bivector(rng, ring, degree=1):
    n = len(ring.vars)
    return Bivector.from_upper(ring, {(a, b): random_poly(rng, ring.vars, degree, 2)
                                      for a in range(n) for b in range(a + 1, n)})


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_bracket_antisymmetric_and_leibniz(seed):
    rng = random.Random(seed)
    P = _random_bivector(rng, R3)
    f, g, h = (R3.poly(random_poly(rng, R3.vars, 2)) for _ in range(3))
    assert bracket(f, g, P) == -bracket(g, f, P)
    assert bracket(f, g * h, P) == bracket(f, g, P) * h + g * bracket(f, h, P)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_constant_bivectors_are_poisson(seed):
    P = _random_bivector(random.Random(seed), A4, degree=0)
    assert is_poisson(P)


def test_jacobi_values():
    so3 = load_bundled("so3-linear-poisson").charts[0].P
    assert all(v.is_zero() for v in jacobi_defect(so3).values())
    bad = load_bundled("non-jacobi").charts[0].P
    d = jacobi_defect(bad)
    assert str(d[("x", "y", "z")]) == "-z"
    assert not is_poisson(bad)


def test_nondegenerate():
    assert nondegenerate(STD)
    assert not nondegenerate(load_bundled("so3-linear-poisson").charts[0].P)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_random_hypersurfaces_coisotropic(seed):
    f = A4.poly(random_poly(random.Random(seed), A4.vars, 3, 5))
    if f.num.is_constant():
        return
    Y = SubvarietyChart(A4, [f])
    assert is_coisotropic(Y, STD).verdict is Verdict.TRUE


def test_symplectic_plane_not_coisotropic():
    Y = SubvarietyChart(A4, [A4.var("q1"), A4.var("p1")])
    res = is_coisotropic(Y, STD)
    assert res.verdict is Verdict.FALSE
    assert res.certificate == {(0, 1): "1"}
    Y2 = SubvarietyChart(A4, [A4.var("p1"), A4.var("p2")])
    assert is_coisotropic(Y2, STD).verdict is Verdict.TRUE


def test_null_frame_and_involutivity():
    ch = load_bundled("graph-lagrangian-q1sq-q2").charts[0]
    frame = null_frame(ch.Y, ch.P)
    assert len(frame) == 2
    for v in frame:
        for x in ch.Y.x:
            assert ch.Y.in_ideal(v.apply(x)) is Verdict.TRUE
    assert involutive(frame, ch.Y)


def test_null_frame_preconditions():
    Y = SubvarietyChart(A4, [A4.var("q1"), A4.var("p1")])
    with pytest.raises(PreconditionError, match="coisotropic"):
        null_frame(Y, STD)
    so3 = load_bundled("so3-linear-poisson").charts[0]
    with pytest.raises(PreconditionError, match="nondegenerate"):
        null_frame(so3.Y, so3.P)
