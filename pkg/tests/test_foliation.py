import random
from fractions import Fraction

import pytest

from coiso_quant.core.poly import Poly
from coiso_quant.core.ring import Ring
from coiso_quant.deformation import build_alpha_L
from coiso_quant.errors import PreconditionError
from coiso_quant.foliation import (Involution, PartialConnection, bracket_defect, connection, connection_from_spec,
                                   curvature, extract_gamma, gamma_identities, gamma_M, glue_gamma,
                                   star_involution, twist)
from coiso_quant.poisson import Bivector, SubvarietyChart, is_poisson
from coiso_quant.scenes import load_bundled

from helpers import random_poly

SINGLE = ["t-star-a1-zero-section", "t-star-a2-zero-section", "hypersurface-q1-a4", "graph-lagrangian-q1sq-q2"]


def _chart(name):
    return load_bundled(name).charts[0]


def _gamma(name):
    ch = _chart(name)
    return extract_gamma(build_alpha_L(ch.Y, ch.P))


@pytest.mark.parametrize("name", SINGLE + ["p1-in-t-star-p1-O(1)"])
def test_extracted_gamma_satisfies_identities(name):
    g = _gamma(name)
    assert g.twist == Fraction(1, 2)
    ids = gamma_identities(g)
    assert ids["gamma_one"] and ids["gamma_two"]


@pytest.mark.parametrize("name", SINGLE)
def test_star_involution_round_trip(name):
    g = _gamma(name)
    chk = star_involution(g)
    assert chk.ok
    back = chk.involution.recover()
    assert back.equals(g)


@pytest.mark.parametrize("name", SINGLE)
def test_untwisted_gamma_fails_with_pair(name):
    g = _gamma(name)
    bad = PartialConnection(g.chart, g.P, g.frame, g.terms, 0)
    ids = gamma_identities(bad)
    assert not ids["gamma_one"] and ids["gamma_two"]
    chk = star_involution(bad)
    assert not chk.ok
    s, f = chk.failing_pair
    assert 0 <= s < g.rank and f != "1"


def test_recover_detects_twist_from_operator():
    g = _gamma("t-star-a2-zero-section")
    other = PartialConnection(g.chart, g.P, g.frame, g.terms, Fraction(3, 7))
    assert Involution(other).recover().twist == Fraction(3, 7)


@pytest.mark.parametrize("name", SINGLE)
def test_bracket_defect_routes_agree(name):
    d = bracket_defect(_gamma(name))
    assert d.formula_agrees and d.is_zero


def _flat_shift(rng, g):
    """Shift by v_s(f): flat for every f."""
    f = g.ring.poly(random_poly(rng, g.ring.vars, 3))
    return g.shifted([v.apply(f) for v in g.frame])


@pytest.mark.parametrize("name", ["t-star-a1-zero-section", "t-star-a2-zero-section", "hypersurface-q1-a4"])
def test_gamma_m_of_compatible_pair_is_flat(name):
    rng = random.Random(11)
    g1 = _gamma(name)
    for _ in range(3):
        g2 = _flat_shift(rng, g1)
        assert bracket_defect(g2).is_zero
        gm = gamma_M(g1, g2)
        assert gm.twist == 0
        assert curvature(gm).is_zero


def test_seeded_nonflat_connection():
    s = load_bundled("t-star-a2-nonflat-connection")
    conn = connection_from_spec(s, s.connections[0])
    k = curvature(conn)
    assert not k.is_zero
    assert str(k.entry(0, 1)) in ("1", "-1")
    assert k.entry(1, 0) == -k.entry(0, 1)


def test_twist_gamma_m_round_trip():
    rng = random.Random(5)
    ch = _chart("t-star-a2-zero-section")
    g1 = _gamma("t-star-a2-zero-section")
    for _ in range(10):
        terms = [ch.ring.poly(random_poly(rng, ch.ring.vars, 2)) for _ in range(ch.Y.r)]
        conn = connection(ch.Y, ch.P, terms)
        g2 = twist(conn, g1)
        assert g2.twist == g1.twist
        assert gamma_M(g1, g2).equals(conn)
        assert twist(gamma_M(g1, g2), g1).equals(g2)


def test_curvature_of_twisted_gamma_is_gamma_curvature():
    ch = _chart("t-star-a2-zero-section")
    g1 = _gamma("t-star-a2-zero-section")
    conn = connection(ch.Y, ch.P, ["0", "q1"])
    assert bracket_defect(twist(conn, g1)).entries == curvature(conn).entries


def test_curvature_requires_untwisted():
    with pytest.raises(PreconditionError, match="twist"):
        curvature(_gamma("t-star-a1-zero-section"))


def test_second_order_requires_jacobi():
    ring = Ring(("a", "b", "c", "d"))
    P = Bivector.from_upper(ring, {(0, 1): Poly.one(ring.vars), (2, 3): Poly.one(ring.vars),
                                   (0, 2): Poly.variable("a", ring.vars)})
    assert not is_poisson(P)
    Y = SubvarietyChart(ring, [ring.var("b")], [ring.var("a"), ring.var("c"), ring.var("d")])
    with pytest.raises(PreconditionError, match="Poisson"):
        bracket_defect(connection(Y, P, ["0"]))


def test_glue_gamma_on_p1():
    assert glue_gamma(load_bundled("p1-in-t-star-p1-O(-1)")).glues
    res = glue_gamma(load_bundled("p1-in-t-star-p1-O(0)"))
    assert not res.glues and not res.mismatch.is_zero()


def test_glue_requires_tangent_kappa():
    with pytest.raises(PreconditionError, match="kappa"):
        glue_gamma(load_bundled("p1-kappa-in-t-star-p1-O(0)"))
