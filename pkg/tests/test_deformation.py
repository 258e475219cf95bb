import random

import pytest

from coiso_quant.deformation import (GaugeEquivalent, NotEquivalent, alpha_X, build_alpha_L, check_module_structure,
                                     compare_lifts, gauge_term, module_defect, star_product_check,
                                     verify_module_structure)
from coiso_quant.diffops import DiffOp, coefficient_zero, tensor
from coiso_quant.errors import PreconditionError
from coiso_quant.scenes import load_bundled

from helpers import monomial_basis, tangent_gauge

SCENES = ["t-star-a1-zero-section", "t-star-a2-zero-section", "hypersurface-q1-a4", "graph-lagrangian-q1sq-q2",
          "p1-in-t-star-p1-O(-1)"]


def _structures(name):
    s = load_bundled(name)
    return [build_alpha_L(ch.Y, ch.P) for ch in s.charts]


@pytest.mark.parametrize("name", SCENES)
def test_module_structure_identities(name):
    for ms in _structures(name):
        assert all(check_module_structure(ms).values())
        rep = verify_module_structure(ms)
        assert rep["defect_zero"] and rep["vanishes_on_I2"]
        assert rep["defect_witness"] is None


@pytest.mark.parametrize("name", SCENES)
def test_star_product_associative(name):
    for ms in _structures(name):
        ok, where = star_product_check(ms)
        assert ok, where


def test_alpha_X_is_half_bracket():
    ch = load_bundled("t-star-a2-zero-section").charts[0]
    aX = alpha_X(ch.P)
    ring = ch.ring
    for f in monomial_basis(ring, 2):
        for g in monomial_basis(ring, 2):
            assert aX.apply(f, g) * 2 == ch.P.bracket(f, g)


def test_non_coisotropic_has_defect():
    ch = load_bundled("non-coisotropic-q1-p1-a4").charts[0]
    with pytest.raises(PreconditionError):
        build_alpha_L(ch.Y, ch.P)


def test_module_defect_detects_wrong_operator():
    ms = _structures("t-star-a1-zero-section")[0]
    bad = ms.alpha_L + tensor(DiffOp.partial(ms.ring, 0), DiffOp.partial(ms.ring, 0))
    assert not coefficient_zero(module_defect(bad, ms.alpha_X), ms.chart.ideal)


@pytest.mark.parametrize("name", SCENES)
def test_compare_lifts_recovers_gauge(name):
    rng = random.Random(len(name))
    for ms in _structures(name):
        Y = ms.chart
        for _ in range(3):
            beta0 = tangent_gauge(rng, Y, order=2)
            res = compare_lifts(ms, ms.shifted(gauge_term(beta0)))
            assert isinstance(res, GaugeEquivalent)
            for b in monomial_basis(ms.ring, 3):
                assert Y.in_ideal(res.beta.apply(b) - beta0.apply(b)).value == "true"


def test_compare_lifts_modulo_multiplication():
    ms = _structures("t-star-a2-zero-section")[0]
    beta0 = tangent_gauge(random.Random(1), ms.chart, order=2, constant=True)
    res = compare_lifts(ms, ms.shifted(gauge_term(beta0)))
    assert isinstance(res, GaugeEquivalent)
    diff = (res.beta - beta0).reduce(ms.chart.ideal)
    assert all(not any(mu) for key in diff.coeffs for mu in key)


@pytest.mark.parametrize("name", SCENES)
def test_normal_perturbation_not_equivalent(name):
    for ms in _structures(name):
        Y = ms.chart
        pert = ms.shifted(tensor(Y.Wx(0).as_diffop(), DiffOp.identity(ms.ring)))
        res = compare_lifts(ms, pert)
        assert isinstance(res, NotEquivalent)
        assert 0 in res.certificate
