"""Gauge freedom of first-order lifts on the zero section of T*A^2.

A tangent differential operator shifts the module structure without changing
its class; compare_lifts recovers it. A normal perturbation is not a gauge.
"""

from coiso_quant.deformation import build_alpha_L, compare_lifts, gauge_term
from coiso_quant.diffops import DiffOp, tensor
from coiso_quant.scenes import load_bundled


def main():
    ch = load_bundled("t-star-a2-zero-section").charts[0]
    ms = build_alpha_L(ch.Y, ch.P)
    W = ch.Y.Wy(0).as_diffop()
    beta0 = W.compose(W) + DiffOp.multiplication(ch.Y.y[0]).compose(ch.Y.Wy(1).as_diffop())
    res = compare_lifts(ms, ms.shifted(gauge_term(beta0)))
    print("tangent gauge:", type(res).__name__)
    print("  recovered beta:", res.beta)
    pert = ms.shifted(tensor(ch.Y.Wx(0).as_diffop(), DiffOp.identity(ch.ring)))
    res = compare_lifts(ms, pert)
    print("normal perturbation:", type(res).__name__)
    print("  reason:", res.reason)


if __name__ == "__main__":
    main()
