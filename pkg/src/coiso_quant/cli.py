"""Command-line driver: ``coiso <command> --scene <path-or-bundled-name> ...``.

Every command maps onto one library operation and returns a :class:`Report`.
Exit status: 0 when a verdict was computed (including verdicts qualified by
the degree bound), 2 for invalid scenes or unmet hypotheses, 3 when an
identity that holds by construction fails.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from . import __version__
from .deformation import (GaugeEquivalent, build_alpha_L, check_module_structure, compare_lifts,
                          gauge_term, star_product_check, verify_module_structure)
from .diffops import DiffOp, tensor
from .errors import CoisoError, InconsistencyError, PreconditionError, SceneError
from .foliation import (bracket_defect, connection_from_spec, curvature, extract_gamma, gamma_identities,
                        gamma_M, glue_gamma, require_section4, star_involution, twist)
from .obstruction import lagrangian_criterion, obstruction_class
from .poisson import involutive, is_coisotropic, is_poisson, jacobi_defect, nondegenerate, null_frame
from .report import Report
from .scene import Scene, load_scene, side_flip, with_options
from .scenes import DATA, bundled_names


def _charts(scene: Scene, fn: Callable) -> Dict[str, Any]:
    return {ch.name: fn(ch) for ch in scene.charts}


def _gamma(ch):
    return extract_gamma(build_alpha_L(ch.Y, ch.P))


# -- commands ------------------------------------------------------------------

def cmd_check_jacobi(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        d = jacobi_defect(ch.P)
        return {"poisson": all(v.is_zero() for v in d.values()),
                "defect": {",".join(k): str(v) for k, v in sorted(d.items()) if not v.is_zero()}}
    return {"charts": _charts(scene, one)}


def cmd_check_coisotropic(scene: Scene) -> Dict[str, Any]:
    out = _charts(scene, lambda ch: is_coisotropic(ch.Y, ch.P).to_json())
    verdicts = {v["verdict"] for v in out.values()}
    overall = "false" if "false" in verdicts else ("undecided" if "undecided" in verdicts else "true")
    return {"coisotropic": overall, "charts": out}


def cmd_null_foliation(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        frame = null_frame(ch.Y, ch.P)
        return {"frame": [v.to_json() for v in frame], "involutive": involutive(frame, ch.Y).to_json()}
    return {"charts": _charts(scene, one)}


def cmd_build_deformation(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        ms = build_alpha_L(ch.Y, ch.P)
        return {"structure": ms.to_json(), "identities": check_module_structure(ms),
                "monomial_check": _plain_check(verify_module_structure(ms))}
    return {"charts": _charts(scene, one)}


def _plain_check(rep):
    return {k: (v if isinstance(v, bool) or v is None else str(v)) for k, v in rep.items()}


def cmd_verify_associativity(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        ms = build_alpha_L(ch.Y, ch.P)
        rep = verify_module_structure(ms)
        ok, where = star_product_check(ms)
        passed = bool(rep["defect_zero"] and rep["vanishes_on_I2"] and ok)
        out = {"pass": passed, "module_identities": _plain_check(rep), "star_product_associative": ok}
        if where is not None:
            out["failing_triple"] = str(where)
        return out
    res = _charts(scene, one)
    return {"pass": all(v["pass"] for v in res.values()), "charts": res}


def _sample_gauge(Y) -> DiffOp:
    """A fixed order-2 operator along Y: W_y0 o W_y0 + y_0 W_y(last) + 1."""
    Y.require_frame()
    ring = Y.ring
    w0 = Y.Wy(0).as_diffop()
    op = w0.compose(w0) + DiffOp.multiplication(Y.y[0]).compose(Y.Wy(Y.m - 1).as_diffop())
    return op + DiffOp.identity(ring)


def cmd_compare_lifts(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        ms = build_alpha_L(ch.Y, ch.P)
        beta0 = _sample_gauge(ch.Y)
        res = compare_lifts(ms, ms.shifted(gauge_term(beta0), "gauged"))
        recovered = False
        if isinstance(res, GaugeEquivalent):
            # beta is determined up to a multiplication operator
            diff = (res.beta - beta0).reduce(ch.Y.ideal)
            recovered = all(not any(mu) for key in diff.coeffs for mu in key)
        ident = DiffOp.identity(ch.ring)
        perturbed = ms.shifted(tensor(ch.Y.Wx(0).as_diffop(), ident), "normal perturbation") \
            if ch.Y.has_frame else None
        out = {"gauge": beta0.to_json(), "gauge_result": res.to_json(), "gauge_recovered": recovered}
        if perturbed is not None:
            out["normal_perturbation"] = compare_lifts(ms, perturbed).to_json()
        return out
    return {"charts": _charts(scene, one)}


def cmd_obstruction(scene: Scene) -> Dict[str, Any]:
    rep = obstruction_class(scene)
    return {"verdict": rep.verdict, "deformable": rep.deformable, "report": rep.to_json()}


def cmd_lagrangian(scene: Scene) -> Dict[str, Any]:
    rep = lagrangian_criterion(scene)
    return {"verdict": rep.verdict, "deformable": rep.deformable, "report": rep.to_json()}


def cmd_h2_class(scene: Scene) -> Dict[str, Any]:
    rep = obstruction_class(scene)
    if not rep.h1.coboundary:
        return {"computed": False, "reason": "the class in H^1(Y, N) is nonzero; no transitions to compare",
                "h1_verdict": rep.h1.verdict}
    out: Dict[str, Any] = {"computed": True,
                           "transition_solve": rep.transitions.to_json() if rep.transitions else None}
    if rep.h2 is not None:
        out["verdict"] = rep.h2.verdict
        out["h2"] = rep.h2.to_json()
    else:
        out["verdict"] = "no triple overlaps"
    return out


def cmd_gamma(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        g = _gamma(ch)
        return {"gamma": g.to_json(), "identities": {k: v if isinstance(v, bool) or v is None else str(v)
                                                     for k, v in gamma_identities(g).items()}}
    out: Dict[str, Any] = {"charts": _charts(scene, one)}
    require_section4(scene)
    out["glue"] = glue_gamma(scene).to_json()
    return out


def cmd_involution(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        g = _gamma(ch)
        chk = star_involution(g)
        out = chk.to_json()
        out["round_trip"] = chk.ok and chk.involution.recover().equals(g)
        return out
    return {"charts": _charts(scene, one)}


def cmd_bracket_compat(scene: Scene) -> Dict[str, Any]:
    def one(ch):
        d = bracket_defect(_gamma(ch))
        out = d.to_json()
        out["compatible"] = d.is_zero
        return out
    return {"charts": _charts(scene, one)}


def _connections(scene: Scene, fn: Callable) -> Dict[str, Any]:
    if not scene.connections:
        raise PreconditionError("scene declares no partial connections")
    return {spec.name: fn(spec, connection_from_spec(scene, spec)) for spec in scene.connections}


def cmd_gamma_m(scene: Scene) -> Dict[str, Any]:
    def one(spec, conn):
        g1 = _gamma(scene.charts[spec.chart])
        g2 = twist(conn, g1)
        gm = gamma_M(g1, g2)
        return {"gamma_1": g1.to_json(), "gamma_2": g2.to_json(), "gamma_M": gm.to_json(),
                "reproduces_connection": gm.equals(conn), "curvature": curvature(gm).to_json()}
    return {"connections": _connections(scene, one)}


def cmd_twist(scene: Scene) -> Dict[str, Any]:
    def one(spec, conn):
        g1 = _gamma(scene.charts[spec.chart])
        g2 = twist(conn, g1)
        return {"twisted": g2.to_json(), "bracket_defect": bracket_defect(g2).to_json(),
                "round_trip": gamma_M(g1, g2).equals(conn)}
    return {"connections": _connections(scene, one)}


def cmd_curvature(scene: Scene) -> Dict[str, Any]:
    return {"connections": _connections(scene, lambda spec, conn: curvature(conn).to_json())}


def cmd_side_flip(scene: Scene) -> Dict[str, Any]:
    flipped = side_flip(scene)
    left, right = (scene, flipped) if scene.side == "left" else (flipped, scene)
    return {"flipped_scene": flipped.raw,
            "left": obstruction_class(left).verdict,
            "right": obstruction_class(right).verdict}


def _attempt(fn, scene):
    try:
        return {"status": "computed", "result": fn(scene)}
    except PreconditionError as e:
        return {"status": "skipped", "reason": str(e)}


def cmd_audit(scene: Scene) -> Dict[str, Any]:
    steps: Dict[str, Any] = {}
    steps["1-check-jacobi"] = cmd_check_jacobi(scene)
    steps["2-check-coisotropic"] = cmd_check_coisotropic(scene)
    if steps["2-check-coisotropic"]["coisotropic"] != "true":
        return {"steps": steps, "stopped": "the subvariety is not coisotropic"}
    steps["3-build-deformation"] = _attempt(cmd_build_deformation, scene)
    steps["4-obstruction"] = _attempt(cmd_obstruction, scene)
    steps["5-h2-class"] = _attempt(cmd_h2_class, scene)
    if all(nondegenerate(ch.P) for ch in scene.charts) and all(is_poisson(ch.P) for ch in scene.charts):
        steps["6-lagrangian"] = _attempt(cmd_lagrangian, scene)
        steps["7-gamma"] = _attempt(cmd_gamma, scene)
        steps["8-involution"] = _attempt(cmd_involution, scene)
        steps["9-bracket-compat"] = _attempt(cmd_bracket_compat, scene)
        if scene.connections:
            steps["10-curvature"] = _attempt(cmd_curvature, scene)
    return {"steps": steps}


COMMANDS: Dict[str, Callable[[Scene], Dict[str, Any]]] = {
    "check-jacobi": cmd_check_jacobi,
    "check-coisotropic": cmd_check_coisotropic,
    "null-foliation": cmd_null_foliation,
    "build-deformation": cmd_build_deformation,
    "verify-associativity": cmd_verify_associativity,
    "compare-lifts": cmd_compare_lifts,
    "obstruction": cmd_obstruction,
    "lagrangian": cmd_lagrangian,
    "h2-class": cmd_h2_class,
    "gamma": cmd_gamma,
    "involution": cmd_involution,
    "bracket-compat": cmd_bracket_compat,
    "gamma-m": cmd_gamma_m,
    "twist": cmd_twist,
    "curvature": cmd_curvature,
    "side-flip": cmd_side_flip,
    "audit": cmd_audit,
}


def _summary(command: str, results: Dict[str, Any]) -> List[str]:
    if "verdict" in results:
        return [f"verdict: {results['verdict']}"]
    if "coisotropic" in results:
        return [f"coisotropic: {results['coisotropic']}"]
    if "pass" in results:
        return ["pass" if results["pass"] else "FAIL"]
    if command == "side-flip":
        return [f"left: {results['left']}", f"right: {results['right']}"]
    return []


def resolve_scene(ref: str) -> Scene:
    """A path to a scene file, or the name of a bundled scene."""
    p = Path(ref)
    if not p.exists() and (DATA / f"{ref}.json").exists():
        p = DATA / f"{ref}.json"
    return load_scene(p)


def run(command: str, scene: Scene, degree_bound: Optional[int] = None, side: Optional[str] = None) -> Report:
    if command not in COMMANDS:
        raise CoisoError(f"unknown command {command!r}")
    if degree_bound is not None:
        scene = with_options(scene, degree_bound=degree_bound)
    if side is not None and side != scene.side:
        scene = side_flip(scene)
    t0 = time.perf_counter()
    results = COMMANDS[command](scene)
    rep = Report(command, scene.name, scene.side, scene.degree_bound, results, _summary(command, results))
    rep.seconds = time.perf_counter() - t0
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coiso", description="Exact checks for first-order deformations of "
                                 "line bundles on coisotropic subvarieties.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS) + ["list-scenes"])
    ap.add_argument("--scene", help="scene file, or the name of a bundled scene")
    ap.add_argument("--degree-bound", type=int, default=None)
    ap.add_argument("--side", choices=["left", "right"], default=None)
    ap.add_argument("--report", help="also write the machine-format report to this path")
    ap.add_argument("--format", choices=["human", "machine"], default="human")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenes":
        print("\n".join(bundled_names()))
        return 0
    if not args.scene:
        print("coiso: error: --scene is required", file=sys.stderr)
        return 2
    try:
        scene = resolve_scene(args.scene)
        rep = run(args.command, scene, args.degree_bound, args.side)
    except SceneError as e:
        for msg in e.errors:
            print(f"scene error: {msg}", file=sys.stderr)
        return e.exit_code
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return e.exit_code
    except InconsistencyError as e:
        print(f"internal inconsistency: {e}", file=sys.stderr)
        return e.exit_code
    except CoisoError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    sys.stdout.write(rep.machine() if args.format == "machine" else rep.human())
    if args.report:
        Path(args.report).write_text(rep.machine())
    return 0


if __name__ == "__main__":
    sys.exit(main())
