"""Builders for the bundled scenes.  ``python -m coiso_quant.scenes.catalog``
rewrites the JSON files in ``data/``."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

DATA = Path(__file__).with_name("data")
P1_DEGREES = range(-3, 4)


def _scene(name, description, charts, overlaps=(), triples=(), kind=None, assertions=None, connections=(),
           expected=None, options=None) -> Dict[str, Any]:
    out: Dict[str, Any] = {"schema_version": 1, "name": name, "description": description}
    if options:
        out["options"] = options
    out["cover_kind"] = kind or ("affine" if len(charts) == 1 else "generic")
    out["assertions"] = assertions or {}
    out["charts"] = list(charts)
    if overlaps:
        out["overlaps"] = list(overlaps)
    if triples:
        out["triples"] = list(triples)
    if connections:
        out["connections"] = list(connections)
    out["expected"] = expected or {}
    return out


def _chart(name, vars, bivector, ideal, complement=None, h="1"):
    sub: Dict[str, Any] = {"ideal": list(ideal)}
    if complement is not None:
        sub["complement"] = list(complement)
    return {"name": name, "vars": list(vars), "h": h, "bivector": dict(bivector), "subvariety": sub}


def t_star_a1() -> Dict[str, Any]:
    return _scene(
        "t-star-a1-zero-section",
        "Zero section p = 0 of the cotangent bundle of the affine line.",
        [_chart("U0", ["q", "p"], {"q,p": "1"}, ["p"], ["q"])],
        assertions={"H1_OY_zero": True, "H2_OY_zero": True, "regular_sequence": True},
        connections=[{"name": "flat", "chart": 0, "twist": "0", "terms": ["0"]}],
        expected={"coisotropic": True, "lagrangian": "deformable", "obstruction": "deformable"},
    )


def t_star_a2(name="t-star-a2-zero-section", terms=("0", "0"), flat=True) -> Dict[str, Any]:
    return _scene(
        name,
        "Zero section p1 = p2 = 0 of the cotangent bundle of the affine plane.",
        [_chart("U0", ["q1", "p1", "q2", "p2"], {"q1,p1": "1", "q2,p2": "1"}, ["p1", "p2"], ["q1", "q2"])],
        assertions={"H1_OY_zero": True, "H2_OY_zero": True, "regular_sequence": True},
        connections=[{"name": "connection", "chart": 0, "twist": "0", "terms": list(terms)}],
        expected={"coisotropic": True, "lagrangian": "deformable", "obstruction": "deformable", "flat": flat},
    )


def t_star_a2_nonflat() -> Dict[str, Any]:
    s = t_star_a2("t-star-a2-nonflat-connection", ("0", "q1"), flat=False)
    s["description"] = "Zero section of T*A^2 with a partial connection whose term q1 along the second frame vector is not flat."
    return s


def hypersurface() -> Dict[str, Any]:
    return _scene(
        "hypersurface-q1-a4",
        "The hypersurface q1 = 0 in the standard symplectic 4-space.",
        [_chart("U0", ["q1", "p1", "q2", "p2"], {"q1,p1": "1", "q2,p2": "1"}, ["q1"], ["p1", "q2", "p2"])],
        assertions={"H1_OY_zero": True, "H2_OY_zero": True, "regular_sequence": True},
        connections=[{"name": "flat", "chart": 0, "twist": "0", "terms": ["0"]}],
        expected={"coisotropic": True, "obstruction": "deformable"},
    )


def graph_lagrangian() -> Dict[str, Any]:
    return _scene(
        "graph-lagrangian-q1sq-q2",
        "Graph of d(q1^2 q2) in T*A^2: p1 = 2 q1 q2, p2 = q1^2.",
        [_chart("U0", ["q1", "p1", "q2", "p2"], {"q1,p1": "1", "q2,p2": "1"},
                ["p1 - 2*q1*q2", "p2 - q1^2"], ["q1", "q2"])],
        assertions={"H1_OY_zero": True, "H2_OY_zero": True, "regular_sequence": True},
        connections=[{"name": "flat", "chart": 0, "twist": "0", "terms": ["0", "0"]}],
        expected={"coisotropic": True, "lagrangian": "deformable", "obstruction": "deformable"},
    )


def non_coisotropic() -> Dict[str, Any]:
    return _scene(
        "non-coisotropic-q1-p1-a4",
        "The symplectic plane q1 = p1 = 0 in 4-space; not coisotropic.",
        [_chart("U0", ["q1", "p1", "q2", "p2"], {"q1,p1": "1", "q2,p2": "1"}, ["q1", "p1"], ["q2", "p2"])],
        expected={"coisotropic": False, "certificate": {"q1,p1": "1"}},
    )


def non_jacobi() -> Dict[str, Any]:
    return _scene(
        "non-jacobi",
        "A bivector {x,y} = y, {y,z} = z violating the Jacobi identity.",
        [_chart("U0", ["x", "y", "z"], {"x,y": "y", "y,z": "z"}, ["x"])],
        expected={"jacobi": {"x,y,z": "-z"}},
    )


def so3() -> Dict[str, Any]:
    return _scene(
        "so3-linear-poisson",
        "The linear Poisson structure of so(3) with the hypersurface x = 0.",
        [_chart("U0", ["x", "y", "z"], {"x,y": "z", "y,z": "x", "z,x": "y"}, ["x"])],
        expected={"jacobi": {}, "coisotropic": True},
    )


def _bundle_z(d: int, unit: str, sign: int = 1):
    """unit^(-d) as a scene literal over a ring whose denominator is ``unit``."""
    if d > 0:
        return [str(sign ** d), d]
    if d == 0:
        return "1"
    return f"({unit})^{-d}"


def p1(d: int, kappa: Optional[Dict[str, Any]] = None, name: Optional[str] = None,
       expected: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Zero section P^1 in T*P^1 with L = O(d): B^{01} = z^(-d)."""
    ov: Dict[str, Any] = {
        "pair": [0, 1], "h": "z", "map": {"w": ["1", 1], "r": "-z^2*p"},
        "back_h": "w", "back_map": {"z": ["1", 1], "p": "-w^2*r"},
        "N": [[["-1", 2]]], "L": _bundle_z(d, "z"),
    }
    if kappa is not None:
        ov["kappa"] = kappa
    if expected is None:
        ok = d == -1
        expected = {"coisotropic": True, "lagrangian": "deformable" if ok else "obstructed",
                    "obstruction": "deformable" if ok else "obstructed",
                    "right_obstruction": "deformable" if ok else "obstructed",
                    "obstruction_cocycle": {"0,1": [f"({1 + d})/z" if d != -1 else "0"]}}
    return _scene(
        name or f"p1-in-t-star-p1-O({d})",
        f"Zero section P^1 in T*P^1 on the two standard charts, L = O({d}) with B^01 = z^({-d}).",
        [_chart("U0", ["z", "p"], {"z,p": "1"}, ["p"], ["z"]),
         _chart("U1", ["w", "r"], {"w,r": "1"}, ["r"], ["w"])],
        [ov], kind="p1", assertions={"H2_OY_zero": True, "regular_sequence": True},
        expected=expected,
    )


def p1_kappa(d: int) -> Dict[str, Any]:
    """The P^1 family glued with beta_01 = (1/z) d/dp."""
    return p1(d, {"p": ["1", 1]}, f"p1-kappa-in-t-star-p1-O({d})", {
        "coisotropic": True,
        "obstruction": "deformable" if d == -2 else "obstructed",
        "right_obstruction": "deformable" if d == 0 else "obstructed",
        "lagrangian": "deformable" if d == -2 else "obstructed",
    })


def p1_three_charts(d: int) -> Dict[str, Any]:
    """P^1 in T*P^1 on charts z, w = 1/z and u = 1/(z - 1)."""
    overlaps = [
        {"pair": [0, 1], "h": "z", "map": {"w": ["1", 1], "r": "-z^2*p"},
         "back_h": "w", "back_map": {"z": ["1", 1], "p": "-w^2*r"},
         "N": [[["-1", 2]]], "L": _bundle_z(d, "z")},
        {"pair": [0, 2], "h": "z - 1", "map": {"u": ["1", 1], "s": "-(z - 1)^2*p"},
         "back_h": "u", "back_map": {"z": ["u + 1", 1], "p": "-u^2*s"},
         "N": [[["-1", 2]]], "L": _bundle_z(d, "z - 1")},
        {"pair": [1, 2], "h": "w - 1", "map": {"u": ["-w", 1], "s": "(1 - w)^2*r"},
         "back_h": "u + 1", "back_map": {"w": ["u", 1], "r": "(u + 1)^2*s"},
         "N": [[["1", 2]]], "L": _bundle_z(d, "w - 1", -1) if d > 0 else _bundle_z(d, "1 - w")},
    ]
    # no exact rule on this cover: a nonzero class is only reported at the degree bound
    bad = "obstructed-at-bound-8"
    ok = d == -1
    return _scene(
        f"p1-three-chart-O({d})",
        f"Zero section P^1 in T*P^1 on three charts with a triple overlap, L = O({d}).",
        [_chart("U0", ["z", "p"], {"z,p": "1"}, ["p"], ["z"]),
         _chart("U1", ["w", "r"], {"w,r": "1"}, ["r"], ["w"]),
         _chart("U2", ["u", "s"], {"u,s": "1"}, ["s"], ["u"])],
        overlaps, [{"indices": [0, 1, 2], "h": "z*(z - 1)"}], kind="generic",
        assertions={"regular_sequence": True},
        expected={"coisotropic": True, "lagrangian": "deformable" if ok else bad,
                  "obstruction": "deformable" if ok else bad},
    )


def all_scenes() -> List[Dict[str, Any]]:
    out = [t_star_a1(), t_star_a2(), t_star_a2_nonflat(), hypersurface(), graph_lagrangian(),
           non_coisotropic(), non_jacobi(), so3()]
    out += [p1(d) for d in P1_DEGREES]
    out += [p1_kappa(d) for d in (-2, 0, 2)]
    out += [p1_three_charts(d) for d in (-1, 0)]
    return out


def write_all(directory: Path = DATA) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in all_scenes():
        p = directory / f"{s['name']}.json"
        p.write_text(json.dumps(s, indent=2) + "\n")
        paths.append(p)
    return paths


if __name__ == "__main__":
    for p in write_all():
        print(p)
