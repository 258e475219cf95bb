import copy
import json

import pytest

from coiso_quant.errors import SceneError
from coiso_quant.scene import load_scene, side_flip, with_options
from coiso_quant.scenes import bundled_names, bundled_path, load_bundled
from coiso_quant.scenes.catalog import all_scenes, p1


def test_bundled_files_match_catalog():
    for s in all_scenes():
        assert json.loads(bundled_path(s["name"]).read_text()) == s
    assert sorted(s["name"] for s in all_scenes()) == bundled_names()


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_scenes_load(name):
    s = load_bundled(name)
    assert s.name == name
    assert s.raw["schema_version"] == 1


def test_chart_counts():
    assert len(load_bundled("t-star-a2-zero-section").charts) == 1
    s = load_bundled("p1-in-t-star-p1-O(-1)")
    assert len(s.charts) == 2 and s.cover.kind == "p1"
    assert len(load_bundled("p1-three-chart-O(0)").cover.triples) == 1


def _errors(data):
    with pytest.raises(SceneError) as e:
        load_scene(data)
    return e.value.errors


def test_bundle_inverse_mismatch_names_pair():
    data = p1(1)
    data["overlaps"][0]["L_back"] = "z^2"
    errs = _errors(data)
    assert any("B^{01} B^{10} != 1" in m and "(0, 1)" in m for m in errs)


def test_consistent_explicit_inverse_accepted():
    data = p1(2)
    data["overlaps"][0]["L_back"] = "z^2"
    load_scene(data)


def test_bivector_disagreement():
    data = p1(0)
    data["charts"][1]["bivector"] = {"w,r": "2"}
    assert any("bivectors disagree" in m for m in _errors(data))


def test_normal_bundle_mismatch():
    data = p1(0)
    data["overlaps"][0]["N"] = [["1"]]
    assert any("modulo I^2" in m for m in _errors(data))


def test_schema_and_syntax_errors():
    data = p1(0)
    del data["schema_version"]
    assert any("schema_version" in m for m in _errors(data))
    data = p1(0)
    data["charts"][0]["bivector"] = {"z,p": "1 +"}
    assert any("charts[0].bivector" in m for m in _errors(data))
    with pytest.raises(SceneError, match="line 1"):
        load_scene("{not json")
    with pytest.raises(SceneError, match="not found"):
        load_scene("/nonexistent/scene.json")


def test_unknown_option_and_side():
    data = copy.deepcopy(p1(0))
    data["options"] = {"side": "middle", "colour": 1}
    errs = _errors(data)
    assert any("options.side" in m for m in errs) and any("options.colour" in m for m in errs)


def test_triple_cocycle_checked():
    data = load_bundled("p1-three-chart-O(-1)").raw
    data = copy.deepcopy(data)
    data["overlaps"][2]["L"] = "(1 - w)^2"
    data["overlaps"][2].pop("L_back", None)
    assert any("B^{01}B^{12} != B^{02}" in m for m in _errors(data))


def test_side_flip_and_options():
    s = load_bundled("p1-in-t-star-p1-O(0)")
    f = side_flip(s)
    assert f.side == "right" and side_flip(f).side == "left"
    assert f.charts[0].P.bracket(f.charts[0].ring.var("z"), f.charts[0].ring.var("p")) == -f.charts[0].ring.one()
    reloaded = load_scene(f.raw)
    assert reloaded.side == "right"
    assert with_options(s, degree_bound=3).degree_bound == 3
