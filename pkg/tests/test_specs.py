import json
import math

import numpy as np
import pytest

from ruledsurf.geometry import Mesh
from ruledsurf.specs import (
    SpecError,
    build_profile,
    fmt,
    load_spec,
    parse_spec,
    read_csv,
    read_obj,
    write_csv,
    write_obj,
    write_report,
)

HELICOID = {"invariants": {"builtin": "helicoid", "params": {"delta0": 1}},
            "domain": [0, 6.283], "v_range": [-2, 2], "grid": [64, 16]}


def test_load_helicoid(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps(HELICOID))
    spec = load_spec(path)
    assert spec.kind == "invariants"
    assert spec.domain == (0.0, 6.283) and spec.v_range == (-2.0, 2.0) and spec.grid == (64, 16)
    assert spec.to_json() == {**HELICOID, "domain": [0.0, 6.283], "v_range": [-2.0, 2.0]}
    p = build_profile(spec)
    assert p.delta(1.0) == 1.0 and p.k(1.0) == 0.0


def test_expression_spec_matches_builtin():
    from ruledsurf.cli import analyze_rows
    a = parse_spec(HELICOID)
    b = parse_spec({**HELICOID, "invariants": {"k": "0.0", "delta": "1", "lambda": "0"}})
    np.testing.assert_allclose(analyze_rows(a), analyze_rows(b), rtol=1e-12, atol=1e-12)


def test_sigma_spec():
    spec = parse_spec({"invariants": {"k": "-1", "delta": "1", "sigma": "pi/4"}, "domain": [0, 1]})
    p = build_profile(spec)
    assert p.lam(0.5) == pytest.approx(1.0, rel=1e-15)


def test_defaults():
    spec = parse_spec({"invariants": {"k": "0", "delta": "1", "lambda": "0"}, "domain": [0, 1]})
    assert spec.v_range == (-2.0, 2.0) and spec.grid == (32, 16)
    assert spec.tolerances()["fit"] == 1e-8


def test_parametrization_spec_uses_extraction_tolerances():
    spec = parse_spec({"parametrization": {"directrix": ["0", "0", "u"], "direction": ["cos(u)", "sin(u)", "0"]},
                       "domain": [0, 6], "tol": {"roundtrip": 1e-5}})
    assert spec.tolerances()["fit"] == 1e-4 and spec.tolerances()["roundtrip"] == 1e-5
    p = build_profile(spec)
    assert p.delta(3.0) == pytest.approx(1.0, abs=1e-9)


def test_torsal_spec_rejected():
    with pytest.raises(SpecError) as info:
        parse_spec({"invariants": {"k": "0", "delta": "sin(u)", "lambda": "0"}, "domain": [0, math.pi]})
    assert info.value.path == "invariants.delta"
    assert "torsal" in info.value.message


BASE = {"invariants": {"k": "0", "delta": "1", "lambda": "0"}, "domain": [0, 1]}

MALFORMED = [
    ([1, 2], ""),
    ({"domain": [0, 1]}, "invariants"),
    ({**BASE, "parametrization": {"directrix": ["0", "0", "u"], "direction": ["1", "0", "0"]}}, "parametrization"),
    ({"invariants": BASE["invariants"]}, "domain"),
    ({**BASE, "domain": [1, 0]}, "domain"),
    ({**BASE, "domain": [0, "one"]}, "domain[1]"),
    ({**BASE, "grid": [1, 5]}, "grid"),
    ({**BASE, "v_range": [0]}, "v_range"),
    ({**BASE, "colour": "red"}, "colour"),
    ({**BASE, "invariants": {"k": "0", "delta": "1 +* u", "lambda": "0"}}, "invariants.delta"),
    ({**BASE, "invariants": {"k": "0", "delta": "1"}}, "invariants.lambda"),
    ({**BASE, "invariants": {"delta": "1", "lambda": "0"}}, "invariants.k"),
    ({**BASE, "invariants": {"builtin": "torus"}}, "invariants.builtin"),
    ({**BASE, "invariants": {"builtin": "edlinger", "params": {"delta0": 1}}}, "invariants.params.k0"),
    ({**BASE, "invariants": {"builtin": "helicoid", "params": {"delta0": 1, "k": 2}}}, "invariants.params.k"),
    ({**BASE, "tol": {"fit": -1}}, "tol.fit"),
    ({**BASE, "tol": {"speed": 1}}, "tol.speed"),
    ({"parametrization": {"directrix": ["0", "0"], "direction": ["1", "0", "0"]}, "domain": [0, 1]},
     "parametrization.directrix"),
    ({"parametrization": {"directrix": ["0", "0", "u"], "direction": ["1", "0", 3j]}, "domain": [0, 1]},
     "parametrization.direction[2]"),
]


@pytest.mark.parametrize("obj, path", MALFORMED)
def test_malformed_specs_are_located(obj, path):
    with pytest.raises(SpecError) as info:
        parse_spec(obj)
    assert info.value.path == path


def test_malformed_messages_distinct():
    messages = set()
    for obj, _ in MALFORMED:
        with pytest.raises(SpecError) as info:
            parse_spec(obj)
        messages.add(str(info.value))
    assert len(messages) == len(MALFORMED)


def test_parse_error_offset_reported():
    with pytest.raises(SpecError) as info:
        parse_spec({**BASE, "invariants": {"k": "0", "delta": "1 +* u", "lambda": "0"}})
    assert "offset 3" in str(info.value)


def test_json_syntax_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"domain": [0, 1],\n "invariants": }')
    with pytest.raises(SpecError) as info:
        load_spec(path)
    assert "line 2" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(SpecError):
        load_spec(tmp_path / "nope.json")


def test_unevaluable_expression():
    with pytest.raises(SpecError) as info:
        parse_spec({"invariants": {"k": "log(u)", "delta": "1", "lambda": "0"}, "domain": [-1, 1]})
    assert info.value.path.startswith("invariants")


# --- writers -----------------------------------------------------------------------

def test_fmt_shortest_round_trip():
    for x in (0.1, 1 / 3, -2.5e-300, 1e22, np.float64(0.7)):
        assert float(fmt(x)) == float(x)
    assert fmt(np.float64(0.1)) == "0.1"


def test_csv_round_trip(tmp_path):
    data = np.random.default_rng(0).normal(size=(5, 3))
    write_csv(tmp_path / "a.csv", ("a", "b", "c"), data)
    raw = (tmp_path / "a.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"a,b,c\n")
    header, back = read_csv(tmp_path / "a.csv")
    assert header == ["a", "b", "c"]
    assert np.array_equal(back, data)


def test_obj_round_trip(tmp_path):
    verts = np.arange(12, dtype=float).reshape(4, 3) / 7
    mesh = Mesh(verts, np.array([[0, 2, 3, 1]]), 2, 2)
    write_obj(tmp_path / "m.obj", mesh)
    text = (tmp_path / "m.obj").read_text()
    assert text.splitlines()[-1] == "f 1 3 4 2"
    v, f = read_obj(tmp_path / "m.obj")
    assert np.array_equal(v, verts) and np.array_equal(f, mesh.faces)


def test_report_is_stable_json(tmp_path):
    rep = {"b": np.float64(1.5), "a": [np.int64(2), np.bool_(True)], "c": float("inf")}
    text = write_report(tmp_path / "r.json", rep)
    assert list(json.loads(text)) == ["b", "a", "c"]
    assert json.loads(text)["c"] == "inf"
