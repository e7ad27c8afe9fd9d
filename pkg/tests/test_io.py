import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scl import fixtures as F
from scl import io
from scl.curvekit import Concat, GeneratorF1, GeodesicArc, NuK, NuTheta, Rotate, restrict
from scl.errors import InvariantViolation, ParseError, SchemaError


def test_parse_examples():
    c = io.parse_curve('{"node":"nu_theta","theta":0.785398}')
    assert isinstance(c, NuTheta) and np.isclose(c.theta, 0.785398)
    c = io.parse_curve('{"node":"concat","left":{"node":"nu_k","k":2},"right":{"node":"nu_k","k":2}}')
    t = np.linspace(0, 1, 333)
    assert np.abs(c(t) - NuK(4)(t)).max() < 1e-12


@pytest.mark.parametrize(
    "text, where",
    [
        ('{"node":"nu_theta","theta":4.0}', "$.theta"),
        ('{"node":"concat","left":{"node":"nu_theta","theta":4.0},"right":{"node":"nu_k","k":1}}', "$.left.theta"),
        ('{"node":"nu_k","k":0}', "$.k"),
        ('{"node":"nu_k","k":1,"extra":1}', "$"),
        ('{"node":"spiral"}', "$.node"),
    ],
)
def test_schema_errors_name_the_location(text, where):
    with pytest.raises(SchemaError) as err:
        io.parse_curve(text)
    assert str(err.value).startswith(where)


def test_parse_error_and_invariants():
    with pytest.raises(ParseError):
        io.parse_curve('{"node": ')
    with pytest.raises(InvariantViolation):
        io.parse_curve('{"node":"geodesic_arc","p":[1,0,0],"q":[-1,0,0]}')
    bad = {"node": "rotate", "q": [1, 1, 0, 0], "inner": {"node": "nu_k", "k": 1}}
    with pytest.raises(InvariantViolation) as err:
        io.parse_curve(json.dumps(bad))
    assert str(err.value).startswith("$")
    gap = {"node": "concat", "left": {"node": "geodesic_arc", "p": [1, 0, 0], "q": [0, 1, 0]}, "right": {"node": "nu_k", "k": 1}}
    with pytest.raises(InvariantViolation):
        io.parse_curve(json.dumps(gap))


def _curves():
    return [
        NuTheta(0.3),
        NuTheta(1.1, laps=3),
        NuK(2),
        GeneratorF1(1.0, 2.5),
        GeodesicArc([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]),
        Concat(NuK(2), GeneratorF1(0.1, 0.2)),
        Rotate(np.array([1.0, 2.0, 0.0, 2.0]) / 3, NuK(1)),
        restrict(GeneratorF1(3.0, 1.0), 0.1, 0.7),
        F.small_loop(n=65),
        F.graft_x1(F.star_curve(1, n=129)),
    ]


@pytest.mark.parametrize("index", range(10))
def test_round_trip_is_byte_identical(index):
    text = io.dump_curve(_curves()[index])
    again = io.dump_curve(io.parse_curve(text))
    assert again == text


@given(st.floats(0.01, 3.13), st.integers(1, 5))
def test_round_trip_preserves_values(theta, laps):
    c = NuTheta(theta, laps=laps)
    d = io.parse_curve(io.dump_curve(c))
    t = np.linspace(0, 1, 50)
    assert np.array_equal(c(t), d(t))


def test_reports_are_deterministic(tmp_path):
    a = io.make_report("scan", {"samples": 5}, {"x": np.float64(1.5), "v": np.arange(3)}, {"node": "nu_k", "k": 1})
    b = io.make_report("scan", {"samples": 5}, {"x": np.float64(1.5), "v": np.arange(3)}, {"node": "nu_k", "k": 1})
    a.pop("timestamps"), b.pop("timestamps")
    assert a == b and a["results"]["v"] == [0, 1, 2]
    io.write_derived({"c": 1.0}, tmp_path / "d.json")
    assert io.read_derived(tmp_path / "d.json") == {"c": 1.0}
    (tmp_path / "old.json").write_text('{"version": 0, "derived": {}}')
    with pytest.raises(SchemaError):
        io.read_derived(tmp_path / "old.json")
