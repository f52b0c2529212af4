"""Canonical JSON rendering: byte stability, float round-trips, hashing."""
import json

import numpy as np
import pytest

from gradleak.jsonutil import config_hash, render_json


def test_keys_sorted_and_trailing_newline():
    text = render_json({"b": 1, "a": 2})
    assert text == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_floats_round_trip_exactly():
    values = [0.1, 1.0 / 3.0, 1e-17, 2.0**-52, 123456789.123456789, -0.0, 5.0]
    rendered = render_json(values)
    parsed = json.loads(rendered)
    assert parsed == values


def test_integral_floats_stay_floats():
    parsed = json.loads(render_json({"x": 5.0}))
    assert isinstance(parsed["x"], float)


def test_numpy_scalars_and_arrays_render():
    payload = {"arr": np.array([[1.0, 2.0]]), "i": np.int64(3), "f": np.float64(0.25)}
    parsed = json.loads(render_json(payload))
    assert parsed == {"arr": [[1.0, 2.0]], "i": 3, "f": 0.25}


def test_bool_and_none():
    assert render_json([True, False, None]) == "[\n  true,\n  false,\n  null\n]\n"


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        render_json(float("nan"))
    with pytest.raises(ValueError):
        render_json(float("inf"))


def test_non_string_keys_rejected():
    with pytest.raises(TypeError):
        render_json({1: "x"})


def test_identical_content_identical_bytes():
    a = render_json({"x": [1.5, {"y": "z"}], "w": None})
    b = render_json({"w": None, "x": [1.5, {"y": "z"}]})
    assert a == b


def test_config_hash_sensitivity():
    base = {"mode": "constant", "n": 3, "seed": 1}
    assert config_hash(base) == config_hash(dict(reversed(list(base.items()))))
    assert config_hash(base) != config_hash({**base, "seed": 2})
