"""Keyed stream determinism and independence."""
import numpy as np
import pytest

from gradleak import rng
from gradleak.rng import KeyedStream


def test_same_key_reproduces_draws():
    a = KeyedStream(7, 1, 2).generator().standard_normal(8)
    b = KeyedStream(7, 1, 2).generator().standard_normal(8)
    np.testing.assert_array_equal(a, b)


def test_generator_is_fresh_each_call():
    stream = KeyedStream(3)
    first = stream.generator().standard_normal(4)
    second = stream.generator().standard_normal(4)
    np.testing.assert_array_equal(first, second)


def test_different_keys_differ():
    a = KeyedStream(7, 1).generator().standard_normal(8)
    b = KeyedStream(7, 2).generator().standard_normal(8)
    assert not np.allclose(a, b)


def test_child_extends_key_path():
    stream = KeyedStream(11).child(4).child(0, 9)
    assert stream.key == (11, 4, 0, 9)
    assert stream == KeyedStream(11, 4, 0, 9)
    assert hash(stream) == hash(KeyedStream(11, 4, 0, 9))


def test_child_draws_independent_of_sibling_consumption():
    root = KeyedStream(5)
    before = root.child(2).generator().standard_normal(3)
    root.child(1).generator().standard_normal(1000)  # consume a sibling heavily
    after = root.child(2).generator().standard_normal(3)
    np.testing.assert_array_equal(before, after)


def test_namespace_constants_are_distinct():
    names = [rng.UTILITY, rng.INITIAL_POINT, rng.STEPS, rng.CONSTRAINTS, rng.BARRIER_WEIGHT]
    assert len(set(names)) == len(names)


@pytest.mark.parametrize("bad", [(), (-1,), (1.5,), ("a",)])
def test_invalid_keys_rejected(bad):
    with pytest.raises((ValueError, TypeError)):
        KeyedStream(*bad)
