"""Step policies: realized matrices, admissible bands, serialization."""
import numpy as np
import pytest

from gradleak.rng import KeyedStream
from gradleak.steps import (
    AgentDependent,
    Constant,
    Diminishing,
    UniformFinite,
    admissible_values,
    policy_from_dict,
    policy_to_dict,
    step_matrix,
    validate_policy,
    wolfe_bounds,
)

STREAM = KeyedStream(42)


def test_policy_constructor_validation():
    with pytest.raises(ValueError):
        Constant(alpha=0.0)
    with pytest.raises(ValueError):
        Diminishing(c=0.1, delta=0.5)  # delta must exceed 1/2
    with pytest.raises(ValueError):
        Diminishing(c=0.1, delta=1.5)
    with pytest.raises(ValueError):
        UniformFinite(values=(0.1,) * 3)  # duplicate values rejected
    with pytest.raises(ValueError):
        AgentDependent(values=(0.1,))  # needs at least two distinct values
    with pytest.raises(ValueError):
        UniformFinite(values=(0.1, -0.2))


def test_diminishing_value_schedule():
    policy = Diminishing(c=0.3, delta=1.0)
    assert policy.value_at(0) == 0.3  # t=0 clamps the divisor at 1
    assert policy.value_at(1) == 0.3
    assert policy.value_at(3) == pytest.approx(0.1)
    sub = Diminishing(c=0.4, delta=0.75)
    assert sub.value_at(16) == pytest.approx(0.4 / 8.0)


def test_step_matrix_scalar_policies_ignore_stream():
    a = step_matrix(Constant(alpha=0.2), 5, 3, STREAM)
    np.testing.assert_array_equal(a, 0.2 * np.eye(3))
    d = step_matrix(Diminishing(c=0.2, delta=1.0), 4, 2, STREAM)
    np.testing.assert_array_equal(d, 0.05 * np.eye(2))


def test_step_matrix_uniform_finite_scalar_per_iteration():
    policy = UniformFinite(values=(0.1, 0.19))
    seen = set()
    for k in range(30):
        matrix = step_matrix(policy, k, 4, STREAM)
        diag = np.diag(matrix)
        assert np.all(diag == diag[0])  # one shared scalar per iteration
        assert diag[0] in policy.values
        seen.add(diag[0])
    assert seen == set(policy.values)  # both values eventually realized


def test_step_matrix_agent_dependent_varies_per_coordinate():
    policy = AgentDependent(values=(0.1, 0.19))
    mixed = False
    for k in range(30):
        diag = np.diag(step_matrix(policy, k, 6, STREAM))
        assert set(np.unique(diag)) <= set(policy.values)
        if len(np.unique(diag)) > 1:
            mixed = True
    assert mixed  # coordinates draw independently


def test_step_matrix_replayable_by_iteration_key():
    policy = AgentDependent(values=(0.01, 0.02))
    direct = step_matrix(policy, 7, 5, STREAM)
    again = step_matrix(policy, 7, 5, KeyedStream(42))
    np.testing.assert_array_equal(direct, again)
    other_stream = step_matrix(policy, 7, 5, KeyedStream(43))
    assert not np.array_equal(direct, other_stream)


def test_admissible_values():
    assert admissible_values(Constant(alpha=0.3)) == (0.3,)
    assert admissible_values(Diminishing(c=0.2, delta=1.0)) == (0.2,)
    assert admissible_values(UniformFinite(values=(0.1, 0.2))) == (0.1, 0.2)


def test_wolfe_bounds_hand_values():
    # lambda in {1, 2}, eps = (0.25, 0.5): c1_min = 0.5/1, c2_max = 1.5/2.
    lo, hi = wolfe_bounds(np.diag([1.0, 2.0]), 0.25, 0.5)
    assert lo == pytest.approx(0.5)
    assert hi == pytest.approx(0.75)
    # lambda in {2, 5}, eps = (0.2, 0.45): c1_min = 0.55/2, c2_max = 1.55/5.
    lo, hi = wolfe_bounds(np.diag([2.0, 5.0]), 0.2, 0.45)
    assert lo == pytest.approx(0.275)
    assert hi == pytest.approx(0.31)


def test_wolfe_bounds_validation():
    with pytest.raises(ValueError):
        wolfe_bounds(np.eye(2), 0.5, 0.25)
    with pytest.raises(ValueError):
        wolfe_bounds(np.diag([1.0, -1.0]), 0.25, 0.5)


def test_validate_policy_inside_and_outside_band():
    Q = np.diag([1.0, 2.0])  # band (0.5, 0.75) at eps = (0.25, 0.5)
    inside = validate_policy(UniformFinite(values=(0.55, 0.7)), Q, 0.25, 0.5)
    assert inside.valid and inside.intermediate_ok
    outside = validate_policy(UniformFinite(values=(0.55, 0.8)), Q, 0.25, 0.5)
    assert not outside.valid
    assert dict(outside.value_checks)[0.8] is False
    below = validate_policy(Constant(alpha=0.4), Q, 0.25, 0.5)
    assert not below.valid


def test_validate_policy_diminishing_only_caps_supremum():
    Q = np.diag([1.0, 2.0])
    # c below c1_min would fail a constant policy but is fine for diminishing.
    result = validate_policy(Diminishing(c=0.6, delta=1.0), Q, 0.25, 0.5)
    assert result.valid
    too_big = validate_policy(Diminishing(c=0.8, delta=1.0), Q, 0.25, 0.5)
    assert not too_big.valid


def test_policy_serialization_round_trip():
    policies = [
        Constant(alpha=0.1),
        Diminishing(c=0.2, delta=0.8),
        UniformFinite(values=(0.1, 0.19)),
        AgentDependent(values=(0.01, 0.02)),
    ]
    for policy in policies:
        clone = policy_from_dict(policy_to_dict(policy))
        assert clone == policy


def test_policy_from_dict_validation():
    with pytest.raises(ValueError):
        policy_from_dict({"alpha": 0.1})
    with pytest.raises(ValueError):
        policy_from_dict({"type": "unknown"})
    with pytest.raises(ValueError):
        policy_from_dict({"type": "constant"})
