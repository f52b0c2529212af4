"""Step-size policies and Wolfe-style admissibility bounds.

Four policies drive the simulator:

* Constant(alpha): every iteration uses alpha * I.
* Diminishing(c, delta): iteration k uses c / max(k, 1)^delta * I with
  delta in (1/2, 1]; the max keeps iteration 0 finite.
* UniformFinite(values): each iteration draws one value uniformly from a
  finite set of s >= 2 distinct positive reals and applies it to every
  coordinate (scalar matrix).
* AgentDependent(values): each coordinate independently draws its own value
  from the set, giving a genuinely diagonal (non-scalar) step matrix.

Random draws are keyed by (trial stream, iteration) through KeyedStream, so
any single iteration's draw can be replayed without running the loop.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .rng import KeyedStream


def _validated_values(values) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if len(vals) < 2:
        raise ValueError(f"finite step sets need at least 2 values, got {len(vals)}")
    if any(v <= 0 for v in vals):
        raise ValueError("step values must be positive")
    if len(set(vals)) != len(vals):
        raise ValueError("step values must be distinct")
    return tuple(sorted(vals))


@dataclass(frozen=True)
class Constant:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class Diminishing:
    c: float
    delta: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not (0.5 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (1/2, 1], got {self.delta}")

    def value_at(self, k: int) -> float:
        return self.c / max(k, 1) ** self.delta


@dataclass(frozen=True)
class UniformFinite:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values))


@dataclass(frozen=True)
class AgentDependent:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values))


StepSizePolicy = Union[Constant, Diminishing, UniformFinite, AgentDependent]


def admissible_values(policy: StepSizePolicy) -> tuple[float, ...]:
    """Every step value the policy can ever emit (sup over k for diminishing)."""
    if isinstance(policy, Constant):
        return (policy.alpha,)
    if isinstance(policy, Diminishing):
        return (policy.c,)
    return policy.values


def step_matrix(policy: StepSizePolicy, k: int, n: int, stream: KeyedStream) -> np.ndarray:
    """Realized n x n diagonal step matrix A[k].

    Deterministic given (stream key, k, n).  Scalar policies never consume
    randomness; UniformFinite draws one value per iteration and AgentDependent
    one length-n vector per iteration, both keyed by k alone so any single
    iteration can be replayed without running the loop.
    """
    if k < 0:
        raise ValueError(f"iteration index must be non-negative, got {k}")
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    if isinstance(policy, Constant):
        return np.diag(np.full(n, policy.alpha))
    if isinstance(policy, Diminishing):
        return np.diag(np.full(n, policy.value_at(k)))
    if isinstance(policy, UniformFinite):
        values = np.asarray(policy.values)
        idx = int(stream.child(k).generator().integers(values.size))
        return np.diag(np.full(n, values[idx]))
    if isinstance(policy, AgentDependent):
        values = np.asarray(policy.values)
        idx = stream.child(k).generator().integers(values.size, size=n)
        return np.diag(values[idx])
    raise TypeError(f"unknown policy type {type(policy).__name__}")


def wolfe_bounds(Q: np.ndarray, eps1: float, eps2: float) -> tuple[float, float]:
    """Step bounds (c1_min, c2_max) guaranteeing sufficient ascent and curvature.

    For the quadratic objective with Hessian Q and parameters
    0 < eps1 < eps2 < 1 the admissible band is

        c1_min = (1 - eps2) / lambda_min(Q),   c2_max = (2 - eps2) / lambda_max(Q).

    The band is nonempty only when cond(Q) < (2 - eps2) / (1 - eps2).
    """
    if not (0 < eps1 < eps2 < 1):
        raise ValueError(f"need 0 < eps1 < eps2 < 1, got ({eps1}, {eps2})")
    Q = np.asarray(Q, dtype=float)
    eigenvalues = np.linalg.eigvalsh((Q + Q.T) / 2.0)
    lam_min, lam_max = float(eigenvalues[0]), float(eigenvalues[-1])
    if lam_min <= 0:
        raise ValueError(f"Q must be positive definite, smallest eigenvalue {lam_min:.3e}")
    return (1.0 - eps2) / lam_min, (2.0 - eps2) / lam_max


@dataclass(frozen=True)
class PolicyValidity:
    """Outcome of validate_policy: interval bounds plus per-value verdicts."""

    valid: bool
    c1_min: float
    c2_max: float
    value_checks: tuple[tuple[float, bool], ...]
    intermediate_ok: bool


def validate_policy(policy: StepSizePolicy, Q: np.ndarray, eps1: float, eps2: float) -> PolicyValidity:
    """Check the policy's admissible values against wolfe_bounds(Q, eps1, eps2).

    Constant and finite-set policies must place every value strictly inside
    (c1_min, c2_max).  Diminishing only needs its supremum c below c2_max
    (its tail necessarily drops under any lower bound).  Also checks the
    curvature inequality eps1 - 2 + alpha_max * lambda_max(Q) < 0, which the
    interval condition already implies since eps1 < eps2; it is reported
    separately as a defensive conjunct.
    """
    c1_min, c2_max = wolfe_bounds(Q, eps1, eps2)
    values = admissible_values(policy)
    if isinstance(policy, Diminishing):
        checks = tuple((v, v < c2_max) for v in values)
    else:
        checks = tuple((v, c1_min < v < c2_max) for v in values)
    lam_max = float(np.linalg.eigvalsh((np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T) / 2.0)[-1])
    intermediate_ok = bool(eps1 - 2.0 + max(values) * lam_max < 0)
    valid = all(ok for _, ok in checks) and intermediate_ok
    return PolicyValidity(
        valid=valid, c1_min=c1_min, c2_max=c2_max, value_checks=checks, intermediate_ok=intermediate_ok
    )


def policy_to_dict(policy: StepSizePolicy) -> dict:
    if isinstance(policy, Constant):
        return {"type": "constant", "alpha": policy.alpha}
    if isinstance(policy, Diminishing):
        return {"type": "diminishing", "c": policy.c, "delta": policy.delta}
    if isinstance(policy, UniformFinite):
        return {"type": "uniform_finite", "values": list(policy.values)}
    if isinstance(policy, AgentDependent):
        return {"type": "agent_dependent", "values": list(policy.values)}
    raise TypeError(f"unknown policy type {type(policy).__name__}")


def policy_from_dict(payload: dict) -> StepSizePolicy:
    if "type" not in payload:
        raise ValueError("policy JSON requires a 'type' key")
    kind = payload["type"]
    try:
        if kind == "constant":
            return Constant(alpha=float(payload["alpha"]))
        if kind == "diminishing":
            return Diminishing(c=float(payload["c"]), delta=float(payload["delta"]))
        if kind == "uniform_finite":
            return UniformFinite(values=tuple(payload["values"]))
        if kind == "agent_dependent":
            return AgentDependent(values=tuple(payload["values"]))
    except KeyError as exc:
        raise ValueError(f"policy JSON for type {kind!r} missing key {exc}") from exc
    raise ValueError(f"unknown policy type {kind!r}")
