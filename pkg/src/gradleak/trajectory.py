"""Trajectory simulation and the eavesdropper's view of it.

run() executes the literal update x[k+1] = x[k] - A[k] (Qx[k] + q + barrier)
for K steps and records every iterate plus the realized step matrices.  The
step record is debug-only: estimators never receive it, they only accept a
MeasurementSet of (x[t], y[t]) pairs with y[t] = x[t] - x[t+1], which is all
an observer of the iterate stream can form.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .linalg import numerical_rank
from .rng import KeyedStream
from .steps import StepSizePolicy, policy_to_dict, step_matrix


class TrajectoryError(RuntimeError):
    """The simulated iterate left the strictly feasible region."""


@dataclass(frozen=True)
class StepRecord:
    """Realized diagonal step values, one row per iteration (debug-only)."""

    diagonals: np.ndarray  # (K, n)

    def __post_init__(self):
        diagonals = np.asarray(self.diagonals, dtype=float)
        diagonals.flags.writeable = False
        object.__setattr__(self, "diagonals", diagonals)

    def matrix(self, k: int) -> np.ndarray:
        return np.diag(self.diagonals[k])

    def __len__(self):
        return self.diagonals.shape[0]


@dataclass(frozen=True)
class Trace:
    """Iterates x[0..K] plus the instance, policy, and stream key that produced them."""

    instance: qp.ProblemInstance
    policy: StepSizePolicy
    x: np.ndarray  # (K+1, n)
    seed_key: tuple[int, ...]
    hidden_steps: StepRecord = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def length(self) -> int:
        """Number of iterations K (the trace holds K+1 iterates)."""
        return self.x.shape[0] - 1


@dataclass(frozen=True)
class MeasurementSet:
    """Pairs (x[t], y[t]) with y[t] = x[t] - x[t+1], for t = 0..T-1."""

    x: np.ndarray  # (T, n)
    y: np.ndarray  # (T, n)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 2:
            raise ValueError(f"x and y must be matching (T, n) arrays, got {x.shape} and {y.shape}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def __len__(self):
        return self.x.shape[0]

    def first(self, count: int) -> "MeasurementSet":
        if not 1 <= count <= len(self):
            raise ValueError(f"count must be in [1, {len(self)}], got {count}")
        return MeasurementSet(x=self.x[:count].copy(), y=self.y[:count].copy())


def run(
    instance: qp.ProblemInstance,
    policy: StepSizePolicy,
    x0: np.ndarray,
    horizon: int,
    stream: KeyedStream,
) -> Trace:
    """Simulate K = horizon update steps from x0.

    Constrained runs abort with TrajectoryError (no backtracking) the moment
    an iterate leaves the strictly feasible region; the error names the
    iteration and the violated constraint row.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (instance.n,):
        raise ValueError(f"x0 must have shape ({instance.n},), got {x.shape}")
    if instance.constraints is not None and not instance.constraints.strictly_feasible(x):
        raise TrajectoryError("x0 is not strictly feasible")
    iterates = [x.copy()]
    diagonals = []
    for k in range(horizon):
        gradient = qp.descent_direction(instance, x)
        A = step_matrix(policy, k, instance.n, stream)
        x = x - A @ gradient
        if instance.constraints is not None:
            slacks = instance.constraints.slacks(x)
            if np.any(slacks <= 0):
                worst = int(np.argmin(slacks))
                raise TrajectoryError(
                    f"iterate left the strictly feasible region at iteration {k + 1}: "
                    f"constraint {worst} has slack {slacks[worst]:.3e}; reduce the step size"
                )
        iterates.append(x.copy())
        diagonals.append(np.diag(A).copy())
    return Trace(
        instance=instance,
        policy=policy,
        x=np.array(iterates),
        seed_key=stream.key,
        hidden_steps=StepRecord(diagonals=np.array(diagonals)),
    )


def measurements(trace: Trace) -> MeasurementSet:
    """The eavesdropper's pairs: x[t] and the consecutive difference y[t]."""
    return MeasurementSet(x=trace.x[:-1].copy(), y=trace.x[:-1] - trace.x[1:])


@dataclass(frozen=True)
class IndependenceReport:
    """Numerical-rank check of the iterate stack (and its affine augmentation)."""

    holds: bool
    rank: int
    singular_values: np.ndarray
    tolerance: float
    augmented_rank: int
    augmented_holds: bool


def check_independence(trace: Trace, upto: int, tol_factor: float = 64.0) -> IndependenceReport:
    """Do x[0..upto-1] look linearly independent at working precision?

    Stacks the first upto iterates as rows and counts singular values above
    max(n, upto) * sigma_max * eps * tol_factor.  Also ranks the augmented
    stack [x[t]^T 1] that the reconstruction systems are built from.
    """
    if not 1 <= upto <= trace.n:
        raise ValueError(f"upto must be in [1, n]=[1, {trace.n}], got {upto}")
    if upto > trace.x.shape[0]:
        raise ValueError(f"trace holds only {trace.x.shape[0]} iterates, requested {upto}")
    stack = trace.x[:upto]
    rank, sigma, tol = numerical_rank(stack, tol_factor)
    augmented = np.hstack([stack, np.ones((upto, 1))])
    augmented_rank, _, _ = numerical_rank(augmented, tol_factor)
    return IndependenceReport(
        holds=rank == upto,
        rank=rank,
        singular_values=sigma,
        tolerance=tol,
        augmented_rank=augmented_rank,
        augmented_holds=augmented_rank == upto,
    )


@dataclass(frozen=True)
class ConvergenceMetrics:
    distances: np.ndarray  # ||x[k] - x*|| for every recorded iterate
    final_distance: float
    optimum: np.ndarray


def convergence_metrics(trace: Trace) -> ConvergenceMetrics:
    """Distances to the unconstrained optimum along the trace."""
    if trace.instance.constrained:
        raise ValueError("convergence metrics are defined for unconstrained instances only")
    x_star = qp.optimum(trace.instance.utility)
    distances = np.linalg.norm(trace.x - x_star, axis=1)
    return ConvergenceMetrics(distances=distances, final_distance=float(distances[-1]), optimum=x_star)


def trace_to_csv(trace: Trace) -> str:
    """CSV of the iterates: header k,x_1,...,x_n, floats at 17 significant digits."""
    buffer = io.StringIO()
    buffer.write("k," + ",".join(f"x_{i + 1}" for i in range(trace.n)) + "\n")
    for k, row in enumerate(trace.x):
        buffer.write(str(k) + "," + ",".join(format(v, ".17g") for v in row) + "\n")
    return buffer.getvalue()


def trace_sidecar(trace: Trace, expose_steps: bool = False) -> dict:
    """Sidecar JSON payload: instance, policy, seed path; steps only if exposed."""
    payload = {
        "instance": qp.instance_to_dict(trace.instance),
        "policy": policy_to_dict(trace.policy),
        "seed_key": list(trace.seed_key),
        "length": trace.length,
    }
    if expose_steps:
        payload["steps"] = trace.hidden_steps.diagonals.tolist()
    return payload


def measurements_to_dict(ms: MeasurementSet) -> dict:
    return {"n": ms.n, "x": ms.x.tolist(), "y": ms.y.tolist()}


def measurements_from_dict(payload: dict) -> MeasurementSet:
    if "x" not in payload or "y" not in payload:
        raise ValueError("measurement JSON requires keys 'x' and 'y'")
    return MeasurementSet(x=np.array(payload["x"], dtype=float), y=np.array(payload["y"], dtype=float))
