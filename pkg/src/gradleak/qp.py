"""Quadratic-program instances.

The objective being climbed is the concave utility

    f(x) = -1/2 x^T Q x - q^T x          (Q symmetric positive definite)

optionally augmented with a log-barrier for an open polyhedron {x : Cx < d}:

    f(x) = -1/2 x^T Q x - q^T x + w * sum_i log(d_i - C_i x)

Gradient ascent on f moves along -grad(g) where g = -f, so the simulator
works with the "descent direction" g'(x) = Qx + q (+ barrier term), and the
update is x_next = x - A g'(x) for a diagonal positive step matrix A.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jsonutil import render_json

CONDITION_LIMIT = 1e12
OPTIMUM_RESIDUAL_RTOL = 1e-10
EIGENVALUE_GAP_RTOL = 1e-6
SAMPLER_MAX_REJECTIONS = 10**6


class FeasibilityError(ValueError):
    """A point or region violates strict feasibility requirements."""


class SamplerError(RuntimeError):
    """Rejection sampling exhausted its budget."""


def _as_matrix(values, rows: int | None = None, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _as_vector(values, size: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise ValueError(f"{name} must have {size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class QuadraticUtility:
    """Symmetric positive-definite quadratic objective parameters (Q, q).

    Q is symmetrized bitwise at construction ((Q + Q^T)/2) and must be
    positive definite; q is any real vector of matching size.
    """

    Q: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        Q = _as_matrix(self.Q, name="Q")
        if Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-12):
            raise ValueError("Q must be symmetric")
        Q = (Q + Q.T) / 2.0
        q = _as_vector(self.q, size=Q.shape[0], name="q")
        eigenvalues = np.linalg.eigvalsh(Q)
        if eigenvalues.min() <= 0:
            raise ValueError(f"Q must be positive definite, smallest eigenvalue {eigenvalues.min():.3e}")
        Q.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.Q)


@dataclass(frozen=True)
class ConstraintSet:
    """Open polyhedron {x : Cx < d}.

    Construction verifies the region has nonempty interior by solving the
    Chebyshev-center linear program; the witness point is kept as
    interior_point (used to center the rejection-sampling box).
    """

    C: np.ndarray
    d: np.ndarray
    interior_point: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        C = _as_matrix(self.C, name="C")
        d = _as_vector(self.d, size=C.shape[0], name="d")
        if C.shape[0] < 1:
            raise ValueError("constraint set needs at least one row")
        row_norms = np.linalg.norm(C, axis=1)
        if np.any(row_norms == 0):
            raise ValueError("constraint rows must be nonzero")
        center = _chebyshev_center(C, d, row_norms)
        C.flags.writeable = False
        d.flags.writeable = False
        center.flags.writeable = False
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "interior_point", center)

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def n(self) -> int:
        return self.C.shape[1]

    def slacks(self, x: np.ndarray) -> np.ndarray:
        return self.d - self.C @ np.asarray(x, dtype=float)

    def strictly_feasible(self, x: np.ndarray) -> bool:
        return bool(np.all(self.slacks(x) > 0))


def _chebyshev_center(C: np.ndarray, d: np.ndarray, row_norms: np.ndarray) -> np.ndarray:
    """Strictly interior point of {Cx < d}, or raise FeasibilityError."""
    from scipy.optimize import linprog

    m, n = C.shape
    # max r  s.t.  Cx + r*||C_i|| <= d, r <= 1  (cap keeps unbounded regions finite)
    objective = np.zeros(n + 1)
    objective[-1] = -1.0
    lhs = np.hstack([C, row_norms[:, None]])
    lhs = np.vstack([lhs, np.zeros((1, n + 1))])
    lhs[-1, -1] = 1.0
    rhs = np.concatenate([d, [1.0]])
    result = linprog(objective, A_ub=lhs, b_ub=rhs, bounds=[(None, None)] * (n + 1), method="highs")
    if not result.success or result.x is None or result.x[-1] <= 0:
        raise FeasibilityError("constraint set has empty interior: no strictly feasible point exists")
    return np.array(result.x[:n], dtype=float)


@dataclass(frozen=True)
class ProblemInstance:
    """A utility, optionally constrained with a positive barrier weight."""

    utility: QuadraticUtility
    constraints: ConstraintSet | None = None
    barrier_weight: float | None = None

    def __post_init__(self):
        if (self.constraints is None) != (self.barrier_weight is None):
            raise ValueError("constraints and barrier_weight must be provided together")
        if self.constraints is not None:
            if self.constraints.n != self.utility.n:
                raise ValueError(
                    f"constraint columns ({self.constraints.n}) must match utility dimension ({self.utility.n})"
                )
            if not self.barrier_weight > 0:
                raise ValueError(f"barrier_weight must be positive, got {self.barrier_weight}")
            object.__setattr__(self, "barrier_weight", float(self.barrier_weight))

    @property
    def n(self) -> int:
        return self.utility.n

    @property
    def constrained(self) -> bool:
        return self.constraints is not None


def sample_utility(n: int, spectrum_lo: float, spectrum_hi: float, rng: np.random.Generator) -> QuadraticUtility:
    """Draw Q = V diag(lambda) V^T with Haar-random V and i.i.d. uniform spectrum.

    Eigenvalues are resampled until all pairwise gaps exceed
    1e-6 * (spectrum_hi - spectrum_lo), so sampled utilities always have
    simple spectra.  q is standard normal.  Deterministic given rng state.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not (0 < spectrum_lo < spectrum_hi):
        raise ValueError(f"need 0 < spectrum_lo < spectrum_hi, got ({spectrum_lo}, {spectrum_hi})")
    gaussian = rng.standard_normal((n, n))
    basis, upper = np.linalg.qr(gaussian)
    basis = basis * np.sign(np.diag(upper))  # proper Haar convention
    min_gap = EIGENVALUE_GAP_RTOL * (spectrum_hi - spectrum_lo)
    while True:
        eigenvalues = rng.uniform(spectrum_lo, spectrum_hi, size=n)
        if n == 1:
            break
        sorted_eigs = np.sort(eigenvalues)
        if np.min(np.diff(sorted_eigs)) > min_gap:
            break
    Q = (basis * eigenvalues) @ basis.T
    Q = (Q + Q.T) / 2.0
    q = rng.standard_normal(n)
    return QuadraticUtility(Q=Q, q=q)


def sample_initial_point(instance: ProblemInstance, rng: np.random.Generator, box_radius: float = 10.0) -> np.ndarray:
    """Starting point: uniform on the unit ball, or rejection-sampled feasible.

    Unconstrained instances draw a uniform direction and a radius U^(1/n).
    Constrained instances rejection-sample from the axis-aligned box of
    half-width box_radius centered on the region's interior witness (so the
    box always contains a strictly feasible neighborhood) and abort with a
    diagnostic after 10^6 rejections.
    """
    n = instance.n
    if instance.constraints is None:
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
        while norm == 0:  # pragma: no cover - probability zero
            direction = rng.standard_normal(n)
            norm = np.linalg.norm(direction)
        radius = rng.uniform() ** (1.0 / n)
        return radius * direction / norm

    if not box_radius > 0:
        raise ValueError(f"box_radius must be positive, got {box_radius}")
    constraints = instance.constraints
    center = constraints.interior_point
    batch = 1024
    rejected = 0
    while rejected < SAMPLER_MAX_REJECTIONS:
        points = center + rng.uniform(-box_radius, box_radius, size=(batch, n))
        feasible = np.all(points @ constraints.C.T < constraints.d, axis=1)
        hits = np.nonzero(feasible)[0]
        if hits.size:
            return points[hits[0]].copy()
        rejected += batch
    raise SamplerError(
        f"rejection sampling found no strictly feasible point in the box of half-width {box_radius} "
        f"around {center.tolist()} after {SAMPLER_MAX_REJECTIONS} rejections; "
        "the feasible region is too thin relative to the box; adjust box_radius"
    )


def optimum(utility: QuadraticUtility) -> np.ndarray:
    """Unconstrained maximizer x* = -Q^{-1} q, with conditioning and residual guards."""
    condition = np.linalg.cond(utility.Q)
    if condition > CONDITION_LIMIT:
        raise ValueError(f"Q condition number {condition:.3e} exceeds {CONDITION_LIMIT:.0e}; optimum unreliable")
    x_star = np.linalg.solve(utility.Q, -utility.q)
    residual = np.linalg.norm(utility.Q @ x_star + utility.q)
    bound = OPTIMUM_RESIDUAL_RTOL * (1.0 + np.linalg.norm(utility.q))
    if residual > bound:
        raise ValueError(f"optimum residual {residual:.3e} exceeds {bound:.3e}")
    return x_star


def descent_direction(instance: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """Gradient of the climbed objective's negation: Qx + q (+ barrier term).

    For constrained instances adds w * sum_i C_i^T / (d_i - C_i x) and raises
    FeasibilityError at or beyond the boundary.
    """
    x = _as_vector(x, size=instance.n, name="x")
    gradient = instance.utility.Q @ x + instance.utility.q
    if instance.constraints is not None:
        slacks = instance.constraints.slacks(x)
        if np.any(slacks <= 0):
            worst = int(np.argmin(slacks))
            raise FeasibilityError(
                f"point is at or beyond the boundary: constraint {worst} has slack {slacks[worst]:.3e}"
            )
        gradient = gradient + instance.barrier_weight * (instance.constraints.C.T @ (1.0 / slacks))
    return gradient


def objective_value(instance: ProblemInstance, x: np.ndarray) -> float:
    """g(x) = 1/2 x^T Q x + q^T x - w sum log(d - Cx); descent_direction is its gradient."""
    x = _as_vector(x, size=instance.n, name="x")
    value = 0.5 * x @ instance.utility.Q @ x + instance.utility.q @ x
    if instance.constraints is not None:
        slacks = instance.constraints.slacks(x)
        if np.any(slacks <= 0):
            raise FeasibilityError("objective undefined at or beyond the boundary")
        value -= instance.barrier_weight * float(np.sum(np.log(slacks)))
    return float(value)


def instance_to_dict(instance: ProblemInstance) -> dict:
    """JSON form: {"n", "Q", "q"} plus {"C", "d", "lambda"} when constrained."""
    payload = {
        "n": instance.n,
        "Q": instance.utility.Q.tolist(),
        "q": instance.utility.q.tolist(),
    }
    if instance.constraints is not None:
        payload["C"] = instance.constraints.C.tolist()
        payload["d"] = instance.constraints.d.tolist()
        payload["lambda"] = instance.barrier_weight
    return payload


def instance_to_json(instance: ProblemInstance) -> str:
    return render_json(instance_to_dict(instance))


def instance_from_dict(payload: dict) -> ProblemInstance:
    required = {"n", "Q", "q"}
    missing = required - payload.keys()
    if missing:
        raise ValueError(f"instance JSON missing keys: {sorted(missing)}")
    n = int(payload["n"])
    utility = QuadraticUtility(Q=_as_matrix(payload["Q"], rows=n, cols=n, name="Q"), q=_as_vector(payload["q"], size=n, name="q"))
    has_constraints = "C" in payload or "d" in payload or "lambda" in payload
    if not has_constraints:
        return ProblemInstance(utility=utility)
    for key in ("C", "d", "lambda"):
        if key not in payload:
            raise ValueError(f"constrained instance JSON requires key {key!r}")
    constraints = ConstraintSet(C=_as_matrix(payload["C"], cols=n, name="C"), d=_as_vector(payload["d"], name="d"))
    return ProblemInstance(utility=utility, constraints=constraints, barrier_weight=float(payload["lambda"]))


def instance_from_json(text: str) -> ProblemInstance:
    import json

    return instance_from_dict(json.loads(text))
