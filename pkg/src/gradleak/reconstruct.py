"""Reconstruction of (Q, q[, lambda]) from eavesdropped iterate differences.

Every estimator consumes a MeasurementSet of pairs (x[t], y[t]) with
y[t] = x[t] - x[t+1] and reasons about which objective parameters are
consistent with them.  Symmetry of Q is encoded structurally through the
vech unknown layout (see linalg), never with extra equality rows.

Estimator family, by what the observer knows about the steps:

* constant steps: y[t] = alpha (Q x[t] + q) is linear in (alpha Q, alpha q),
  so a single least-squares solve recovers that pair.
* diminishing steps c/k^delta with known delta: rescaling y[t] by max(t,1)^delta
  reduces to the constant case and recovers (c Q, c q).
* finite step set A: two independent routes.  The enumeration route solves
  one inhomogeneous system per step-sequence hypothesis in A^T and keeps the
  hypotheses that fit.  The polynomial route introduces beta[t] = 1/alpha[t]
  as unknowns, yielding one homogeneous system whose one-dimensional
  nullspace (when measurements suffice) is the parameter ray; snapping the
  beta block onto the reciprocals of A resolves the scale.
* per-coordinate (agent-dependent) steps: each new measurement brings as
  many fresh step unknowns as equations, so the homogeneous system's nullity
  never drops below n(n+3)/2 (+1 constrained) and reconstruction stays
  underdetermined forever.  The estimator reports that nullity as a witness.

Measurement-count bookkeeping: operations take the pair count T = |ms| as
the interface quantity.  Guarantee thresholds are traditionally quoted as an
index k with T = k + 1 pairs; required_index returns the quoted k, which
stems from raw equation counting.  That counting is optimistic: stacked
pair equations carry symmetry-induced redundancies, so the consistent set
keeps a kernel of symmetric forms on the unexplored part of the state space
until the iterate differences span R^n.  sharp_measurement_count returns
the pair count at which uniqueness actually arrives (n + 1 for the scalar
step families); the estimators report whatever the data supports, so below
that count they return Underdetermined with the kernel dimension as
evidence, regardless of the quoted threshold.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import (
    DEFAULT_TOL_FACTOR,
    numerical_rank,
    nullspace,
    solve_least_squares,
    symmetric_row_block,
    unvech,
)
from .trajectory import MeasurementSet

RESIDUAL_RTOL = 1e-8
SNAP_RTOL = 1e-6
DEDUPE_RTOL = 1e-6
DEFAULT_ENUM_BUDGET = 10**6

MODES = ("constant", "diminishing", "finite", "finite_enum", "finite_poly", "constrained", "agent_dependent")


class EnumerationBudgetError(ValueError):
    """The hypothesis space s^T exceeds the enumeration budget."""


class ReconstructionStatus(str, Enum):
    UNIQUE = "unique"
    UNIQUE_UP_TO_SCALE = "unique_up_to_scale"
    UNDERDETERMINED = "underdetermined"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class ReconstructionResult:
    """Estimator outcome.

    Q_hat/q_hat (and lambda_hat when a barrier weight is estimated) are at
    true scale for Unique, at unit parameter norm for UniqueUpToScale, and
    absent otherwise.  gamma_hat is the resolved scale multiplier: 1.0 when
    an enumeration survivor or a known barrier weight pins the scale, and the
    snap multiplier relative to the beta[0]=1 normalization for homogeneous
    estimators (equal to 1/alpha for a singleton step set).  nullspace_dim is
    the homogeneous system's numerical nullity, the column-rank deficit for
    inhomogeneous solves, or the number of surviving parameter classes for
    enumeration.  residual is the solver diagnostic: least-squares residual
    norm, or the smallest singular value for homogeneous systems.
    """

    status: ReconstructionStatus
    Q_hat: np.ndarray | None = None
    q_hat: np.ndarray | None = None
    lambda_hat: float | None = None
    gamma_hat: float | None = None
    nullspace_dim: int = 0
    residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "Q_hat": None if self.Q_hat is None else self.Q_hat.tolist(),
            "q_hat": None if self.q_hat is None else self.q_hat.tolist(),
            "lambda_hat": self.lambda_hat,
            "gamma_hat": self.gamma_hat,
            "nullspace_dim": self.nullspace_dim,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class UnknownLayout:
    """Column order of every system: vech(Q'), then q', then lambda', then betas."""

    n: int
    beta_columns: int = 0
    has_lambda: bool = False

    @property
    def vech_columns(self) -> int:
        return self.n * (self.n + 1) // 2

    @property
    def q_start(self) -> int:
        return self.vech_columns

    @property
    def lambda_index(self) -> int | None:
        return self.vech_columns + self.n if self.has_lambda else None

    @property
    def beta_start(self) -> int:
        return self.vech_columns + self.n + (1 if self.has_lambda else 0)

    @property
    def total(self) -> int:
        return self.beta_start + self.beta_columns

    def split(self, z: np.ndarray):
        """(vech part, q part, lambda or None, beta part) of an unknown vector."""
        vech_part = z[: self.vech_columns]
        q_part = z[self.q_start : self.q_start + self.n]
        lam = float(z[self.lambda_index]) if self.has_lambda else None
        betas = z[self.beta_start :]
        return vech_part, q_part, lam, betas


@dataclass(frozen=True)
class LinearSystem:
    """matrix @ unknowns = rhs, with the unknown layout made explicit."""

    matrix: np.ndarray
    rhs: np.ndarray
    layout: UnknownLayout


def _validate_measurements(ms: MeasurementSet, minimum: int = 1):
    if len(ms) < minimum:
        raise ValueError(f"need at least {minimum} measurement pairs, got {len(ms)}")


def _validate_step_values(values, minimum: int = 1) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if len(vals) < minimum:
        raise ValueError(f"need at least {minimum} step values, got {len(vals)}")
    if any(v <= 0 for v in vals):
        raise ValueError("step values must be positive")
    if len(set(vals)) != len(vals):
        raise ValueError("step values must be distinct")
    return tuple(sorted(vals))


def assemble_constant(ms: MeasurementSet) -> LinearSystem:
    """Stack y[t] = Q' x[t] + q' into one system over (vech(Q'), q').

    Each pair contributes n rows; the unknown count is n(n+3)/2.
    """
    _validate_measurements(ms)
    T, n = ms.x.shape
    layout = UnknownLayout(n=n)
    eye = np.eye(n)
    blocks = [np.hstack([symmetric_row_block(ms.x[t]), eye]) for t in range(T)]
    return LinearSystem(matrix=np.vstack(blocks), rhs=ms.y.ravel().copy(), layout=layout)


def _solve_inhomogeneous(
    system: LinearSystem,
    residual_rtol: float,
    tol_factor: float,
    lambda_value: float | None = None,
    gamma_value: float | None = None,
) -> ReconstructionResult:
    matrix, rhs, layout = system.matrix, system.rhs, system.layout
    solution, residual, rank, _, _ = solve_least_squares(matrix, rhs, tol_factor)
    deficit = layout.total - rank
    if deficit > 0:
        return ReconstructionResult(
            status=ReconstructionStatus.UNDERDETERMINED, nullspace_dim=deficit, residual=residual
        )
    if residual > residual_rtol * max(np.linalg.norm(rhs), 1e-300):
        return ReconstructionResult(status=ReconstructionStatus.INCONSISTENT, nullspace_dim=0, residual=residual)
    vech_part, q_part, lam, _ = layout.split(solution)
    return ReconstructionResult(
        status=ReconstructionStatus.UNIQUE,
        Q_hat=unvech(vech_part, layout.n),
        q_hat=q_part.copy(),
        lambda_hat=lambda_value if lambda_value is not None else lam,
        gamma_hat=gamma_value,
        nullspace_dim=0,
        residual=residual,
    )


def reconstruct_constant(
    ms: MeasurementSet, residual_rtol: float = RESIDUAL_RTOL, tol_factor: float = DEFAULT_TOL_FACTOR
) -> ReconstructionResult:
    """Recover (alpha Q, alpha q) from constant-step measurements.

    Unique requires full column rank and residual <= residual_rtol * ||rhs||;
    a column-rank deficit reports Underdetermined with the deficit as
    nullspace_dim; a residual above tolerance reports Inconsistent.
    """
    return _solve_inhomogeneous(assemble_constant(ms), residual_rtol, tol_factor)


def reconstruct_diminishing(
    ms: MeasurementSet,
    delta: float,
    residual_rtol: float = RESIDUAL_RTOL,
    tol_factor: float = DEFAULT_TOL_FACTOR,
) -> ReconstructionResult:
    """Recover (c Q, c q) from steps c / max(t, 1)^delta with known delta.

    Rescales y[t] by max(t, 1)^delta, which restores a constant-step system,
    then delegates.  The measurement indices must align with the iteration
    indices of the original trace (pairs taken from t = 0).
    """
    if not (0.5 < delta <= 1.0):
        raise ValueError(f"delta must lie in (1/2, 1], got {delta}")
    _validate_measurements(ms)
    T = len(ms)
    scales = np.array([max(t, 1) ** delta for t in range(T)])
    rescaled = MeasurementSet(x=ms.x.copy(), y=ms.y * scales[:, None])
    return reconstruct_constant(rescaled, residual_rtol, tol_factor)


def _pd_orientation(Q: np.ndarray) -> int:
    """+1 or -1 if that sign makes Q positive definite, else 0."""
    eigenvalues = np.linalg.eigvalsh(Q)
    if eigenvalues[0] > 0:
        return 1
    if eigenvalues[-1] < 0:
        return -1
    return 0


def reconstruct_finite_enum(
    ms: MeasurementSet,
    values,
    budget: int = DEFAULT_ENUM_BUDGET,
    residual_rtol: float = RESIDUAL_RTOL,
    tol_factor: float = DEFAULT_TOL_FACTOR,
    dedupe_rtol: float = DEDUPE_RTOL,
) -> ReconstructionResult:
    """Exhaustive step-sequence hypothesis testing over A^T.

    For each hypothesis the rescaled system y[t]/alpha'[t] = Q'x[t] + q' is
    solved; hypotheses survive when the residual is within tolerance and the
    solved Q' is positive definite.  Survivors are deduplicated up to scale
    (uniform rescalings of the true sequence produce the same ray).  Exactly
    one surviving hypothesis yields Unique at true scale with gamma_hat = 1;
    one surviving ray realized by several hypotheses (all realized steps
    equal, so scale is genuinely unresolvable) yields UniqueUpToScale;
    several rays yield Underdetermined; none yields Inconsistent.
    """
    vals = _validate_step_values(values)
    _validate_measurements(ms)
    T, n = ms.x.shape
    if len(vals) ** T > budget:
        raise EnumerationBudgetError(
            f"hypothesis space {len(vals)}^{T} = {len(vals) ** T} exceeds budget {budget}"
        )
    system = assemble_constant(ms)
    matrix = system.matrix
    ncols = system.layout.total
    rank, _, _ = numerical_rank(matrix, tol_factor)
    if rank < ncols:
        return ReconstructionResult(
            status=ReconstructionStatus.UNDERDETERMINED, nullspace_dim=ncols - rank, residual=None
        )
    u, sigma, vt = np.linalg.svd(matrix, full_matrices=False)
    inv_sigma = 1.0 / sigma
    survivors = []
    best_residual = np.inf
    for sequence in itertools.product(vals, repeat=T):
        rhs = (ms.y / np.array(sequence)[:, None]).ravel()
        z = vt.T @ (inv_sigma * (u.T @ rhs))
        residual = float(np.linalg.norm(matrix @ z - rhs))
        best_residual = min(best_residual, residual)
        if residual > residual_rtol * np.linalg.norm(rhs):
            continue
        vech_part, _, _, _ = system.layout.split(z)
        if _pd_orientation(unvech(vech_part, n)) == 1:
            survivors.append((sequence, z, residual))
    if not survivors:
        return ReconstructionResult(
            status=ReconstructionStatus.INCONSISTENT, nullspace_dim=0, residual=best_residual
        )
    classes: list[list] = []
    for entry in survivors:
        direction = entry[1] / np.linalg.norm(entry[1])
        for cls in classes:
            if np.max(np.abs(direction - cls[0])) <= dedupe_rtol:
                cls[1].append(entry)
                break
        else:
            classes.append((direction, [entry]))
    if len(classes) > 1:
        return ReconstructionResult(
            status=ReconstructionStatus.UNDERDETERMINED, nullspace_dim=len(classes), residual=None
        )
    members = classes[0][1]
    if len(members) == 1:
        sequence, _, _ = members[0]
        rhs = (ms.y / np.array(sequence)[:, None]).ravel()
        z, residual, _, _, _ = solve_least_squares(matrix, rhs, tol_factor)
        vech_part, q_part, _, _ = system.layout.split(z)
        return ReconstructionResult(
            status=ReconstructionStatus.UNIQUE,
            Q_hat=unvech(vech_part, n),
            q_hat=q_part.copy(),
            gamma_hat=1.0,
            nullspace_dim=0,
            residual=residual,
        )
    z = min(members, key=lambda entry: entry[2])[1]
    vech_part, q_part, _, _ = system.layout.split(z)
    Q_hat, q_hat = unvech(vech_part, n), q_part
    scale = float(np.sqrt(np.linalg.norm(Q_hat) ** 2 + np.linalg.norm(q_hat) ** 2))
    return ReconstructionResult(
        status=ReconstructionStatus.UNIQUE_UP_TO_SCALE,
        Q_hat=Q_hat / scale,
        q_hat=q_hat / scale,
        nullspace_dim=0,
        residual=min(entry[2] for entry in members),
    )


def _assemble_homogeneous(
    ms: MeasurementSet,
    per_coordinate_beta: bool,
    C: np.ndarray | None = None,
    d: np.ndarray | None = None,
) -> LinearSystem:
    """Rows: Q'x[t] + q' (+ lambda' w[t]) - beta y[t] = 0, stacked over t."""
    T, n = ms.x.shape
    has_lambda = C is not None
    beta_columns = n * T if per_coordinate_beta else T
    layout = UnknownLayout(n=n, beta_columns=beta_columns, has_lambda=has_lambda)
    eye = np.eye(n)
    if has_lambda:
        C = np.asarray(C, dtype=float)
        d = np.asarray(d, dtype=float)
    rows = np.zeros((n * T, layout.total))
    for t in range(T):
        block = slice(t * n, (t + 1) * n)
        rows[block, : layout.vech_columns] = symmetric_row_block(ms.x[t])
        rows[block, layout.q_start : layout.q_start + n] = eye
        if has_lambda:
            slacks = d - C @ ms.x[t]
            if np.any(slacks <= 0):
                raise ValueError(f"measurement {t} is not strictly feasible for the supplied constraints")
            rows[block, layout.lambda_index] = C.T @ (1.0 / slacks)
        if per_coordinate_beta:
            for i in range(n):
                rows[t * n + i, layout.beta_start + t * n + i] = -ms.y[t, i]
        else:
            rows[block, layout.beta_start + t] = -ms.y[t]
    return LinearSystem(matrix=rows, rhs=np.zeros(n * T), layout=layout)


def _snap_scale(betas: np.ndarray, vals: tuple[float, ...], snap_rtol: float) -> float | None:
    """The unique gamma > 0 placing every gamma*beta on a reciprocal of vals, if any."""
    reciprocals = [1.0 / v for v in vals]
    if betas[0] <= 0:
        return None
    matches = []
    for target in reciprocals:
        gamma = target / float(betas[0])
        if gamma <= 0:
            continue
        ok = all(
            any(abs(gamma * b - r) <= snap_rtol * r for r in reciprocals) for b in betas
        )
        if ok:
            matches.append(gamma)
    distinct = []
    for gamma in matches:
        if not any(abs(gamma - other) <= 1e-12 * other for other in distinct):
            distinct.append(gamma)
    if len(distinct) == 1:
        return distinct[0]
    return None


def _homogeneous_reconstruct(
    ms: MeasurementSet,
    vals: tuple[float, ...],
    C: np.ndarray | None,
    d: np.ndarray | None,
    tol_factor: float,
    snap_rtol: float,
) -> ReconstructionResult:
    system = _assemble_homogeneous(ms, per_coordinate_beta=False, C=C, d=d)
    basis, rank, sigma, _ = nullspace(system.matrix, tol_factor)
    dim = system.layout.total - rank
    smallest = float(sigma[-1]) if sigma.size else 0.0
    if dim == 0:
        return ReconstructionResult(status=ReconstructionStatus.INCONSISTENT, nullspace_dim=0, residual=smallest)
    if dim >= 2:
        return ReconstructionResult(
            status=ReconstructionStatus.UNDERDETERMINED, nullspace_dim=dim, residual=smallest
        )
    z = basis[:, 0]
    vech_part, _, _, _ = system.layout.split(z)
    orientation = _pd_orientation(unvech(vech_part, system.layout.n))
    if orientation == 0:
        return ReconstructionResult(status=ReconstructionStatus.INCONSISTENT, nullspace_dim=1, residual=smallest)
    z = orientation * z
    vech_part, q_part, lam, betas = system.layout.split(z)
    gamma = None
    if betas[0] > 0:
        z_unit_beta = z / betas[0]
        gamma = _snap_scale(system.layout.split(z_unit_beta)[3], vals, snap_rtol)
        if gamma is not None:
            z_final = gamma * z_unit_beta
            vech_part, q_part, lam, _ = system.layout.split(z_final)
            return ReconstructionResult(
                status=ReconstructionStatus.UNIQUE,
                Q_hat=unvech(vech_part, system.layout.n),
                q_hat=q_part.copy(),
                lambda_hat=lam,
                gamma_hat=gamma,
                nullspace_dim=1,
                residual=smallest,
            )
    Q_hat = unvech(vech_part, system.layout.n)
    lam_sq = 0.0 if lam is None else lam**2
    scale = float(np.sqrt(np.linalg.norm(Q_hat) ** 2 + np.linalg.norm(q_part) ** 2 + lam_sq))
    return ReconstructionResult(
        status=ReconstructionStatus.UNIQUE_UP_TO_SCALE,
        Q_hat=Q_hat / scale,
        q_hat=q_part / scale,
        lambda_hat=None if lam is None else lam / scale,
        nullspace_dim=1,
        residual=smallest,
    )


def reconstruct_finite_poly(
    ms: MeasurementSet,
    values,
    tol_factor: float = DEFAULT_TOL_FACTOR,
    snap_rtol: float = SNAP_RTOL,
) -> ReconstructionResult:
    """Finite-step-set reconstruction via the beta = 1/alpha change of variables.

    Builds the homogeneous system over (vech(Q'), q', beta[0..T-1]) and takes
    its SVD nullspace.  Nullity 1 gives the parameter ray: the sign is fixed
    by requiring Q' positive definite (Inconsistent when neither sign works),
    and the scale is resolved by snapping the betas onto reciprocals of the
    step set (UniqueUpToScale when several or no snaps fit, e.g. when every
    realized step was equal).  Nullity >= 2 is Underdetermined; nullity 0 is
    Inconsistent.  Needs at least 2 pairs.
    """
    vals = _validate_step_values(values)
    _validate_measurements(ms, minimum=2)
    return _homogeneous_reconstruct(ms, vals, None, None, tol_factor, snap_rtol)


def reconstruct_constrained(
    ms: MeasurementSet,
    C,
    d,
    values,
    lambda_known: float | None = None,
    tol_factor: float = DEFAULT_TOL_FACTOR,
    snap_rtol: float = SNAP_RTOL,
    residual_rtol: float = RESIDUAL_RTOL,
) -> ReconstructionResult:
    """Barrier-dynamics reconstruction: recovers (Q, q, lambda) up to snap.

    Adds the column sum_i C_i^T / (d_i - C_i x[t]) for the unknown barrier
    weight to the homogeneous finite-set system.  With lambda_known the
    weight's column is folded into the right-hand side, the system becomes
    inhomogeneous, and the scale is pinned exactly (gamma_hat = 1).
    """
    vals = _validate_step_values(values)
    _validate_measurements(ms, minimum=2)
    C = np.asarray(C, dtype=float)
    d = np.asarray(d, dtype=float)
    if C.ndim != 2 or C.shape[1] != ms.n or d.shape != (C.shape[0],):
        raise ValueError(f"constraints must be ({C.shape[0]}, {ms.n}) with matching d, got C {C.shape}, d {d.shape}")
    if lambda_known is None:
        return _homogeneous_reconstruct(ms, vals, C, d, tol_factor, snap_rtol)
    if not lambda_known > 0:
        raise ValueError(f"lambda_known must be positive, got {lambda_known}")
    barrier_free = _assemble_homogeneous(ms, per_coordinate_beta=False, C=C, d=d)
    layout = barrier_free.layout
    keep = [idx for idx in range(layout.total) if idx != layout.lambda_index]
    matrix = barrier_free.matrix[:, keep]
    rhs = -lambda_known * barrier_free.matrix[:, layout.lambda_index]
    reduced = LinearSystem(
        matrix=matrix, rhs=rhs, layout=UnknownLayout(n=layout.n, beta_columns=layout.beta_columns)
    )
    return _solve_inhomogeneous(reduced, residual_rtol, tol_factor, lambda_value=lambda_known, gamma_value=1.0)


def reconstruct_agent_dependent(
    ms: MeasurementSet,
    values,
    C=None,
    d=None,
    tol_factor: float = DEFAULT_TOL_FACTOR,
) -> ReconstructionResult:
    """Witness that per-coordinate steps keep reconstruction underdetermined.

    Each coordinate of each measurement carries its own beta unknown, so the
    system gains n unknowns per pair against n equations: the nullity can
    never fall below n(n+3)/2 (+1 when a barrier weight is present).  The
    estimator reports the measured nullity; it never returns Unique.  The
    step set itself adds no linear information and is accepted only for
    interface symmetry.
    """
    _validate_step_values(values)
    _validate_measurements(ms)
    if (C is None) != (d is None):
        raise ValueError("C and d must be provided together")
    if C is not None:
        C = np.asarray(C, dtype=float)
        d = np.asarray(d, dtype=float)
    system = _assemble_homogeneous(ms, per_coordinate_beta=True, C=C, d=d)
    matrix = system.matrix
    structural = system.layout.beta_start
    # A coordinate whose measurement entry sits below the rank tolerance
    # carries no recoverable step information: its beta column is numerically
    # zero, which would both count a spurious free direction and assert a
    # phantom y = 0 constraint on the parameters.  Dropping the row and the
    # column together reproduces the exact-arithmetic information content
    # (no constraint, no counted freedom); converged tails of long
    # trajectories hit this once measurements decay to the noise floor.
    live = np.ones(matrix.shape[0], dtype=bool)
    entry_scale = np.abs(ms.y.ravel())
    rank = 0
    sigma = np.array([])
    while live.any():
        rows_idx = np.flatnonzero(live)
        cols = np.concatenate([np.arange(structural), structural + rows_idx])
        _, rank, sigma, tol = nullspace(matrix[np.ix_(rows_idx, cols)], tol_factor)
        dead_now = live & (entry_scale <= tol)
        if not dead_now.any():
            break
        live &= ~dead_now
        rank = 0
        sigma = np.array([])
    dim = structural + int(live.sum()) - rank
    return ReconstructionResult(
        status=ReconstructionStatus.UNDERDETERMINED,
        nullspace_dim=dim,
        residual=float(sigma[-1]) if sigma.size else 0.0,
    )


def _ceil_div(numerator: int, denominator: int) -> int:
    return -(-numerator // denominator)


def required_index(mode: str, n: int) -> int | None:
    """Guarantee index k quoted by the identifiability claims this tool checks
    (the claims promise a unique answer from T = k + 1 measurement pairs).

    constant/diminishing: ceil((n+1)/2); finite set: ceil((n+3)/2);
    constrained: ceil((n+3)/2 + 1/n); agent-dependent: None (no finite k).
    These indices come from counting scalar equations (n per pair) against
    unknowns (n(n+3)/2, plus the barrier weight and the per-pair step
    reciprocals where applicable).  The count is necessary but NOT
    sufficient: see sharp_measurement_count for the pair count at which the
    consistent set actually collapses.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if mode in ("constant", "diminishing"):
        return _ceil_div(n + 1, 2)
    if mode in ("finite", "finite_enum", "finite_poly"):
        return _ceil_div(n + 3, 2)
    if mode == "constrained":
        return _ceil_div(n * n + 3 * n + 2, 2 * n)
    if mode == "agent_dependent":
        return None
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def sharp_measurement_count(mode: str, n: int) -> int | None:
    """Pair count T at which the consistent set truly becomes unique.

    Two parameter pairs consistent with the same data differ by a symmetric
    D with D(x_t - x_0) = 0 for every observed t, so D may be any symmetric
    form on the orthogonal complement of span{x_t - x_0}.  That span has
    dimension min(T - 1, n) on a generic trajectory, leaving a residual
    kernel of dimension m(m+1)/2 with m = n - min(T - 1, n): raw equation
    counting overstates what T pairs determine, because nT stacked equations
    carry (T-1)(T-2)/2 symmetry-induced redundancies.  Uniqueness therefore
    needs the iterate differences to span R^n, i.e. T >= n + 1, on top of
    the per-mode column count:

    * constant/diminishing: T = n + 1.
    * finite set via the reciprocal-step relaxation (modes "finite",
      "finite_poly"): T unknowns join, so additionally (n-1)T >= n(n+3)/2 - 1;
      the max is n + 1 for n >= 3, 4 for n = 2, unreachable for n = 1.
    * finite set via enumeration ("finite_enum"): steps are hypothesised, not
      unknown, but wrong hypotheses are only refutable once the per-hypothesis
      system is overdetermined (nT > n(n+3)/2, i.e. T >= floor((n+3)/2) + 1;
      at the square count every step sequence fits the data exactly), giving
      max(n + 1, floor((n+3)/2) + 1): n + 1 for n >= 2, 3 for n = 1 — so
      enumeration still identifies n in {1, 2} where the relaxation cannot.
    * constrained: one barrier-weight column joins, giving
      max(n + 1, ceil(n(n+3) / (2(n-1)))) for n >= 2, unreachable for n = 1.
    * agent-dependent: never (each pair brings n fresh step unknowns).

    The kernel dimensions and these transitions are reproduced numerically
    by the test suite on simulated trajectories.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if mode in ("constant", "diminishing"):
        return n + 1
    if mode == "finite_enum":
        return max(n + 1, (n + 3) // 2 + 1)
    if mode in ("finite", "finite_poly"):
        if n < 2:
            return None
        return max(n + 1, _ceil_div(n * (n + 3) // 2 - 1, n - 1))
    if mode == "constrained":
        if n < 2:
            return None
        return max(n + 1, _ceil_div(n * (n + 3), 2 * (n - 1)))
    if mode == "agent_dependent":
        return None
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class MembershipSummary:
    status: ReconstructionStatus
    nullspace_dim: int
    required_k: int | None
    result: ReconstructionResult


def membership_summary(
    ms: MeasurementSet,
    mode: str,
    values=None,
    delta: float | None = None,
    C=None,
    d=None,
    lambda_known: float | None = None,
    budget: int = DEFAULT_ENUM_BUDGET,
    tol_factor: float = DEFAULT_TOL_FACTOR,
) -> MembershipSummary:
    """Route a measurement set to the matching estimator and report thresholds.

    required_k is the guarantee index for the mode (None for agent-dependent,
    which never identifies).  mode "finite" routes to the polynomial
    estimator; "finite_enum" forces enumeration.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "constant":
        result = reconstruct_constant(ms, tol_factor=tol_factor)
    elif mode == "diminishing":
        if delta is None:
            raise ValueError("diminishing mode requires delta")
        result = reconstruct_diminishing(ms, delta, tol_factor=tol_factor)
    elif mode == "finite_enum":
        if values is None:
            raise ValueError("finite_enum mode requires step values")
        result = reconstruct_finite_enum(ms, values, budget=budget, tol_factor=tol_factor)
    elif mode in ("finite", "finite_poly"):
        if values is None:
            raise ValueError(f"{mode} mode requires step values")
        result = reconstruct_finite_poly(ms, values, tol_factor=tol_factor)
    elif mode == "constrained":
        if values is None or C is None or d is None:
            raise ValueError("constrained mode requires step values and constraints C, d")
        result = reconstruct_constrained(ms, C, d, values, lambda_known=lambda_known, tol_factor=tol_factor)
    else:
        if values is None:
            raise ValueError("agent_dependent mode requires step values")
        result = reconstruct_agent_dependent(ms, values, C=C, d=d, tol_factor=tol_factor)
    return MembershipSummary(
        status=result.status,
        nullspace_dim=result.nullspace_dim,
        required_k=required_index(mode, ms.n),
        result=result,
    )
