"""gradleak: gradient-trajectory leakage simulator and estimators.

Simulates gradient ascent/descent on quadratic programs under several
step-size policies, and implements the eavesdropper's side: estimators that
try to recover the hidden objective (and barrier weight) from observed
iterate/update pairs, together with a Monte Carlo harness that checks when
recovery provably succeeds or provably fails.
"""
from ._version import __version__
from .harness import (
    ConfigError,
    ExperimentConfig,
    SimulationBundle,
    SweepOutcome,
    Tolerances,
    VerificationReport,
    config_schema,
    run_trial,
    simulate,
    sweep,
    verify_theorem,
    write_bundle,
)
from .qp import (
    ConstraintSet,
    FeasibilityError,
    ProblemInstance,
    QuadraticUtility,
    SamplerError,
    descent_direction,
    instance_from_json,
    instance_to_json,
    objective_value,
    optimum,
    sample_initial_point,
    sample_utility,
)
from .reconstruct import (
    MembershipSummary,
    ReconstructionResult,
    ReconstructionStatus,
    membership_summary,
    reconstruct_agent_dependent,
    reconstruct_constant,
    reconstruct_constrained,
    reconstruct_diminishing,
    reconstruct_finite_enum,
    reconstruct_finite_poly,
    required_index,
    sharp_measurement_count,
)
from .rng import KeyedStream
from .steps import (
    AgentDependent,
    Constant,
    Diminishing,
    UniformFinite,
    policy_from_dict,
    policy_to_dict,
    step_matrix,
    validate_policy,
    wolfe_bounds,
)
from .trajectory import (
    MeasurementSet,
    Trace,
    TrajectoryError,
    check_independence,
    convergence_metrics,
    measurements,
    measurements_from_dict,
    measurements_to_dict,
    run,
    trace_sidecar,
    trace_to_csv,
)

__all__ = [
    "__version__",
    "AgentDependent",
    "ConfigError",
    "Constant",
    "ConstraintSet",
    "Diminishing",
    "ExperimentConfig",
    "FeasibilityError",
    "KeyedStream",
    "MeasurementSet",
    "MembershipSummary",
    "ProblemInstance",
    "QuadraticUtility",
    "ReconstructionResult",
    "ReconstructionStatus",
    "SamplerError",
    "SimulationBundle",
    "SweepOutcome",
    "Tolerances",
    "Trace",
    "TrajectoryError",
    "UniformFinite",
    "VerificationReport",
    "check_independence",
    "config_schema",
    "convergence_metrics",
    "descent_direction",
    "instance_from_json",
    "instance_to_json",
    "measurements",
    "measurements_from_dict",
    "measurements_to_dict",
    "membership_summary",
    "objective_value",
    "optimum",
    "policy_from_dict",
    "policy_to_dict",
    "reconstruct_agent_dependent",
    "reconstruct_constant",
    "reconstruct_constrained",
    "reconstruct_diminishing",
    "reconstruct_finite_enum",
    "reconstruct_finite_poly",
    "required_index",
    "run",
    "run_trial",
    "sample_initial_point",
    "sample_utility",
    "sharp_measurement_count",
    "simulate",
    "step_matrix",
    "sweep",
    "trace_sidecar",
    "trace_to_csv",
    "validate_policy",
    "verify_theorem",
    "wolfe_bounds",
    "write_bundle",
]
