"""Request/response models for the HTTP service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..harness import ExperimentConfig
from ..reconstruct import DEFAULT_ENUM_BUDGET


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    expose_steps: bool = False


class SimulateResponse(BaseModel):
    summary: dict
    files: dict[str, str]


class ReconstructRequest(BaseModel):
    """A measurement set plus the estimator route and its parameters.

    x and y are (T, n) row lists; count (if given) keeps only the first
    count pairs.  values/delta/C/d/lambda_known are required or ignored per
    mode, mirroring the library routing.
    """

    model_config = ConfigDict(extra="forbid")
    x: list[list[float]] = Field(min_length=1)
    y: list[list[float]] = Field(min_length=1)
    mode: Literal[
        "constant",
        "diminishing",
        "finite",
        "finite_enum",
        "finite_poly",
        "constrained",
        "agent_dependent",
    ]
    values: Optional[list[float]] = None
    delta: Optional[float] = None
    C: Optional[list[list[float]]] = None
    d: Optional[list[float]] = None
    lambda_known: Optional[float] = Field(default=None, gt=0)
    budget: int = Field(default=DEFAULT_ENUM_BUDGET, ge=1)
    tol_factor: float = Field(default=64.0, gt=0)
    count: Optional[int] = Field(default=None, ge=1)


class ReconstructionResultModel(BaseModel):
    status: str
    Q_hat: Optional[list[list[float]]] = None
    q_hat: Optional[list[float]] = None
    lambda_hat: Optional[float] = None
    gamma_hat: Optional[float] = None
    nullspace_dim: int = 0
    residual: Optional[float] = None


class ReconstructResponse(BaseModel):
    status: str
    nullspace_dim: int
    required_k: Optional[int]
    transition_count: Optional[int]
    pairs_used: int
    result: ReconstructionResultModel


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    theorem: str
    config: ExperimentConfig


class VerifyResponse(BaseModel):
    theorem: str
    verdict: str
    report: dict
    report_json: str
    wall_clock_seconds: float


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig


class SweepResponse(BaseModel):
    verdict: str
    csv: str
    report: dict
    wall_clock_seconds: float


class HealthResponse(BaseModel):
    status: str
    version: str
