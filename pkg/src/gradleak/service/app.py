"""FastAPI application wrapping the core package.

Domain errors (bad configs, infeasible geometry, estimator misuse) map to
HTTP 400 with a detail string; malformed request bodies are FastAPI's usual
422.  All heavy lifting stays in the core modules so the endpoints are thin.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import harness, qp, reconstruct, trajectory
from .._version import __version__
from ..trajectory import MeasurementSet
from . import schemas

_DOMAIN_ERRORS = (
    harness.ConfigError,
    qp.FeasibilityError,
    qp.SamplerError,
    trajectory.TrajectoryError,
    reconstruct.EnumerationBudgetError,
    ValueError,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="gradleak",
        version=__version__,
        description="Gradient-trajectory simulator and objective-recovery estimators.",
    )

    async def _domain_error_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    for exc_type in _DOMAIN_ERRORS:
        app.add_exception_handler(exc_type, _domain_error_handler)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/schema/config")
    def config_schema() -> dict:
        return harness.config_schema()

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest):
        bundle = harness.simulate(request.config, expose_steps=request.expose_steps)
        return schemas.SimulateResponse(summary=bundle.summary, files=bundle.files)

    @app.post("/reconstruct", response_model=schemas.ReconstructResponse)
    def reconstruct_endpoint(request: schemas.ReconstructRequest):
        ms = MeasurementSet(x=np.array(request.x, dtype=float), y=np.array(request.y, dtype=float))
        if request.count is not None:
            ms = ms.first(request.count)
        summary = reconstruct.membership_summary(
            ms,
            request.mode,
            values=request.values,
            delta=request.delta,
            C=None if request.C is None else np.array(request.C, dtype=float),
            d=None if request.d is None else np.array(request.d, dtype=float),
            lambda_known=request.lambda_known,
            budget=request.budget,
            tol_factor=request.tol_factor,
        )
        transition = reconstruct.sharp_measurement_count(request.mode, ms.n)
        return schemas.ReconstructResponse(
            status=summary.status.value,
            nullspace_dim=summary.nullspace_dim,
            required_k=summary.required_k,
            transition_count=transition,
            pairs_used=len(ms),
            result=schemas.ReconstructionResultModel(**summary.result.to_dict()),
        )

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(request: schemas.VerifyRequest):
        report = harness.verify_theorem(request.theorem, request.config)
        return schemas.VerifyResponse(
            theorem=report.theorem,
            verdict=report.verdict,
            report=report.payload,
            report_json=report.to_json(),
            wall_clock_seconds=report.wall_clock_seconds,
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest):
        outcome = harness.sweep(request.config)
        return schemas.SweepResponse(
            verdict=outcome.verdict,
            csv=outcome.csv,
            report=outcome.payload,
            wall_clock_seconds=outcome.wall_clock_seconds,
        )

    return app


app = create_app()
