"""HTTP service exposing the simulator, estimators, and verification harness."""
from .app import app, create_app

__all__ = ["app", "create_app"]
