"""HTTP service exposing the predictor library."""

from .app import create_app

__all__ = ["create_app"]
