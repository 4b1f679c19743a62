"""FastAPI service exposing the dispersion-potential engine."""

from .app import app

__all__ = ["app"]
