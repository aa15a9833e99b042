"""FastAPI service wrapping the engine; see ``rubric.service.app``."""

from .app import app, create_app

__all__ = ["app", "create_app"]
