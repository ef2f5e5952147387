"""Command line and HTTP front ends over the toolkit."""

from .cli import main
from .service import ApiError, ServiceConfig, build_app

__all__ = ["ApiError", "ServiceConfig", "build_app", "main"]
