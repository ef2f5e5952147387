"""Design-space exploration workbench for guarded-event machine models."""

__version__ = "0.1.0"
