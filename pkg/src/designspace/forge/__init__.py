"""Model transformation: atomic operators, pipelines, and calibrations.

Operators rewrite one project into a fan of alternative projects. Each
alternative carries its provenance (which operator, bound to which
entities) and survives only if the result is well formed. Pipelines
chain operators; a focus restricts which entities operators may bind.
"""
from .reversal import ReversalConfig, reverse_action, DEFAULT_REVERSAL, SET_OPS_ONLY
from .operators import OPERATORS, OpContext
from .conditions import CONDITIONS, eval_condition
from .pipeline import (
    Alternative,
    AndApply,
    Atomic,
    AccumulatorRule,
    Discard,
    Focus,
    ForgeError,
    IfElseRule,
    IfRule,
    ITERATION_CAP,
    Pipeline,
    PipelineResult,
    RepeatUntilRule,
    WhileRule,
    apply_atomic,
    run_pipeline,
)
from .textform import parse_pipeline, ParsedPipeline
from .calibrate import CALIBRATIONS, Calibration, error_case_pipeline

__all__ = [
    "ReversalConfig", "reverse_action", "DEFAULT_REVERSAL", "SET_OPS_ONLY",
    "OPERATORS", "OpContext", "CONDITIONS", "eval_condition",
    "Alternative", "AndApply", "Atomic", "AccumulatorRule", "Discard",
    "Focus", "ForgeError", "IfElseRule", "IfRule", "ITERATION_CAP",
    "PipelineResult", "RepeatUntilRule", "WhileRule",
    "apply_atomic", "run_pipeline",
    "parse_pipeline", "ParsedPipeline",
    "CALIBRATIONS", "Calibration", "error_case_pipeline",
]
