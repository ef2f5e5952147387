"""Analysis-generation loop over an exploration tree.

analyze probes a node's model for flaws and forms a theory over the
probe trace; patterns turn the resulting report into transformation
pipelines; expand runs one and files the ranked alternatives as child
nodes, deduplicated by canonical hash. Accepting a child records the
designer's choice and rejects its siblings. Everything persists under
one workspace directory.
"""
from .analysis import (
    AnalysisConfig,
    NodeReport,
    analyze_project,
    instance_as_json,
    invariant_symbols,
)
from .patterns import (
    PATTERN_KINDS,
    Pattern,
    PatternError,
    instantiate_pattern,
    pattern_focus,
    pattern_pipeline,
)
from .rank import QuickLook, RankedChild, quick_look, rank_children
from .tree import (
    ExplorationTree,
    InvalidTransition,
    Node,
    TreeError,
    UnknownNode,
)

__all__ = [
    "AnalysisConfig",
    "NodeReport",
    "analyze_project",
    "instance_as_json",
    "invariant_symbols",
    "PATTERN_KINDS",
    "Pattern",
    "PatternError",
    "instantiate_pattern",
    "pattern_focus",
    "pattern_pipeline",
    "QuickLook",
    "RankedChild",
    "quick_look",
    "rank_children",
    "ExplorationTree",
    "InvalidTransition",
    "Node",
    "TreeError",
    "UnknownNode",
]
