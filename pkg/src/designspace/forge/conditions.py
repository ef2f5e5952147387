"""Structural predicates over a project, used to gate pipeline branches.

All of them inspect the subject machine (the project root) and, where
relevant, the machine it refines. A "partial function" variable is one
declared with the functional arrow; a "powerset" variable is any other
set-valued one.
"""
from __future__ import annotations

from typing import Callable

from ..kernel.model import Machine, Project


def _subject(project: Project) -> Machine:
    return project.root_machine()


def _abstract(project: Project) -> Machine | None:
    above = _subject(project).refines
    if above is None:
        return None
    try:
        return project.machine(above)
    except KeyError:
        return None


def has_abstract_layer(project: Project) -> bool:
    return _abstract(project) is not None


def has_variable_of_type_partial_function(project: Project) -> bool:
    return any(v.functional for v in _subject(project).variables)


def has_variable_of_type_powerset(project: Project) -> bool:
    return any(v.type.kind == "set" and not v.functional
               for v in _subject(project).variables)


def has_abstractable_partial_function_variable(project: Project) -> bool:
    """A partial-function variable the abstract layer does not know yet."""
    layer = _abstract(project)
    if layer is None:
        return False
    return any(v.functional and layer.variable(v.name) is None
               for v in _subject(project).variables)


def has_one_event(project: Project) -> bool:
    return len(_subject(project).events) == 1


CONDITIONS: dict[str, Callable[[Project], bool]] = {
    "hasAbstractLayer": has_abstract_layer,
    "hasVariableOfTypePartialFunction": has_variable_of_type_partial_function,
    "hasVariableOfTypePowerset": has_variable_of_type_powerset,
    "hasAbstractablePartialFunctionVariable": has_abstractable_partial_function_variable,
    "hasOneEvent": has_one_event,
}


def eval_condition(name: str, project: Project) -> bool:
    try:
        cond = CONDITIONS[name]
    except KeyError:
        raise KeyError(f"unknown condition {name!r}") from None
    return cond(project)
