from __future__ import annotations

import importlib.resources
from pathlib import Path

import pytest

from designspace.surface.linker import parse_project


def corpus_dir(name: str) -> Path:
    return Path(importlib.resources.files("designspace")) / "corpus" / name


def load(name: str):
    return parse_project(str(corpus_dir(name) / "project.toml"))


@pytest.fixture(scope="session")
def bank4():
    return load("bank4")


@pytest.fixture(scope="session")
def bank2():
    return load("bank2")


@pytest.fixture(scope="session")
def a1():
    return load("a1")


@pytest.fixture(scope="session")
def a4():
    return load("a4")


# Shared replay schedules. The 4-account scenario reproduces the worked
# transfer example; the two-event variant drives the post-abstraction
# machine through the same transfers.
FIG_STEPS = [
    ("start", {"a1": "A1", "a2": "A2", "m": 1}),
    ("debit", {"a1": "A1", "a2": "A2", "m": 1}),
    ("credit", {"a1": "A1", "a2": "A2", "m": 1}),
    ("start", {"a1": "A2", "a2": "A4", "m": 1}),
    ("debit", {"a1": "A2", "a2": "A4", "m": 1}),
    ("start", {"a1": "A3", "a2": "A1", "m": 3}),
    ("debit", {"a1": "A3", "a2": "A1", "m": 3}),
    ("credit", {"a1": "A2", "a2": "A4", "m": 1}),
    ("credit", {"a1": "A3", "a2": "A1", "m": 3}),
]

TWO_EVENT_STEPS = [
    ("debit_abs", {"a1": "A1", "a2": "A2", "m": 1}),
    ("credit", {"a1": "A1", "a2": "A2", "m": 1}),
    ("debit_abs", {"a1": "A2", "a2": "A4", "m": 1}),
    ("debit_abs", {"a1": "A3", "a2": "A1", "m": 3}),
    ("credit", {"a1": "A2", "a2": "A4", "m": 1}),
    ("credit", {"a1": "A3", "a2": "A1", "m": 3}),
]


def instances(model, steps):
    from designspace.animator.trace import make_instance
    return [make_instance(model, name, dict(args)) for name, args in steps]
