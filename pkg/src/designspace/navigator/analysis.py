"""Per-node analysis: bounded exploration, a flaw-probe dataset, theory
formation, and classification, bundled into one report.

The probe schedule, not a long random walk, feeds the theory. A walk
interleaves transfers, so almost every event ends up firing from an
already-bad state and the failure focus smears across the whole
machine. The probe's bad window is minimal, which keeps the focus on
the events that actually broke the invariant."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..animator import nearby
from ..animator.explore import ExploreResult, bfs, flaw_probe, random_walk
from ..animator.export import export_tables
from ..animator.sim import EventInstance, FlatModel, IntRange, flatten
from ..animator.trace import replay
from ..former.classify import AnalysisReport, classify
from ..former.gluing import GluingError, gluing_for_pair
from ..former.theory import FormerConfig, form_theory
from ..kernel.model import Project
from ..kernel.terms import Atom, idents


@dataclass(frozen=True)
class AnalysisConfig:
    int_range: IntRange = IntRange()
    max_states: int = 2000       # breadth-first budget
    probe_windows: int = 2
    max_depth: int = 3
    theta: float = 0.4
    seed: int = 0
    quick_steps: int = 200       # shallow re-simulation for ranking
    quick_seeds: int = 3
    fallback_steps: int = 24     # dataset walk when nothing breaks


@dataclass
class NodeReport:
    n_states: int
    n_transitions: int
    deadlock_schedules: list[list[EventInstance]]
    violated_invariants: tuple[str, ...]
    flaw_kinds: tuple[str, ...]
    partial: bool
    probe: list[EventInstance]
    analysis: AnalysisReport
    flaws: list = field(default_factory=list)

    @property
    def deadlocked(self) -> bool:
        return bool(self.deadlock_schedules)

    @property
    def focus_events(self) -> tuple[str, ...]:
        """Events worth constraining the next expansion to.

        Classification implicates every event whose correlated concepts
        touch bad states, which widens as the theory deepens. The
        near-property scan names the events actually observed to flip an
        invariant; when that sharper signal exists it wins."""
        violators: set[str] = set()
        for near in self.analysis.near_properties:
            violators.update(near.violators)
        if violators:
            return tuple(sorted(violators))
        return self.analysis.focus_events

    @property
    def focus_variables(self) -> tuple[str, ...]:
        return self.analysis.focus_variables

    def as_dict(self, plain_cap: int = 60) -> dict:
        full = self.analysis.as_dict()
        plain = [c for c in full["conjectures"]
                 if c.get("tags") == ["plain"]]
        kept = [c for c in full["conjectures"]
                if c.get("tags") != ["plain"]] + plain[:plain_cap]
        return {
            "focus": {
                "events": list(self.focus_events),
                "variables": list(self.focus_variables),
            },
            "sim": {
                "nStates": self.n_states,
                "nTransitions": self.n_transitions,
                "deadlocks": len(self.deadlock_schedules),
                "deadlockWitnesses": [
                    [instance_as_json(i) for i in s]
                    for s in self.deadlock_schedules],
                "violatedInvariants": list(self.violated_invariants),
                "flawKinds": sorted(self.flaw_kinds),
                "flaws": [f.as_dict() for f in sorted(
                    self.flaws, key=lambda f: (f.kind, f.subject, f.detail))],
                "partial": self.partial,
            },
            "probe": [instance_as_json(i) for i in self.probe],
            "analysis": {**full,
                         "conjectures": kept,
                         "conjecturesTotal": len(full["conjectures"])},
        }


def _value_as_json(v):
    if isinstance(v, Atom):
        return v.name
    return v


def instance_as_json(inst: EventInstance) -> dict:
    return {"event": inst.event,
            "args": {n: _value_as_json(v) for n, v in inst.binding}}


def invariant_symbols(model: FlatModel) -> frozenset:
    """Variables and constants the invariants mention; these get
    expanded first during theory formation."""
    names = {v.name for v in model.variables} | set(model.constants)
    out: set[str] = set()
    for _, inv in model.invariants:
        out |= {n for n, _ in idents(inv.pred)} & names
    return frozenset(out)


def analyze_project(project: Project,
                    config: AnalysisConfig = AnalysisConfig()) -> NodeReport:
    model = flatten(project)
    space: ExploreResult = bfs(model, max_states=config.max_states,
                               int_range=config.int_range)

    probe = flaw_probe(model, int_range=config.int_range,
                       max_states=config.max_states,
                       windows=config.probe_windows)
    if probe:
        res = replay(model, probe)
        dataset = res.trace
    else:
        dataset = random_walk(model, seed=config.seed,
                              max_steps=config.fallback_steps,
                              int_range=config.int_range).traces[0]

    bundle = list(export_tables(model, dataset).values())
    theory = form_theory(bundle, FormerConfig(
        max_depth=config.max_depth, theta=config.theta,
        priority=invariant_symbols(model)))

    gluings: list = []
    above = project.root_machine().refines
    if above:
        abstract = flatten(project, root=above)
        try:
            gluings = gluing_for_pair(
                abstract, model, [s.instance for s in dataset.steps],
                FormerConfig(max_depth=config.max_depth, theta=config.theta))
        except GluingError:
            gluings = []

    report = classify(theory, model,
                      nearby.near_properties(model, dataset), gluings)
    return NodeReport(
        n_states=space.n_states,
        n_transitions=space.n_transitions,
        deadlock_schedules=[[s.instance for s in t.steps]
                            for t in space.deadlock_traces],
        violated_invariants=tuple(sorted(space.violated_labels)),
        flaw_kinds=tuple(sorted(space.flaw_kinds())),
        partial=space.partial,
        probe=probe,
        analysis=report,
        flaws=list(space.flaws),
    )
