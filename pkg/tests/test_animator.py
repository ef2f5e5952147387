"""Animator: evaluation, stepping, replay, exploration, table export.

The replay oracle is a 9-step transfer scenario on the 4-account model,
worked out by hand: after each step the total of balances is
12,11,12,12,11,11,8,9,12 and the conservation invariant holds exactly in
states {0,2,3,8}.
"""
from __future__ import annotations

import pytest

from designspace.animator import explore, nearby, sim, trace
from designspace.animator.evaluator import EvalFault, eval_expr
from designspace.animator.export import export_tables
from designspace.animator.sim import IntRange
from designspace.kernel.terms import Atom, Pair, ex, ident, intlit
from designspace.surface.linker import parse_sources

A1, A2, A3, A4 = Atom("A1"), Atom("A2"), Atom("A3"), Atom("A4")

SCHEDULE = [
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

EXPECTED_SUMS = [12, 11, 12, 12, 11, 11, 8, 9, 12]
GOOD_STATES = {0, 2, 3, 8}


@pytest.fixture(scope="module")
def bank_model(request):
    from conftest import load
    return sim.flatten(load("bank4"))


def _run_schedule(model):
    insts = [trace.make_instance(model, e, args) for e, args in SCHEDULE]
    return trace.replay(model, insts)


# ---------------------------------------------------------------- evaluator

def test_eval_arithmetic_and_sets():
    env = {"x": 3, "s": frozenset({1, 2})}
    assert eval_expr(ex("add", ident("x"), intlit(4)), env) == 7
    assert eval_expr(ex("in", intlit(2), ident("s")), env) is True
    assert eval_expr(ex("card", ident("s")), env) == 2


def test_eval_apply_faults():
    f = frozenset({Pair(A1, 5)})
    with pytest.raises(EvalFault) as err:
        eval_expr(ex("apply", ident("f"), ident("a")), {"f": f, "a": A2})
    assert err.value.kind == "apply-outside-domain"
    g = frozenset({Pair(A1, 5), Pair(A1, 6)})
    with pytest.raises(EvalFault) as err:
        eval_expr(ex("apply", ident("f"), ident("a")), {"f": g, "a": A1})
    assert err.value.kind == "apply-non-functional"


def test_eval_override():
    f = frozenset({Pair(A1, 5), Pair(A2, 7)})
    g = frozenset({Pair(A1, 9)})
    out = eval_expr(ex("override", ident("f"), ident("g")), {"f": f, "g": g})
    assert out == frozenset({Pair(A1, 9), Pair(A2, 7)})


def test_eval_sum():
    f = frozenset({Pair(A1, 5), Pair(A2, 7)})
    assert eval_expr(ex("sum", ident("f")), {"f": f}) == 12


def test_short_circuit_avoids_fault():
    f = frozenset({Pair(A1, 5)})
    e = ex("and",
           ex("in", ident("a"), ex("dom", ident("f"))),
           ex("ge", ex("apply", ident("f"), ident("a")), intlit(1)))
    assert eval_expr(e, {"f": f, "a": A2}) is False


# ---------------------------------------------------------------- stepping

def test_init_state(bank_model):
    st = sim.init_state(bank_model)
    assert st["bal"] == frozenset({Pair(A1, 3), Pair(A2, 3), Pair(A3, 3), Pair(A4, 3)})
    assert st["pend"] == frozenset()
    assert st["active"] == frozenset()


def test_enabled_count_at_init(bank_model):
    st = sim.init_state(bank_model)
    insts, flaws = sim.enabled(bank_model, st, IntRange(0, 3))
    assert not flaws
    # only start can fire: 4 payers x 4 payees x 4 amounts
    assert {i.event for i in insts} == {"start"}
    assert len(insts) == 64


def test_rhs_reads_pre_state(bank_model):
    # debit subtracts from the pre-state balance even though another
    # action rewrites pend in the same step
    st = sim.init_state(bank_model)
    st, _ = sim.step(bank_model, st,
                     trace.make_instance(bank_model, "start",
                                         {"a1": "A1", "a2": "A2", "m": 2}))
    post, flaws = sim.step(bank_model, st,
                           trace.make_instance(bank_model, "debit",
                                               {"a1": "A1", "a2": "A2", "m": 2}))
    assert not flaws
    assert Pair(A1, 1) in post["bal"]
    assert post["pend"] == frozenset()
    assert post["trans"] == frozenset({Pair(Pair(A1, A2), 2)})


def test_pointwise_update_keeps_other_entries(bank_model):
    st = sim.init_state(bank_model)
    st, _ = sim.step(bank_model, st,
                     trace.make_instance(bank_model, "start",
                                         {"a1": "A2", "a2": "A3", "m": 1}))
    post, _ = sim.step(bank_model, st,
                       trace.make_instance(bank_model, "debit",
                                           {"a1": "A2", "a2": "A3", "m": 1}))
    assert post["bal"] == frozenset(
        {Pair(A1, 3), Pair(A2, 2), Pair(A3, 3), Pair(A4, 3)})


def test_parallel_write_collision_is_fault():
    src = """machine M
variables f : POW(INT ** INT)
initialisation act1: f := {1 |-> 0, 2 |-> 0}
event clash
  any i : INT, j : INT
  when grd1: i = j
  then act1: f(i) := 1
       act2: f(j) := 2
end
end"""
    project = parse_sources({"M": src}, root="M")
    model = sim.flatten(project)
    st = sim.init_state(model)
    inst = trace.make_instance(model, "clash", {"i": 1, "j": 1})
    post, flaws = sim.step(model, st, inst)
    assert any(f.kind == "evaluation-fault" for f in flaws)
    assert post == st  # faulted steps do not move the state


# ---------------------------------------------------------------- replay

def test_replay_scenario_sums(bank_model):
    res = _run_schedule(bank_model)
    states = res.trace.states()
    assert len(states) == 10
    sums = [sum(p.right for p in st["bal"]) for st in states[1:]]
    assert sums == EXPECTED_SUMS


def test_replay_final_balances(bank_model):
    res = _run_schedule(bank_model)
    final = res.trace.states()[-1]["bal"]
    assert final == frozenset({Pair(A1, 5), Pair(A2, 3), Pair(A3, 0), Pair(A4, 4)})


def test_replay_violations_match_sums(bank_model):
    res = _run_schedule(bank_model)
    bad = {s for s, labels in res.violations if labels}
    assert bad == {1, 4, 5, 6, 7}


def test_replay_not_enabled_fails_fast(bank_model):
    insts = [trace.make_instance(bank_model, "debit",
                                 {"a1": "A1", "a2": "A2", "m": 1})]
    with pytest.raises(trace.ReplayError) as err:
        trace.replay(bank_model, insts)
    assert err.value.index == 0


def test_replay_rejects_unknown_argument(bank_model):
    with pytest.raises(KeyError):
        trace.make_instance(bank_model, "start",
                            {"a1": "A1", "a2": "A2", "m": 1, "zz": 2})


# ---------------------------------------------------------------- explore

def test_random_walk_deterministic(bank_model):
    r1 = explore.random_walk(bank_model, seed=7, max_steps=30, int_range=IntRange(1, 3))
    r2 = explore.random_walk(bank_model, seed=7, max_steps=30, int_range=IntRange(1, 3))
    assert [s.instance for s in r1.traces[0].steps] == \
        [s.instance for s in r2.traces[0].steps]
    r3 = explore.random_walk(bank_model, seed=8, max_steps=30, int_range=IntRange(1, 3))
    assert [s.instance for s in r1.traces[0].steps] != \
        [s.instance for s in r3.traces[0].steps]


def test_bfs_finds_deadlock_in_tight_instance():
    from conftest import load
    model = sim.flatten(load("bank2"))
    res = explore.bfs(model, max_states=500, int_range=IntRange(1, 2))
    assert res.deadlocks, "two 1-unit accounts must wedge on 2-unit transfers"
    assert res.deadlock_traces
    # witness replays to the dead state
    wit = res.deadlock_traces[0]
    replayed = trace.replay(model, [s.instance for s in wit.steps])
    last = replayed.trace.states()[-1]
    insts, _ = sim.enabled(model, last, IntRange(1, 2))
    assert insts == []


def test_bfs_partial_flag():
    from conftest import load
    model = sim.flatten(load("bank4"))
    res = explore.bfs(model, max_states=10, int_range=IntRange(1, 3))
    assert res.partial


# ---------------------------------------------------------------- export

def test_export_shapes(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    assert set(tables) >= {"bal", "pend", "trans", "active", "event", "good", "C"}
    bal = tables["bal"]
    assert bal.columns == ("s", "a", "i")
    assert len(bal) == 36
    assert tables["pend"].columns == ("s", "a1", "a2", "i")
    assert len(tables["pend"]) == 3
    assert len(tables["trans"]) == 6
    assert tables["active"].columns == ("s", "a")
    assert len(tables["active"]) == 9
    assert tables["event"].columns == ("s", "e")
    assert len(tables["event"]) == 9


def test_export_good_states(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    assert {r[0] for r in tables["good"].rows} == GOOD_STATES


def test_export_event_column(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    got = dict(tables["event"].rows)
    assert got == {0: "start", 1: "debit", 2: "credit", 3: "start",
                   4: "debit", 5: "start", 6: "debit", 7: "credit",
                   8: "credit"}


def test_export_excludes_initial_state(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    assert tables["bal"].domain("s") == frozenset(range(9))


def test_export_constant_table(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    assert tables["C"].rows == frozenset((s, 12) for s in range(9))


def test_export_integer_domain_covers_constants(bank_model):
    res = _run_schedule(bank_model)
    tables = export_tables(bank_model, res.trace)
    assert tables["bal"].domain("i") == frozenset(range(0, 13))


# ------------------------------------------------------------ near misses

def test_near_property_on_scenario(bank_model):
    res = _run_schedule(bank_model)
    props = nearby.near_properties(bank_model, res.trace)
    assert len(props) == 1
    p = props[0]
    assert p.invariant == "I1"
    assert p.violators == ("debit",)
    assert p.restorers == ("credit",)
    assert p.runs == 2
    assert p.restored is True


def test_near_property_unrestored_tail(bank_model):
    insts = [trace.make_instance(bank_model, e, a) for e, a in SCHEDULE[:2]]
    res = trace.replay(bank_model, insts)
    props = nearby.near_properties(bank_model, res.trace)
    assert props[0].restored is False
    assert props[0].restorers == ()
