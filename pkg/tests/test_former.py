"""Theory formation: production rules, conjectures, classification, gluing.

The worked oracle is the divisor-counting example: over the integers
1..10, counting divisors gives the tau table below (checked against a
brute-force count in the test itself), selecting tau = 2 gives the
primes, and every prime is a non-square.
"""
from __future__ import annotations

from math import isqrt

import pytest

from conftest import FIG_STEPS, TWO_EVENT_STEPS, instances
from designspace.animator import nearby, sim, trace
from designspace.animator.export import export_tables
from designspace.former import concepts, gluing
from designspace.former.classify import classify
from designspace.former.concepts import PRError, apply_pr
from designspace.former.tables import table
from designspace.former.theory import FormerConfig, form_theory

N10 = frozenset(range(1, 11))

TAU_ROWS = frozenset({(1, 1), (2, 2), (3, 2), (4, 3), (5, 2),
                      (6, 4), (7, 2), (8, 4), (9, 3), (10, 4)})
PRIME_ROWS = frozenset({(2,), (3,), (5,), (7,)})


def divisors_table():
    rows = {(n, d) for n in N10 for d in N10 if n % d == 0}
    return table("div", ("n", "d"), rows, {"n": N10, "d": N10},
                 symbols={"div"})


def nonsquare_table():
    rows = {(n,) for n in N10 if isqrt(n) ** 2 != n}
    return table("nonsq", ("n",), rows, {"n": N10}, symbols={"nonsq"})


def test_tau_oracle_matches_brute_force():
    # frozen expectation, independently recomputed here
    brute = {(n, sum(1 for d in range(1, n + 1) if n % d == 0))
             for n in range(1, 11)}
    assert frozenset(brute) == TAU_ROWS


def test_size_builds_tau():
    tau = concepts.size(divisors_table(), ("n",))
    assert tau.rows == TAU_ROWS
    assert tau.defn == "size(div)"
    assert tau.depth == 1
    assert tau.history[-1].rule == "size"


def test_split_selects_primes():
    tau = concepts.size(divisors_table(), ("n",))
    primes = concepts.split(tau, tau.columns[1], 2)
    assert primes.rows == PRIME_ROWS
    assert primes.arity == 1
    assert primes.history[-1].params == (tau.columns[1], 2)


def test_theory_finds_primes_are_nonsquares():
    th = form_theory([divisors_table(), nonsquare_table()],
                     FormerConfig(max_depth=2))
    hits = [c for c in th.conjectures
            if c.kind == "implies" and c.lhs.rows == PRIME_ROWS
            and c.rhs.defn == "nonsq"]
    assert hits, [c.definition for c in th.conjectures]
    assert hits[0].satisfying == 4 and hits[0].total == 4
    assert hits[0].support == 1.0


# ------------------------------------------------------- rule semantics

def test_negate_complements_within_domains():
    t = table("t", ("x",), {(1,), (3,)}, {"x": frozenset({1, 2, 3})})
    n = concepts.negate(t)
    assert n.rows == frozenset({(2,)})
    assert concepts.negate(n).rows == t.rows


def test_sum_is_totalised_with_zero_rows():
    t = table("t", ("s", "i"), {(1, 5), (1, 2)},
              {"s": frozenset({1, 2}), "i": frozenset({2, 5})})
    s = concepts.total(t, "i", ("s",))
    assert s.rows == frozenset({(1, 7), (2, 0)})


def test_size_is_observational():
    t = table("t", ("s", "i"), {(1, 5)},
              {"s": frozenset({1, 2}), "i": frozenset({5})})
    z = concepts.size(t, ("s",))
    assert z.rows == frozenset({(1, 1)})  # no row for the unseen group


def test_arith_replaces_operand_columns():
    t = table("t", ("s", "a", "b"), {(1, 4, 1)},
              {"s": frozenset({1}), "a": frozenset({4}), "b": frozenset({1})})
    plus = concepts.arith(t, "+", ("a", "b"))
    minus = concepts.arith(t, "-", ("a", "b"))
    assert plus.rows == frozenset({(1, 5)})
    assert minus.rows == frozenset({(1, 3)})
    assert plus.columns[0] == "s" and plus.arity == 2


def test_exists_projects_and_dedups():
    t = table("t", ("s", "a"), {(1, "x"), (1, "y")},
              {"s": frozenset({1}), "a": frozenset({"x", "y"})})
    e = concepts.exists(t, ("a",))
    assert e.rows == frozenset({(1,)})


def test_compose_is_natural_join():
    t = table("t", ("s", "a"), {(1, 10), (2, 20)},
              {"s": frozenset({1, 2}), "a": frozenset({10, 20})})
    u = table("u", ("s", "b"), {(1, 7)},
              {"s": frozenset({1, 2}), "b": frozenset({7})})
    c = concepts.compose(t, u)
    assert c.columns == ("s", "a", "b")
    assert c.rows == frozenset({(1, 10, 7)})
    assert c.symbols == frozenset()


def test_compose_rejects_sort_mismatch():
    t = table("t", ("s", "a"), set(), {"s": frozenset({1}), "a": frozenset()})
    u = table("u", ("s", "b"), set(), {"s": frozenset({2}), "b": frozenset()})
    with pytest.raises(PRError):
        concepts.compose(t, u)


def test_apply_pr_validates_parametrization():
    t = divisors_table()
    with pytest.raises(PRError):
        apply_pr([t], "split", column="nope", value=1)
    with pytest.raises(PRError):
        apply_pr([t], "size", group=("n", "d"))
    got = apply_pr([t], "size", group=("n",))
    assert got.rows == TAU_ROWS


def test_background_tables_have_no_history():
    assert divisors_table().history == ()


# ---------------------------------------------------- conjecture mechanics

def _pair_bundle():
    dom = {"x": frozenset(range(10))}
    big = table("big", ("x",), {(i,) for i in range(4)}, dom)
    small = table("small", ("x",), {(0,), (1,)}, dom)
    return big, small


def test_support_triples():
    big, small = _pair_bundle()
    th = form_theory([big, small], FormerConfig(max_depth=1, theta=0.4))
    by_kind = {c.kind: c for c in th.conjectures
               if {c.lhs.defn, c.rhs.defn} == {"big", "small"}}
    imp = by_kind["implies"]
    assert (imp.lhs.defn, imp.rhs.defn) == ("small", "big")
    assert (imp.satisfying, imp.total, imp.support) == (2, 2, 1.0)
    near = by_kind["near-implies"]
    assert (near.lhs.defn, near.rhs.defn) == ("big", "small")
    assert (near.satisfying, near.total, near.support) == (2, 4, 0.5)
    niff = by_kind["near-iff"]
    assert (niff.satisfying, niff.total, niff.support) == (2, 4, 0.5)


def test_lower_theta_only_adds_conjectures():
    big, small = _pair_bundle()

    def keys(theta):
        th = form_theory([big, small],
                         FormerConfig(max_depth=2, theta=theta))
        return {(c.kind, c.lhs.defn, c.rhs.defn) for c in th.conjectures}

    assert keys(0.6) <= keys(0.4) <= keys(0.2)


def test_duplicate_rowset_reports_iff_once():
    dom = {"x": frozenset(range(5))}
    a = table("a", ("x",), {(1,), (2,)}, dom)
    b = table("b", ("x",), {(1,), (2,)}, dom)
    th = form_theory([a, b], FormerConfig(max_depth=1))
    assert [t.defn for t in th.concepts if t.depth == 0] == ["a"]
    iffs = [c for c in th.conjectures if c.kind == "iff"]
    assert [(c.lhs.defn, c.rhs.defn) for c in iffs] == [("a", "b")]


def test_empty_concepts_are_suppressed():
    dom = {"x": frozenset(range(3))}
    a = table("a", ("x",), {(0,)}, dom)
    e = table("e", ("x",), set(), dom)
    th = form_theory([a, e], FormerConfig(max_depth=1))
    assert all("e" != t.defn for t in th.concepts)
    assert all("e" not in (c.lhs.defn, c.rhs.defn) for c in th.conjectures)


def test_theory_is_deterministic(bank4):
    model = sim.flatten(bank4)
    res = trace.replay(model, instances(model, FIG_STEPS))
    bundle = list(export_tables(model, res.trace).values())
    cfg = FormerConfig(max_depth=2)
    one = [c.definition for c in form_theory(bundle, cfg).conjectures]
    two = [c.definition for c in form_theory(bundle, cfg).conjectures]
    assert one == two and one


def test_budget_marks_partial():
    big, small = _pair_bundle()
    th = form_theory([big, small], FormerConfig(max_depth=3, max_tables=3))
    assert th.partial


# -------------------------------------------------- bank-model conjectures

@pytest.fixture(scope="module")
def fig_theory(bank4):
    model = sim.flatten(bank4)
    res = trace.replay(model, instances(model, FIG_STEPS))
    bundle = list(export_tables(model, res.trace).values())
    return model, res, form_theory(bundle, FormerConfig(max_depth=2))


def test_debit_states_imply_bad(fig_theory):
    _, _, th = fig_theory
    hits = [c for c in th.conjectures if c.kind == "implies"
            and c.lhs.defn == "split<e=debit>(event)"
            and c.rhs.defn == "negate(good)"]
    assert hits and hits[0].support == 1.0


def test_bad_states_imply_active_nonempty(fig_theory):
    _, _, th = fig_theory
    hits = [c for c in th.conjectures if c.kind == "implies"
            and c.lhs.defn == "negate(good)"
            and c.rhs.defn == "exists(active)"]
    assert hits and hits[0].support == 1.0


def test_all_good_trace_never_mentions_bad(bank4):
    model = sim.flatten(bank4)
    # single complete transfer: every intermediate state is re-checked
    steps = FIG_STEPS[:3]
    res = trace.replay(model, instances(model, steps))
    good_states = {s for s, labels in res.violations if not labels}
    assert good_states == {0, 2}, "schedule sanity"
    bundle = [t for t in export_tables(model, res.trace).values()]
    keep = [t for t in bundle if t.defn in ("good", "event", "active")]
    th = form_theory(keep, FormerConfig(max_depth=2))
    # good == all states here would be required for full suppression;
    # instead check the stated rule directly: no implication has an
    # empty-left concept
    assert all(len(c.lhs) > 0 for c in th.conjectures)


def test_classify_focus_covers_debit_and_pend(fig_theory):
    model, res, th = fig_theory
    report = classify(th, model,
                      nearby.near_properties(model, res.trace))
    assert "debit" in report.focus_events
    assert {"active", "pend"} <= set(report.focus_variables)
    assert report.near_properties
    failure = [c for c in report.ranked if "failure-linked" in c.tags]
    assert failure and failure == sorted(
        failure, key=lambda c: (-c.support, c.definition_size(), c.index))


@pytest.fixture(scope="module")
def two_event_theory(a1):
    model = sim.flatten(a1)
    res = trace.replay(model, instances(model, TWO_EVENT_STEPS))
    bundle = list(export_tables(model, res.trace).values())
    cfg = FormerConfig(max_depth=3, priority=frozenset({"bal", "C"}))
    return model, res, form_theory(bundle, cfg)


def test_conservation_adaptation_found(two_event_theory):
    model, res, th = two_event_theory
    report = classify(th, model,
                      nearby.near_properties(model, res.trace))
    assert "SIGMA(bal) + SIGMA(trans) = C" in report.adaptations


def test_bad_iff_inflight_transfers(two_event_theory):
    model, res, th = two_event_theory
    report = classify(th, model,
                      nearby.near_properties(model, res.trace))
    # the bad states coincide with both "a transfer is in flight" views
    failure = [c for c in report.conjectures if "failure-linked" in c.tags]
    syms = set().union(*({*c.lhs.symbols, *c.rhs.symbols} for c in failure))
    assert {"trans", "active"} <= syms
    assert {"trans", "active"} <= set(report.focus_variables)


# ------------------------------------------------------------------ gluing

def test_gluing_finds_conservation_bridge(a4, a1):
    abstract = sim.flatten(a4, root="AbsBank")
    concrete = sim.flatten(a1)
    found = gluing.gluing_for_pair(
        abstract, concrete, instances(concrete, TWO_EVENT_STEPS),
        FormerConfig(max_depth=3))
    wanted = [c for c in found
              if c.lhs.defn == "sum(abs.abal)"
              and c.rhs.defn == "arith+(compose(sum(bal), sum(trans)))"]
    assert wanted, [c.definition for c in found[:20]]
    assert "gluing" in wanted[0].tags


def test_identity_pairing_glues_each_variable(a1):
    model = sim.flatten(a1)
    found = gluing.gluing_for_pair(
        model, model, instances(model, TWO_EVENT_STEPS),
        FormerConfig(max_depth=1))
    pairs = {(c.lhs.defn, c.rhs.defn) for c in found}
    for v in ("bal", "trans", "active"):
        assert (f"abs.{v}", v) in pairs


def test_gluing_without_abstract_variables_is_empty():
    assert gluing.find_gluing([], [divisors_table()]) == []


def test_gluing_rejects_mismatched_state_spaces():
    a = table("abs.v", ("s",), {(0,)}, {"s": frozenset({0})},
              symbols={"abs.v"})
    b = table("v", ("s",), {(0,)}, {"s": frozenset({0, 1})},
              symbols={"v"})
    with pytest.raises(gluing.GluingError):
        gluing.find_gluing([a], [b])
