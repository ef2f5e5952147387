"""Command line tests, run in process through main(argv).

Stdout is machine-readable JSON, stderr carries diagnostics, and the
exit code discriminates success (0) from bad input (1). The figures
pinned here (2 pipeline alternatives, 11 unconstrained error cases,
focus on debit) agree with the library and HTTP suites.
"""
from __future__ import annotations

import json

import pytest

from designspace.gateway.cli import main
from designspace.kernel.hashing import canonical_hash
from designspace.surface.linker import parse_sources

from conftest import corpus_dir, load

BANK = str(corpus_dir("bank4") / "project.toml")
SMALL = ["--max-states", "150", "--depth", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


# ------------------------------------------------------------------ parse


def test_parse_reports_the_model(capsys):
    d = run_json(capsys, "parse", BANK)
    assert d["root"] == "Bank"
    assert d["machines"] == ["Bank"]
    assert d["contexts"] == ["Accounts"]
    assert d["hash"] == canonical_hash(load("bank4"))


def test_parse_missing_file_is_a_diagnostic(capsys):
    code, out, err = run(capsys, "parse", "no/such/project.toml")
    assert code == 1
    assert out == ""
    assert "error:" in err


def test_parse_bad_source_prints_location(capsys, tmp_path):
    (tmp_path / "Tiny.ebm").write_text(
        "machine Tiny\nvariables\n  x : INT\ninvariants\n"
        "  I1: ghost = 1\ninitialisation\n  act1: x := 0\n"
        "event tick\n  when\n    grd1: x >= 0\n  then\n"
        "    act1: x := x + 1\nend\nend\n")
    (tmp_path / "project.toml").write_text(
        'root = "Tiny"\nfiles = ["Tiny.ebm"]\n')
    code, out, err = run(capsys, "parse", str(tmp_path / "project.toml"))
    assert code == 1
    assert "Tiny.ebm:5:" in err
    assert "ghost" in err


def test_unknown_verb_is_a_diagnostic(capsys):
    code, out, err = run(capsys, "frobnicate")
    assert code == 1
    assert "error:" in err


# --------------------------------------------------------------- simulate


def test_simulate_random_walk_is_deterministic(capsys):
    first = run_json(capsys, "simulate", BANK, "--seed", "5",
                     "--max-steps", "30")
    again = run_json(capsys, "simulate", BANK, "--seed", "5",
                     "--max-steps", "30")
    assert first == again
    assert first["mode"] == "random"
    assert first["nTransitions"] == 30
    assert len(first["traces"]) == 1
    assert len(first["traces"][0]["steps"]) == 30


def test_simulate_bfs_reports_coverage(capsys):
    d = run_json(capsys, "simulate", BANK, "--mode", "bfs",
                 "--max-states", "60", "--money-range", "0..2")
    assert d["mode"] == "bfs"
    assert d["nStates"] >= 60
    assert d["partial"] is True
    # the transfer bug needs a depth the 60-state budget cannot reach
    assert d["violatedInvariants"] == []


# ----------------------------------------------------------------- replay


@pytest.fixture()
def schedule(tmp_path):
    steps = [
        {"event": "start", "args": {"a1": "A1", "a2": "A2", "m": 1}},
        {"event": "debit", "args": {"a1": "A1", "a2": "A2", "m": 1}},
        {"event": "credit", "args": {"a1": "A1", "a2": "A2", "m": 1}},
    ]
    p = tmp_path / "steps.json"
    p.write_text(json.dumps(steps))
    return str(p)


def test_replay_prints_trace_and_tables(capsys, schedule):
    d = run_json(capsys, "replay", BANK, schedule)
    assert len(d["trace"]["steps"]) == 3
    # money in flight: the sum invariant dips while the transfer is split
    assert d["violations"] == [{"step": 1, "invariants": ["I1"]}]
    assert d["trace"]["steps"][0]["post"]["active"] == ["A1"]
    event_rows = d["tables"]["event"]["rows"]
    assert event_rows == [[0, "start"], [1, "debit"], [2, "credit"]]
    bal = d["tables"]["bal"]
    assert bal["columns"] == ["s", "a", "i"]
    assert [r for r in bal["rows"] if r[0] == 1 and r[1] == "A1"] == [[1, "A1", 2]]


def test_replay_disabled_step_fails(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps([
        {"event": "credit", "args": {"a1": "A1", "a2": "A2", "m": 1}}]))
    code, out, err = run(capsys, "replay", BANK, str(p))
    assert code == 1
    assert "not enabled" in err


def test_replay_rejects_bad_schedules(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps([{"args": {}}]))
    code, _, err = run(capsys, "replay", BANK, str(p))
    assert code == 1 and "bad schedule entry" in err
    p.write_text(json.dumps({"event": "start"}))
    code, _, err = run(capsys, "replay", BANK, str(p))
    assert code == 1 and "JSON list" in err
    p.write_text("{nope")
    code, _, err = run(capsys, "replay", BANK, str(p))
    assert code == 1


# ---------------------------------------------------------------- analyze


def test_analyze_focuses_the_failing_event(capsys):
    d = run_json(capsys, "analyze", BANK, *SMALL)
    assert d["focus"]["events"] == ["debit"]
    assert d["probe"][0] == {"event": "start",
                             "args": {"a1": "A1", "a2": "A1", "m": 1}}
    assert d["analysis"]["nearProperties"][0]["invariant"] == "I1"


# --------------------------------------------------------------- generate


def test_generate_runs_pipeline_text_verbatim(capsys):
    text = ("Apply (deleteVariable andApply mergeEvents) On bank "
            "WithActiveElements (Event(debit), Variable(pend))")
    d = run_json(capsys, "generate", BANK, "--pipeline", text, "--sources")
    assert d["model"] == "bank"
    assert len(d["alternatives"]) == 2
    first = d["alternatives"][0]
    assert first["provenance"] == [["deleteVariable", ["pend"]],
                                   ["mergeEvents", ["debit", "credit"]]]
    # embedded sources reparse to the hash the alternative reports
    reparsed = parse_sources(first["sources"]["files"], "Bank")
    assert canonical_hash(reparsed) == first["hash"]


def test_generate_calibration_counts(capsys):
    d = run_json(capsys, "generate", BANK, "--calibration", "C2")
    assert len(d["alternatives"]) == 11
    names = {a["provenance"][0][0] for a in d["alternatives"]}
    assert names == {"combineEvents"}


def test_generate_needs_a_pipeline(capsys):
    code, _, err = run(capsys, "generate", BANK)
    assert code == 1
    assert "--pipeline or --calibration" in err
    code, _, err = run(capsys, "generate", BANK, "--calibration", "C9")
    assert code == 1
    assert "unknown calibration" in err


def test_generate_bad_pipeline_text(capsys):
    code, _, err = run(capsys, "generate", BANK, "--pipeline",
                       "Apply zorch On bank WithActiveElements ()")
    assert code == 1


# ------------------------------------------------------------------- tree


def test_tree_workspace_lifecycle(capsys, tmp_path):
    ws = str(tmp_path / "space")

    node = run_json(capsys, "tree", "init", BANK, "--workspace", ws)
    assert (node["id"], node["status"]) == ("root", "unexplored")

    code, _, err = run(capsys, "tree", "init", BANK, "--workspace", ws)
    assert code == 1 and "already holds a tree" in err

    report = run_json(capsys, "tree", "analyze", "root",
                      "--workspace", ws, *SMALL)
    assert report["focus"]["events"] == ["debit"]

    d = run_json(capsys, "tree", "expand", "root", "--workspace", ws,
                 "--pattern", "abstractAway", "--k", "1", *SMALL)
    assert [c["id"] for c in d["children"]] == ["n1", "n2"]

    code, _, err = run(capsys, "tree", "accept", "n1", "--workspace", ws)
    assert code == 1 and "unexplored" in err

    run_json(capsys, "tree", "analyze", "n1", "--workspace", ws, *SMALL)
    node = run_json(capsys, "tree", "accept", "n1", "--workspace", ws)
    assert node["status"] == "accepted"

    d = run_json(capsys, "tree", "show", "--workspace", ws)
    assert [(n["id"], n["status"]) for n in d["nodes"]] == [
        ("root", "expanded"), ("n1", "accepted"), ("n2", "rejected")]

    code, _, err = run(capsys, "tree", "expand", "ghost", "--workspace", ws,
                       "--pattern", "errorCase", *SMALL)
    assert code == 1 and "ghost" in err


def test_tree_show_without_workspace_fails(capsys, tmp_path):
    code, _, err = run(capsys, "tree", "show",
                       "--workspace", str(tmp_path / "empty"))
    assert code == 1
    assert "holds no tree" in err
