"""HTTP service tests.

One module-scoped workspace walks the whole protocol in stages: upload,
analyze, expand, accept. Read endpoints are checked between stages, and
every response body is validated against the published schema file so
the schema cannot rot. Counts asserted here (2 abstraction children, 7
error-case children) match the CLI and library figures for the same
model and configuration.
"""
from __future__ import annotations

import importlib.resources
import json
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from designspace.gateway.service import ServiceConfig, build_app
from designspace.kernel.hashing import canonical_hash
from designspace.navigator.analysis import AnalysisConfig
from designspace.surface.linker import parse_sources

from conftest import corpus_dir, load

SMALL = AnalysisConfig(max_states=150, probe_windows=1, max_depth=2,
                       quick_steps=25, quick_seeds=1, fallback_steps=6)

SCHEMA = json.loads(
    (Path(importlib.resources.files("designspace"))
     / "gateway" / "api.schema.json").read_text())


def valid(payload, ref: str):
    jsonschema.validate(payload,
                        {"$defs": SCHEMA["$defs"], "$ref": f"#/$defs/{ref}"})
    return payload


def bank_sources() -> dict[str, str]:
    d = corpus_dir("bank4")
    return {p.name: p.read_text() for p in d.iterdir() if p.suffix == ".ebm"}


def make_client(tmp) -> TestClient:
    cfg = ServiceConfig(workspace=tmp, analysis=SMALL)
    return TestClient(build_app(cfg))


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    """Workspace with the four-account model uploaded, the root
    analyzed, and the abstraction pattern expanded into n1/n2."""
    c = make_client(tmp_path_factory.mktemp("gateway"))
    assert c.post("/projects",
                  json={"files": bank_sources(), "root": "Bank"}
                  ).status_code == 201
    assert c.post("/nodes/root/analyze").status_code == 200
    r = c.post("/nodes/root/expand", json={"pattern": "abstractAway", "k": 1})
    assert [n["id"] for n in r.json()["children"]] == ["n1", "n2"]
    return c


# ------------------------------------------------------------ lifecycle


def test_empty_workspace_has_no_tree(tmp_path):
    c = make_client(tmp_path)
    r = c.get("/tree")
    assert r.status_code == 404
    assert valid(r.json(), "error")["code"] == "no-project"


def test_upload_creates_unexplored_root(tmp_path):
    c = make_client(tmp_path)
    r = c.post("/projects", json={"files": bank_sources(), "root": "Bank"})
    assert r.status_code == 201
    node = valid(r.json(), "node")
    assert node["id"] == "root"
    assert node["status"] == "unexplored"
    assert node["parent"] is None
    assert node["hash"] == canonical_hash(load("bank4"))


def test_second_upload_conflicts(tmp_path):
    c = make_client(tmp_path)
    c.post("/projects", json={"files": bank_sources(), "root": "Bank"})
    r = c.post("/projects", json={"files": bank_sources(), "root": "Bank"})
    assert r.status_code == 409
    assert valid(r.json(), "error")["code"] == "workspace-occupied"


def test_upload_parse_error_carries_span(tmp_path):
    c = make_client(tmp_path)
    files = dict(bank_sources())
    files["Bank.ebm"] = files["Bank.ebm"].replace("invariants", "invariphants", 1)
    r = c.post("/projects", json={"files": files, "root": "Bank"})
    assert r.status_code == 400
    body = valid(r.json(), "error")
    assert body["code"] == "parse-error"
    assert body["span"]["path"] == "Bank.ebm"
    assert body["span"]["line"] > 0


def test_upload_rejects_junk_bodies(tmp_path):
    c = make_client(tmp_path)
    for payload in ({}, {"files": {}}, {"root": "Bank"},
                    {"files": "nope", "root": "Bank"},
                    {"files": {"a.ebm": 3}, "root": "Bank"}):
        r = c.post("/projects", json=payload)
        assert r.status_code == 400, payload
        assert valid(r.json(), "error")["code"] == "malformed"
    r = c.post("/projects", content=b"{oops",
               headers={"content-type": "application/json"})
    assert r.status_code == 400
    assert valid(r.json(), "error")["code"] == "malformed"


# ----------------------------------------------------------------- reads


def test_tree_lists_nodes_in_order(client):
    body = valid(client.get("/tree").json(), "tree")
    assert body["root"] == "root"
    assert [n["id"] for n in body["nodes"]] == ["root", "n1", "n2"]
    assert body["nodes"][0]["status"] == "expanded"


def test_node_lookup(client):
    node = valid(client.get("/nodes/n1").json(), "node")
    assert node["parent"] == "root"
    assert node["pattern"] == {"kind": "abstractAway", "k": 1}
    assert node["rank"]["position"] == 0
    r = client.get("/nodes/zzz")
    assert r.status_code == 404
    assert valid(r.json(), "error")["code"] == "unknown-node"


def test_model_sources_round_trip(client):
    body = valid(client.get("/nodes/n1/model").json(), "model")
    reparsed = parse_sources(body["files"], "Bank")
    assert canonical_hash(reparsed) == client.get("/nodes/n1").json()["hash"]


def test_diff_defaults_to_parent(client):
    body = valid(client.get("/nodes/n1/diff").json(), "diff")
    assert body["against"] == "root"
    ops = {(e["op"], e["name"]) for e in body["edits"]}
    assert ("remove-variable", "pend") in ops
    assert ("add-event", "debit_abs") in ops
    added = next(e for e in body["edits"] if e["op"] == "add-event")
    assert "debit_abs" in added["detail"]


def test_diff_against_sibling_and_errors(client):
    body = valid(client.get("/nodes/n1/diff?against=n2").json(), "diff")
    assert body["against"] == "n2"
    assert body["edits"]
    assert client.get("/nodes/n1/diff?against=zzz").status_code == 404
    r = client.get("/nodes/root/diff")
    assert r.status_code == 400
    assert valid(r.json(), "error")["code"] == "no-baseline"


def test_report_retrieval(client):
    body = valid(client.get("/nodes/root/report").json(), "report")
    assert body["focus"]["events"] == ["debit"]
    assert body["sim"]["nStates"] > 0
    r = client.get("/nodes/n2/report")
    assert r.status_code == 404
    assert valid(r.json(), "error")["code"] == "report-missing"


# ------------------------------------------------------------- mutations


def test_expand_requires_analysis_first(tmp_path):
    c = make_client(tmp_path)
    c.post("/projects", json={"files": bank_sources(), "root": "Bank"})
    r = c.post("/nodes/root/expand", json={"pattern": "abstractAway", "k": 1})
    assert r.status_code == 409
    assert valid(r.json(), "error")["code"] == "invalid-transition"
    r = c.post("/nodes/root/accept")
    assert r.status_code == 409


def test_error_case_expansion(client):
    from designspace.surface.printer import render_expr

    r = client.post("/nodes/root/expand", json={"pattern": "errorCase"})
    children = valid(r.json(), "children")["children"]
    assert len(children) == 7
    # every child adds a debit_err variant; exactly one pairs the
    # insufficient-funds guard with the bookkeeping-undo actions
    hits = []
    for child in children:
        body = client.get(f"/nodes/{child['id']}/model").json()
        machine = parse_sources(body["files"], "Bank").root_machine()
        err = machine.event("debit_err")
        assert err is not None
        if [render_expr(g.pred) for g in err.guards] == \
                ["a1 |-> a2 |-> m : pend", "bal(a1) < m"]:
            hits.append(child["id"])
    assert len(hits) == 1


def test_expand_with_focus_override(client):
    r = client.post("/nodes/root/expand",
                    json={"pattern": "abstractAway", "k": 1,
                          "focus": {"events": ["debit"],
                                    "variables": ["trans"]}})
    children = valid(r.json(), "children")["children"]
    assert children
    for child in children:
        assert child["provenance"][0] == ["deleteVariable", ["trans"]]


def test_expand_rejects_malformed_requests(client):
    for payload, code in (
            ({}, "malformed"),
            ({"pattern": 7}, "malformed"),
            ({"pattern": "zigzag"}, "bad-request"),
            ({"pattern": "abstractAway", "k": 9}, "bad-request"),
            ({"pattern": "abstractAway", "focus": {"events": "debit"}},
             "malformed")):
        r = client.post("/nodes/root/expand", json=payload)
        assert r.status_code == 400, payload
        assert valid(r.json(), "error")["code"] == code


def test_reject(client):
    # last unexplored child; n1/n2 stay untouched for the accept test
    listing = client.get("/tree").json()["nodes"]
    target = [n["id"] for n in listing if n["status"] == "unexplored"][-1]
    assert target not in ("n1", "n2")
    r = client.post(f"/nodes/{target}/reject")
    assert valid(r.json(), "node")["status"] == "rejected"


def test_accept_flow(client):
    assert client.post("/nodes/n1/analyze").status_code == 200
    r = client.post("/nodes/n1/accept")
    assert r.status_code == 200
    assert valid(r.json(), "node")["status"] == "accepted"
    # accepting one branch closes its siblings
    assert client.get("/nodes/n2").json()["status"] == "rejected"
    r = client.post("/nodes/n2/accept")
    assert r.status_code == 409


def test_analyze_unknown_node_404(client):
    r = client.post("/nodes/ghost/analyze")
    assert r.status_code == 404
    assert valid(r.json(), "error")["code"] == "unknown-node"


# ----------------------------------------------------------- idempotency


def test_request_id_replays_recorded_response(client):
    h = {"X-Request-Id": "retry-probe-1"}
    first = client.post("/nodes/root/analyze", headers=h)
    again = client.post("/nodes/root/analyze", headers=h)
    assert first.status_code == again.status_code == 200
    assert first.json() == again.json()


def test_request_id_makes_expand_safe_to_retry(client):
    # an expansion retried with the same id must not mint new nodes
    h = {"X-Request-Id": "retry-probe-2"}
    body = {"pattern": "abstractAway", "k": 2}
    first = client.post("/nodes/root/expand", json=body, headers=h)
    before = len(client.get("/tree").json()["nodes"])
    again = client.post("/nodes/root/expand", json=body, headers=h)
    after = len(client.get("/tree").json()["nodes"])
    assert first.json() == again.json()
    assert before == after


def test_request_id_replays_errors_too(client):
    h = {"X-Request-Id": "retry-probe-3"}
    first = client.post("/nodes/ghost/analyze", headers=h)
    again = client.post("/nodes/ghost/analyze", headers=h)
    assert first.status_code == again.status_code == 404
    assert first.json() == again.json()
