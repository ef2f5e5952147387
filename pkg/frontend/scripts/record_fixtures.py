"""Record gateway API fixtures for the studio's contract tests.

Drives the real service in-process against a throwaway workspace and
freezes the JSON bodies the UI consumes:

  fixtures/criterion4/  bank root analyzed, abstractAway expansion
                        (root + two abstraction children, one analyzed)
  fixtures/criterion5/  errorCase expansion on the same root, with the
                        diff of the child whose debit_err matches the
                        canonical failure event

Re-run with ``npm run record-fixtures`` (or python3 directly) after a
gateway change; the files are deterministic, so a clean diff means the
contract held.
"""
import json
import sys
import tempfile
from importlib import resources
from pathlib import Path

from fastapi.testclient import TestClient

from designspace.gateway.service import ServiceConfig, build_app

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def bank_sources() -> dict:
    base = resources.files("designspace") / "corpus" / "bank4"
    return {
        "files": {
            "Accounts.ebm": (base / "Accounts.ebm").read_text(),
            "Bank.ebm": (base / "Bank.ebm").read_text(),
        },
        "root": "Bank",
    }


def save(stage: str, name: str, payload) -> None:
    path = OUT / stage / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"  {path.relative_to(OUT.parent)}")


def grab(client: TestClient, stage: str, name: str, url: str,
         expect: int = 200) -> dict:
    r = client.get(url)
    assert r.status_code == expect, (url, r.status_code, r.text)
    save(stage, name, r.json())
    return r.json()


def main() -> int:
    with tempfile.TemporaryDirectory() as td:
        app = build_app(ServiceConfig(workspace=str(Path(td) / "ws")))
        client = TestClient(app)

        r = client.post("/projects", json=bank_sources())
        assert r.status_code == 201, r.text

        r = client.post("/nodes/root/analyze", json={})
        assert r.status_code == 200, r.text
        save("criterion4", "report-root", r.json())

        r = client.post("/nodes/root/expand", json={"pattern": "abstractAway", "k": 1})
        assert r.status_code == 200, r.text
        expansion = r.json()
        assert len(expansion["children"]) == 2, "abstraction must fan out to 2"
        save("criterion4", "expand-response", expansion)

        first = expansion["children"][0]["id"]
        r = client.post(f"/nodes/{first}/analyze", json={})
        assert r.status_code == 200, r.text
        save("criterion4", f"report-{first}", r.json())

        grab(client, "criterion4", "tree", "/tree")
        grab(client, "criterion4", "node-root", "/nodes/root")
        grab(client, "criterion4", f"node-{first}", f"/nodes/{first}")
        grab(client, "criterion4", "model-root", "/nodes/root/model")
        grab(client, "criterion4", f"model-{first}", f"/nodes/{first}/model")
        grab(client, "criterion4", f"diff-{first}", f"/nodes/{first}/diff")

        # second child stays unanalyzed: the launcher must render disabled,
        # and asking for its report is the canonical error fixture
        second = expansion["children"][1]["id"]
        r = client.get(f"/nodes/{second}/report")
        assert r.status_code == 404
        save("criterion4", "error-report-missing", r.json())

        r = client.post("/nodes/root/expand", json={"pattern": "errorCase"})
        assert r.status_code == 200, r.text
        errs = r.json()
        assert len(errs["children"]) == 7, "errorCase calibration emits 7"
        save("criterion5", "expand-response", errs)

        # the canonical failure event: pend membership kept, balance
        # guard flipped, both bookkeeping actions reversed
        wanted = None
        for child in errs["children"]:
            diff = client.get(f"/nodes/{child['id']}/diff").json()
            added = [e for e in diff["edits"]
                     if e["op"] == "add-event" and e["name"] == "debit_err"]
            if not added:
                continue
            detail = added[0].get("detail", "")
            if ("bal(a1) < m" in detail
                    and "pend \\ {a1 |-> a2 |-> m}" in detail
                    and "active \\ {a1}" in detail):
                assert wanted is None, "exactly one child matches"
                wanted = (child, diff)
        assert wanted is not None, "no child carries the canonical debit_err"
        child, diff = wanted
        save("criterion5", "node-err", child)
        save("criterion5", "diff-err", diff)
        grab(client, "criterion5", "model-err", f"/nodes/{child['id']}/model")
        grab(client, "criterion5", "tree", "/tree")

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
