"""The exploration tree: one directory per workspace, one node per
considered model, with analyses, ranks, and the designer's decisions.

Layout:

    workspace/
      tree.json            nodes, edges, statuses, ranks
      nodes/<id>/          rendered model sources (manifest + .ebm)
      reports/<id>.json    analysis report per analyzed node
      .lock                flock target serializing writers
"""
from __future__ import annotations

import fcntl
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from ..forge import Focus, run_pipeline
from ..kernel.hashing import canonical_hash
from ..kernel.model import Project
from ..surface.linker import parse_project
from ..surface.printer import render_project
from .analysis import AnalysisConfig, NodeReport, analyze_project
from .patterns import Pattern, pattern_focus, pattern_pipeline
from .rank import rank_children

STATUSES = ("unexplored", "analyzed", "expanded", "accepted", "rejected")


class TreeError(Exception):
    pass


class UnknownNode(TreeError):
    pass


class InvalidTransition(TreeError):
    pass


@dataclass
class Node:
    id: str
    parent: str | None
    hash: str
    status: str = "unexplored"
    pattern: dict | None = None
    provenance: tuple = ()
    focus: dict | None = None
    rank: dict | None = None
    report_file: str | None = None
    sources_dir: str = ""

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "parent": self.parent,
            "hash": self.hash,
            "status": self.status,
            "pattern": self.pattern,
            "provenance": [[op, list(args)] for op, args in self.provenance],
            "focus": self.focus,
            "rank": self.rank,
            "report": self.report_file,
            "sources": self.sources_dir,
        }

    @staticmethod
    def from_dict(d: dict) -> "Node":
        return Node(
            id=d["id"], parent=d["parent"], hash=d["hash"],
            status=d["status"], pattern=d["pattern"],
            provenance=tuple((op, tuple(args)) for op, args in d["provenance"]),
            focus=d["focus"], rank=d["rank"],
            report_file=d["report"], sources_dir=d["sources"])


def _focus_dict(f: Focus) -> dict:
    return {"events": list(f.events), "variables": list(f.variables),
            "invariants": list(f.invariants)}


def _focus_from_dict(d: dict) -> Focus:
    return Focus(events=tuple(d.get("events", ())),
                 variables=tuple(d.get("variables", ())),
                 invariants=tuple(d.get("invariants", ())))


@dataclass
class _ReportFocus:
    focus_events: tuple
    focus_variables: tuple


class ExplorationTree:
    ROOT_ID = "root"

    def __init__(self, workspace: Path, nodes: dict[str, Node], next_id: int):
        self.workspace = Path(workspace)
        self.nodes = nodes
        self.next_id = next_id
        self.by_hash = {n.hash: n.id for n in nodes.values()}

    # ------------------------------------------------------------- lifecycle

    @classmethod
    def create(cls, workspace: str | Path, project: Project) -> "ExplorationTree":
        ws = Path(workspace)
        ws.mkdir(parents=True, exist_ok=True)
        if (ws / "tree.json").exists():
            raise TreeError(f"{ws} already holds a tree")
        tree = cls(ws, {}, 1)
        root = Node(id=cls.ROOT_ID, parent=None,
                    hash=canonical_hash(project),
                    sources_dir=f"nodes/{cls.ROOT_ID}")
        with tree._locked():
            tree._write_sources(root.sources_dir, project)
            tree.nodes[root.id] = root
            tree.by_hash[root.hash] = root.id
            tree._save()
        return tree

    @classmethod
    def open(cls, workspace: str | Path) -> "ExplorationTree":
        ws = Path(workspace)
        path = ws / "tree.json"
        if not path.exists():
            raise TreeError(f"{ws} holds no tree")
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        nodes = {d["id"]: Node.from_dict(d) for d in data["nodes"]}
        return cls(ws, nodes, data["next"])

    def _save(self) -> None:
        data = {"version": 1, "next": self.next_id,
                "nodes": [n.as_dict() for n in self.nodes.values()]}
        tmp = self.workspace / "tree.json.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)
        os.replace(tmp, self.workspace / "tree.json")

    @contextmanager
    def _locked(self, shared: bool = False):
        path = self.workspace / ".lock"
        fd = os.open(path, os.O_CREAT | os.O_RDWR, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_SH if shared else fcntl.LOCK_EX)
            yield
        finally:
            fcntl.flock(fd, fcntl.LOCK_UN)
            os.close(fd)

    def _write_sources(self, rel_dir: str, project: Project) -> None:
        target = self.workspace / rel_dir
        target.mkdir(parents=True, exist_ok=True)
        manifest, files = render_project(project)
        (target / "project.toml").write_text(manifest, encoding="utf-8")
        for name, content in files.items():
            (target / name).write_text(content, encoding="utf-8")

    # ----------------------------------------------------------------- reads

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no node {node_id!r}") from None

    def children(self, node_id: str) -> list[Node]:
        self.node(node_id)
        return [n for n in self.nodes.values() if n.parent == node_id]

    def project(self, node_id: str) -> Project:
        n = self.node(node_id)
        return parse_project(str(self.workspace / n.sources_dir / "project.toml"))

    def report_dict(self, node_id: str) -> dict:
        n = self.node(node_id)
        if n.report_file is None:
            raise TreeError(f"node {node_id!r} has no report yet")
        with open(self.workspace / n.report_file, encoding="utf-8") as fh:
            return json.load(fh)

    def check_invariants(self) -> None:
        """Raise if the structure degraded: a hash collision, a dangling
        or cyclic parent link, or an accepted node off the accepted path."""
        hashes = [n.hash for n in self.nodes.values()]
        if len(set(hashes)) != len(hashes):
            raise TreeError("duplicate canonical hashes")
        for n in self.nodes.values():
            seen = {n.id}
            cur = n
            while cur.parent is not None:
                if cur.parent in seen:
                    raise TreeError(f"cycle through {cur.parent!r}")
                seen.add(cur.parent)
                cur = self.node(cur.parent)
            if cur.id != self.ROOT_ID:
                raise TreeError(f"{n.id!r} does not descend from the root")
        for n in self.nodes.values():
            if n.status == "accepted" and n.parent is not None:
                up = self.node(n.parent)
                if up.parent is not None and up.status != "accepted":
                    raise TreeError(f"accepted {n.id!r} under unaccepted parent")

    # ------------------------------------------------------------ operations

    def analyze(self, node_id: str,
                config: AnalysisConfig = AnalysisConfig()) -> NodeReport:
        n = self.node(node_id)
        report = analyze_project(self.project(node_id), config)
        with self._locked():
            rel = f"reports/{node_id}.json"
            (self.workspace / "reports").mkdir(exist_ok=True)
            tmp = self.workspace / (rel + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(report.as_dict(), fh, indent=1)
            os.replace(tmp, self.workspace / rel)
            n.report_file = rel
            if n.status == "unexplored":
                n.status = "analyzed"
            self._save()
        return report

    def _report_focus(self, node_id: str) -> _ReportFocus:
        focus = self.report_dict(node_id)["focus"]
        return _ReportFocus(tuple(focus["events"]), tuple(focus["variables"]))

    def expand(self, node_id: str, pattern: Pattern,
               config: AnalysisConfig = AnalysisConfig(),
               calibration: str | None = None,
               focus_override: Focus | None = None) -> list[Node]:
        n = self.node(node_id)
        if n.status in ("unexplored", "rejected"):
            raise InvalidTransition(f"cannot expand {n.status} node {node_id!r}")
        parent_project = self.project(node_id)
        pipeline = pattern_pipeline(pattern, calibration)
        if focus_override is not None:
            focus = focus_override
        else:
            focus = pattern_focus(pattern, self._report_focus(node_id),
                                  parent_project)
        result = run_pipeline(pipeline, parent_project, focus)
        ranked = rank_children(parent_project, result.alternatives, config)

        added: list[Node] = []
        with self._locked():
            for position, rc in enumerate(ranked):
                h = canonical_hash(rc.alternative.project)
                if h in self.by_hash:
                    continue
                child_id = f"n{self.next_id}"
                self.next_id += 1
                child = Node(
                    id=child_id, parent=node_id, hash=h,
                    pattern=pattern.as_dict(),
                    provenance=rc.alternative.provenance,
                    focus=_focus_dict(focus),
                    rank={"position": position, "key": list(rc.key),
                          "quick": rc.look.as_dict(), "diffSize": rc.diff_size},
                    sources_dir=f"nodes/{child_id}")
                self._write_sources(child.sources_dir, rc.alternative.project)
                self.nodes[child_id] = child
                self.by_hash[h] = child_id
                added.append(child)
            if n.status != "accepted":
                n.status = "expanded"
            self._save()
        return added

    def accept(self, node_id: str) -> Node:
        n = self.node(node_id)
        if n.status == "accepted":
            return n
        if n.status not in ("analyzed", "expanded"):
            raise InvalidTransition(
                f"cannot accept {n.status} node {node_id!r}")
        if n.parent is not None:
            up = self.node(n.parent)
            if up.parent is not None and up.status != "accepted":
                raise InvalidTransition(
                    f"parent {up.id!r} is not accepted")
        with self._locked():
            n.status = "accepted"
            for sib in self.children(n.parent) if n.parent else []:
                if sib.id != n.id:
                    sib.status = "rejected"
            self._save()
        return n

    def reject(self, node_id: str) -> Node:
        n = self.node(node_id)
        if n.status == "rejected":
            return n
        if n.status == "accepted":
            raise InvalidTransition(f"{node_id!r} is already accepted")
        with self._locked():
            n.status = "rejected"
            self._save()
        return n
