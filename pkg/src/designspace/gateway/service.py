"""HTTP face of the exploration workspace.

One app serves one workspace. Reads hit the stored tree directly;
mutations funnel through a single lock so concurrent clients cannot
interleave tree updates. Every error body has the same shape:
{"code", "message"} plus an optional "span" pointing into a source
file. Retries carrying an X-Request-Id header get the recorded
response back instead of a second execution.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..forge.pipeline import Focus, ForgeError
from ..kernel.check import project_problems
from ..kernel.diffing import diff
from ..navigator.analysis import AnalysisConfig
from ..navigator.patterns import Pattern, PatternError
from ..navigator.tree import (
    ExplorationTree,
    InvalidTransition,
    TreeError,
    UnknownNode,
)
from ..surface.linker import parse_sources
from ..surface.parser import SourceError
from ..surface.printer import render_project
from . import serialize as sz


@dataclass
class ServiceConfig:
    workspace: str | Path
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str,
                 span: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.span = span

    def body(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.span is not None:
            out["span"] = self.span
        return out


def _nope(exc: Exception) -> ApiError:
    """Map a domain failure onto its transport shape."""
    if isinstance(exc, UnknownNode):
        return ApiError(404, "unknown-node", str(exc))
    if isinstance(exc, InvalidTransition):
        return ApiError(409, "invalid-transition", str(exc))
    if isinstance(exc, SourceError):
        d = exc.diagnostics[0]
        return ApiError(400, "parse-error", d.message,
                        span={"path": d.path, "line": d.line, "col": d.col})
    if isinstance(exc, (PatternError, ForgeError)):
        return ApiError(400, "bad-request", str(exc))
    raise exc


def _tree_json(tree: ExplorationTree) -> dict:
    def order(node_id: str):
        return (node_id != "root", len(node_id), node_id)
    return {"root": "root",
            "nodes": [tree.nodes[k].as_dict()
                      for k in sorted(tree.nodes, key=order)]}


def _require(payload, key: str, kind, what: str):
    if not isinstance(payload, dict) or key not in payload:
        raise ApiError(400, "malformed", f"body needs {key!r} ({what})")
    value = payload[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ApiError(400, "malformed", f"{key!r} must be {what}")
    return value


def _optional(payload, key: str, kind, what: str, default):
    if not isinstance(payload, dict) or payload.get(key) is None:
        return default
    value = payload[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ApiError(400, "malformed", f"{key!r} must be {what}")
    return value


def _focus_override(payload) -> Focus | None:
    raw = _optional(payload, "focus", dict, "an object", None)
    if raw is None:
        return None
    events = _optional(raw, "events", list, "a list of names", [])
    variables = _optional(raw, "variables", list, "a list of names", [])
    names = [*events, *variables]
    if any(not isinstance(n, str) for n in names):
        raise ApiError(400, "malformed", "focus names must be strings")
    return Focus(events=tuple(events), variables=tuple(variables))


def build_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="designspace gateway", docs_url=None, redoc_url=None)
    mutate = threading.Lock()       # serializes all tree mutations
    replies: OrderedDict[tuple, tuple[int, dict]] = OrderedDict()
    replies_lock = threading.Lock()

    def open_tree() -> ExplorationTree:
        try:
            return ExplorationTree.open(config.workspace)
        except TreeError as exc:
            raise ApiError(404, "no-project", str(exc)) from exc

    def answer(request: Request, compute) -> JSONResponse:
        """Run one mutation, replaying the recorded answer on a retry."""
        rid = request.headers.get("x-request-id")
        key = (rid, request.method, request.url.path)
        if rid is not None:
            with replies_lock:
                hit = replies.get(key)
            if hit is not None:
                return JSONResponse(hit[1], status_code=hit[0])
        try:
            with mutate:
                status, body = compute()
        except ApiError as exc:
            status, body = exc.status, exc.body()
        if rid is not None and status < 500:
            with replies_lock:
                replies[key] = (status, body)
                while len(replies) > 512:
                    replies.popitem(last=False)
        return JSONResponse(body, status_code=status)

    @app.exception_handler(ApiError)
    async def api_error(request: Request, exc: ApiError):
        return JSONResponse(exc.body(), status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "malformed", "message": str(exc)},
                            status_code=400)

    # ------------------------------------------------------------ reads

    @app.get("/tree")
    def get_tree():
        return _tree_json(open_tree())

    @app.get("/nodes/{node_id}")
    def get_node(node_id: str):
        tree = open_tree()
        try:
            return tree.node(node_id).as_dict()
        except TreeError as exc:
            raise _nope(exc) from exc

    @app.get("/nodes/{node_id}/model")
    def get_model(node_id: str):
        tree = open_tree()
        try:
            manifest, files = render_project(tree.project(node_id))
        except TreeError as exc:
            raise _nope(exc) from exc
        return {"manifest": manifest, "files": files}

    @app.get("/nodes/{node_id}/diff")
    def get_diff(node_id: str, against: str | None = None):
        tree = open_tree()
        try:
            node = tree.node(node_id)
            base = against if against is not None else node.parent
            if base is None:
                raise ApiError(400, "no-baseline",
                               f"{node_id!r} has no parent; pass ?against=")
            edits = diff(tree.project(base), tree.project(node_id))
        except TreeError as exc:
            raise _nope(exc) from exc
        return {"node": node_id, "against": base,
                "edits": sz.edits_json(edits)}

    @app.get("/nodes/{node_id}/report")
    def get_report(node_id: str):
        tree = open_tree()
        try:
            tree.node(node_id)          # unknown id beats missing report
            return tree.report_dict(node_id)
        except UnknownNode as exc:
            raise _nope(exc) from exc
        except TreeError as exc:
            raise ApiError(404, "report-missing", str(exc)) from exc

    # -------------------------------------------------------- mutations

    @app.post("/nodes/{node_id}/analyze")
    def post_analyze(node_id: str, request: Request,
                     payload: dict | None = Body(None)):
        def compute():
            tree = open_tree()
            try:
                report = tree.analyze(node_id, config.analysis)
            except TreeError as exc:
                raise _nope(exc) from exc
            return 200, report.as_dict()
        return answer(request, compute)

    @app.post("/nodes/{node_id}/expand")
    def post_expand(node_id: str, request: Request,
                    payload: dict | None = Body(None)):
        def compute():
            kind = _require(payload, "pattern", str, "a pattern name")
            k = _optional(payload, "k", int, "an integer", 1)
            calibration = _optional(payload, "calibration", str, "a name",
                                    None)
            focus = _focus_override(payload)
            tree = open_tree()
            try:
                pattern = Pattern(kind, k)
                children = tree.expand(node_id, pattern, config.analysis,
                                       calibration, focus)
            except (TreeError, PatternError, ForgeError) as exc:
                raise _nope(exc) from exc
            return 200, {"children": [c.as_dict() for c in children]}
        return answer(request, compute)

    @app.post("/nodes/{node_id}/accept")
    def post_accept(node_id: str, request: Request):
        def compute():
            tree = open_tree()
            try:
                tree.accept(node_id)
            except TreeError as exc:
                raise _nope(exc) from exc
            return 200, tree.node(node_id).as_dict()
        return answer(request, compute)

    @app.post("/nodes/{node_id}/reject")
    def post_reject(node_id: str, request: Request):
        def compute():
            tree = open_tree()
            try:
                tree.reject(node_id)
            except TreeError as exc:
                raise _nope(exc) from exc
            return 200, tree.node(node_id).as_dict()
        return answer(request, compute)

    @app.post("/projects", status_code=201)
    def post_project(request: Request, payload: dict | None = Body(None)):
        def compute():
            files = _require(payload, "files", dict, "a name to text map")
            root = _require(payload, "root", str, "the root machine name")
            if any(not isinstance(v, str) for v in files.values()):
                raise ApiError(400, "malformed", "file contents must be text")
            try:
                project = parse_sources(files, root)
            except SourceError as exc:
                raise _nope(exc) from exc
            problems = project_problems(project)
            if problems:
                raise ApiError(400, "check-failed",
                               "; ".join(p.message for p in problems))
            try:
                tree = ExplorationTree.create(config.workspace, project)
            except TreeError as exc:
                raise ApiError(409, "workspace-occupied", str(exc)) from exc
            return 201, tree.node("root").as_dict()
        return answer(request, compute)

    return app
