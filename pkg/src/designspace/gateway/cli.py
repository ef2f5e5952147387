"""Command line front end.

Verbs mirror the HTTP service so scripted and interactive use stay in
step. Results go to stdout as JSON; diagnostics go to stderr. Exit
status is 0 for success, 1 for anything wrong with the input (parse
errors, bad schedules, invalid tree moves), 2 for an internal fault.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from ..animator.explore import bfs, random_walk
from ..animator.export import export_tables
from ..animator.sim import IntRange, flatten
from ..animator.trace import ReplayError, make_instance, replay
from ..forge.calibrate import error_case_pipeline
from ..forge.pipeline import Focus, ForgeError, run_pipeline
from ..forge.textform import parse_pipeline
from ..kernel.check import project_problems
from ..kernel.hashing import canonical_hash
from ..navigator.analysis import AnalysisConfig, analyze_project
from ..navigator.patterns import Pattern, PatternError
from ..navigator.tree import ExplorationTree, TreeError
from ..surface.linker import parse_project
from ..surface.parser import SourceError
from . import serialize as sz


class CliError(Exception):
    """Bad invocation or bad input; reported on stderr, exit 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; our contract reserves 2 for
    # internal faults, so reroute through the normal diagnostic path
    def error(self, message):
        raise CliError(message)


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _load_project(manifest: str):
    project = parse_project(manifest)
    problems = project_problems(project)
    if problems:
        raise CliError("; ".join(p.message for p in problems))
    return project


def _int_range(args) -> IntRange:
    return IntRange.parse(args.money_range)


def _analysis_config(args) -> AnalysisConfig:
    return AnalysisConfig(
        int_range=_int_range(args),
        max_states=args.max_states,
        theta=args.theta,
        seed=args.seed,
        max_depth=args.depth,
    )


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--money-range", default="0..3", metavar="A..B",
                   help="integer interval substituted for unbounded types")
    p.add_argument("--max-states", type=int, default=2000)
    p.add_argument("--theta", type=float, default=0.4,
                   help="minimum support for reported correlations")
    p.add_argument("--depth", type=int, default=3,
                   help="concept construction depth")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="designspace",
                  description="model construction and exploration toolkit")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("parse", help="check sources and report the model")
    p.add_argument("manifest")

    p = sub.add_parser("simulate", help="run the model and report flaws")
    p.add_argument("manifest")
    p.add_argument("--mode", choices=("random", "bfs"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=100)
    p.add_argument("--max-states", type=int, default=2000)
    p.add_argument("--money-range", default="0..3", metavar="A..B")

    p = sub.add_parser("replay", help="fire a fixed schedule of events")
    p.add_argument("manifest")
    p.add_argument("schedule",
                   help='JSON file: [{"event": "...", "args": {...}}, ...]')
    p.add_argument("--money-range", default="0..3", metavar="A..B")

    p = sub.add_parser("analyze", help="simulate, probe and classify")
    p.add_argument("manifest")
    _add_analysis_flags(p)

    p = sub.add_parser("generate", help="run a transformation pipeline")
    p.add_argument("manifest")
    p.add_argument("--pipeline", help="pipeline text, e.g. "
                   "'Apply deleteVariable On bank WithActiveElements ()'")
    p.add_argument("--calibration",
                   help="run the canned error-case pipeline (C1 or C2)")
    p.add_argument("--sources", action="store_true",
                   help="embed rendered sources for each alternative")

    p = sub.add_parser("tree", help="manage an exploration workspace")
    tsub = p.add_subparsers(dest="tree_verb", required=True)

    t = tsub.add_parser("init", help="seed a workspace with a root model")
    t.add_argument("manifest")
    t.add_argument("--workspace", required=True)

    t = tsub.add_parser("show", help="list every node")
    t.add_argument("--workspace", required=True)

    t = tsub.add_parser("analyze", help="analyze one node")
    t.add_argument("node")
    t.add_argument("--workspace", required=True)
    _add_analysis_flags(t)

    t = tsub.add_parser("expand", help="instantiate a pattern on a node")
    t.add_argument("node")
    t.add_argument("--workspace", required=True)
    t.add_argument("--pattern", required=True,
                   choices=("abstractAway", "errorCase"))
    t.add_argument("--k", type=int, default=1,
                   help="variables to fold away (abstractAway only)")
    t.add_argument("--calibration", help="error-case stage order")
    _add_analysis_flags(t)

    t = tsub.add_parser("accept", help="mark a node as the chosen design")
    t.add_argument("node")
    t.add_argument("--workspace", required=True)

    t = tsub.add_parser("reject", help="close off a node")
    t.add_argument("node")
    t.add_argument("--workspace", required=True)

    p = sub.add_parser("serve", help="serve a workspace over HTTP")
    p.add_argument("--workspace", required=True)
    p.add_argument("--listen", default="127.0.0.1:8123", metavar="HOST:PORT")
    _add_analysis_flags(p)

    return top


# ------------------------------------------------------------------- verbs


def _cmd_parse(args) -> int:
    project = parse_project(args.manifest)
    problems = project_problems(project)
    for p in problems:
        print(f"problem: {p.message}", file=sys.stderr)
    if problems:
        return 1
    _emit({
        "root": project.root,
        "contexts": [c.name for c in project.contexts],
        "machines": [m.name for m in project.machines],
        "hash": canonical_hash(project),
    })
    return 0


def _cmd_simulate(args) -> int:
    model = flatten(_load_project(args.manifest))
    rng = IntRange.parse(args.money_range)
    if args.mode == "bfs":
        res = bfs(model, max_states=args.max_states, int_range=rng)
    else:
        res = random_walk(model, seed=args.seed, max_steps=args.max_steps,
                          int_range=rng)
    _emit({"mode": args.mode, **sz.explore_json(res)})
    return 0


def _cmd_replay(args) -> int:
    model = flatten(_load_project(args.manifest))
    with open(args.schedule, encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise CliError("schedule must be a JSON list of steps")
    try:
        schedule = [make_instance(model, e["event"], e.get("args", {}))
                    for e in entries]
    except (KeyError, TypeError) as exc:
        raise CliError(f"bad schedule entry: {exc}") from exc
    res = replay(model, schedule)
    out = sz.replay_json(res)
    out["tables"] = sz.tables_json(export_tables(model, res.trace))
    _emit(out)
    return 0


def _cmd_analyze(args) -> int:
    report = analyze_project(_load_project(args.manifest),
                             _analysis_config(args))
    _emit(report.as_dict())
    return 0


def _cmd_generate(args) -> int:
    project = _load_project(args.manifest)
    if args.pipeline:
        parsed = parse_pipeline(args.pipeline)
        pipeline, focus = parsed.pipeline, parsed.focus
        model_id = parsed.model_id
    elif args.calibration:
        pipeline, focus = error_case_pipeline(args.calibration), Focus()
        model_id = project.root
    else:
        raise CliError("generate needs --pipeline or --calibration")
    result = run_pipeline(pipeline, project, focus)
    _emit({
        "model": model_id,
        "alternatives": [sz.alternative_json(a, include_sources=args.sources)
                         for a in result.alternatives],
        "discards": [sz.discard_json(d) for d in result.discards],
    })
    return 0


def _cmd_tree(args) -> int:
    if args.tree_verb == "init":
        project = _load_project(args.manifest)
        tree = ExplorationTree.create(args.workspace, project)
        _emit(tree.node("root").as_dict())
        return 0
    tree = ExplorationTree.open(args.workspace)
    if args.tree_verb == "show":
        _emit(_tree_json(tree))
    elif args.tree_verb == "analyze":
        report = tree.analyze(args.node, _analysis_config(args))
        _emit(report.as_dict())
    elif args.tree_verb == "expand":
        children = tree.expand(args.node, Pattern(args.pattern, args.k),
                               _analysis_config(args), args.calibration)
        _emit({"children": [c.as_dict() for c in children]})
    elif args.tree_verb == "accept":
        tree.accept(args.node)
        _emit(tree.node(args.node).as_dict())
    else:
        tree.reject(args.node)
        _emit(tree.node(args.node).as_dict())
    return 0


def _tree_json(tree: ExplorationTree) -> dict:
    def order(node_id: str):
        return (node_id != "root", len(node_id), node_id)
    return {"root": "root",
            "nodes": [tree.nodes[k].as_dict()
                      for k in sorted(tree.nodes, key=order)]}


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, build_app

    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise CliError(f"--listen wants HOST:PORT, got {args.listen!r}")
    app = build_app(ServiceConfig(workspace=args.workspace,
                                  analysis=_analysis_config(args)))
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


_COMMANDS = {
    "parse": _cmd_parse,
    "simulate": _cmd_simulate,
    "replay": _cmd_replay,
    "analyze": _cmd_analyze,
    "generate": _cmd_generate,
    "tree": _cmd_tree,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.verb](args)
    except SourceError as exc:
        for d in exc.diagnostics:
            print(f"{d.path}:{d.line}:{d.col}: {d.message}", file=sys.stderr)
        return 1
    except (CliError, TreeError, ForgeError, PatternError, ReplayError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001  anything else is a bug in here
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
