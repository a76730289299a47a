"""Command-line entry point: ``liftorient <subcommand> [flags]``.

Exit codes: 0 success, 1 a requested verification failed, 2 usage,
precondition or resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable

from . import __version__
from .errors import DomainError, InvariantViolation, ResourceError
from .immersion import ImmersionParams, branch_overlay, build_immersion
from .infinite import find_ray_cut, parse_generator
from .lifting import classify, lifting_graph, max_independent_set_size
from .multigraph import MultiGraph, format_edge_list, parse_edge_list, to_dot
from .oracles import (
    InstanceSpec,
    analyse_instance,
    build_figure1,
    build_instance,
    corpus_specs,
    post_lift_liftable,
)
from .orient import OrientationTrace, orient, replay, verify_k_arc_connected
from .orient_infinite import run as run_infinite
from .sequence import run_lifting_sequence, verify_lift_sequence

log = logging.getLogger("liftorient")


class VerificationFailed(Exception):
    def __init__(self, payload: dict):
        super().__init__("verification failed")
        self.payload = payload


def _graph_json(g: MultiGraph) -> dict:
    return {"vertices": list(g.vertices), "edges": [[e, u, v] for e, u, v in g.edge_triples()]}


def _graph_from_json(d: dict) -> MultiGraph:
    return MultiGraph(d["vertices"], [tuple(t) for t in d["edges"]])


def _load_graph(args) -> tuple[MultiGraph, int | None]:
    """Graph from --in (edge list or JSON artifact), with s from the file if recorded."""
    if not args.input:
        raise DomainError("--in is required")
    text = Path(args.input).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        g = _graph_from_json(d["graph"] if "graph" in d else d)
        return g, d.get("s")
    s = None
    for line in text.splitlines():
        if line.startswith("# s ="):
            s = int(line.split("=", 1)[1])
    return parse_edge_list(text), s


def _pick_s(args, recorded: int | None) -> int:
    if args.s is not None:
        return args.s
    if recorded is not None:
        return recorded
    return 0


def _config(args) -> dict:
    skip = {"func"}
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"subcommand": args.command, "flags": flags, "version": __version__}


def _need_k(args) -> int:
    if args.k is None:
        raise DomainError("--k is required")
    return args.k


# -- subcommands --------------------------------------------------------------------


def cmd_gen(args) -> dict:
    k = _need_k(args)
    spec = InstanceSpec(args.family, args.seed, args.n, k, args.deg_s)
    g, s = build_instance(spec)
    return {"kind": "graph", "instance": spec.ident, "s": s, "graph": _graph_json(g), "_edges": g, "_s": s}


def cmd_lift_graph(args) -> dict:
    k = _need_k(args)
    g, recorded = _load_graph(args)
    s = _pick_s(args, recorded)
    lg = lifting_graph(g, s, k, jobs=args.jobs)
    return {
        "kind": "lifting-graph",
        "s": s,
        "k": k,
        "graph": _graph_json(g),
        "nodes": list(lg.nodes),
        "adjacency": [list(p) for p in sorted(lg.adjacency)],
        "_lg": lg,
    }


def cmd_classify(args) -> dict:
    out = cmd_lift_graph(args)
    lg = out["_lg"]
    cls = classify(lg)
    out["kind"] = "classification"
    out["classification"] = cls.to_json()
    try:
        out["max_independent_set"] = max_independent_set_size(lg)
    except ResourceError:
        out["max_independent_set"] = None
    if args.verify and cls.variant == "Other":
        raise VerificationFailed(out)
    return out


def cmd_figure1(args) -> dict:
    k = _need_k(args)
    inst = build_figure1(k)
    lg = lifting_graph(inst.graph, inst.s, k, jobs=args.jobs)
    cls = classify(lg)
    out = {
        "kind": "figure1",
        "k": k,
        "s": inst.s,
        "graph": _graph_json(inst.graph),
        "regions": {r: list(v) for r, v in inst.regions.items()},
        "edges_at_s": {r: list(v) for r, v in inst.edges_at_s.items()},
        "descriptor": inst.descriptor,
        "classification": cls.to_json(),
        "_g": inst.graph,
    }
    if args.verify:
        problems = _figure1_problems(inst, lg, cls)
        out["verification"] = {"ok": not problems, "problems": problems}
        if problems:
            raise VerificationFailed(out)
    return out


def _figure1_problems(inst, lg, cls) -> list[str]:
    problems = []
    if cls.variant != "IsolatedPlusBalancedBipartite":
        return [f"classification {cls.variant}"]
    if len(lg.adjacency) != 4 or len(cls.side_a) != 2:
        problems.append(f"{len(lg.adjacency)} liftable pairs, expected the 4 of K_2,2")
    for (a, b), (x, y) in post_lift_liftable(inst, lg):
        problems.append(f"after lifting {a},{b} the pair {x},{y} is still liftable")
    return problems


def cmd_corpus(args) -> dict:
    specs = corpus_specs(args.family, args.seed, args.count)
    rows = []
    for spec in specs:
        try:
            rows.append(analyse_instance(spec).as_dict())
        except ResourceError as exc:
            rows.append({"instance": spec.ident, "n": spec.n, "deg_s": spec.deg_s, "k": spec.k,
                         "classification": "rejected", "agreement": None, "max_independent": None,
                         "note": str(exc)})
    bad = [r for r in rows if r["agreement"] is False or r["classification"] == "Other"]
    out = {"kind": "corpus", "family": args.family, "rows": rows, "failures": len(bad)}
    if args.verify and bad:
        raise VerificationFailed(out)
    return out


def _window_params(args) -> ImmersionParams:
    return ImmersionParams(depth=args.depth, radius=args.radius, width=args.width, horizon=args.horizon, jobs=args.jobs)


def cmd_lift_seq(args) -> dict:
    k = _need_k(args)
    g_inf = parse_generator(args.gen)
    a_set = _a_set(args, g_inf)
    rc = find_ray_cut(g_inf, a_set, args.depth, radius=args.radius)
    res = run_lifting_sequence(rc, k, width=args.width, horizon=args.horizon, jobs=args.jobs)
    out = {"kind": "lift-sequence", "generator": g_inf.describe(), "sequence": res.to_json()}
    if args.verify:
        rep = verify_lift_sequence(g_inf, res)
        out["verification"] = {"ok": rep.ok, "violations": list(rep.violations), "steps_checked": rep.steps_checked}
        if not rep.ok:
            raise VerificationFailed(out)
    return out


def _a_set(args, g_inf) -> list[int]:
    if args.a:
        return [int(x) for x in args.a.split(",") if x.strip()]
    return [g_inf.root]


def cmd_immerse(args) -> dict:
    k = _need_k(args)
    g_inf = parse_generator(args.gen)
    imm, rep = build_immersion(g_inf, _a_set(args, g_inf), k, _window_params(args))
    out = {"kind": "immersion", "generator": g_inf.describe(), "k": k, "immersion": imm.to_json(),
           "report": rep.to_json(), "_dot": branch_overlay(imm)}
    if args.verify and not rep.ok:
        raise VerificationFailed(out)
    return out


def cmd_orient(args) -> dict:
    k = _need_k(args)
    g, _ = _load_graph(args)
    o, trace = orient(g, k)
    out = {"kind": "orientation", "k": k, "graph": _graph_json(g), "orientation": o.to_json(),
           "_g": g, "_heads": o.heads}
    if args.trace_out:
        Path(args.trace_out).write_text(json.dumps(trace.to_json(), indent=1) + "\n", encoding="utf-8")
    else:
        out["trace"] = trace.to_json()
    if args.verify:
        rep = verify_k_arc_connected(g, o.heads, k)
        out["verification"] = rep.to_json()
        if not rep.ok:
            raise VerificationFailed(out)
    return out


def cmd_orient_infinite(args) -> dict:
    k = _need_k(args)
    g_inf = parse_generator(args.gen)
    res = run_infinite(g_inf, k, args.stages, _window_params(args))
    last = res.stages[-1]
    out = {"kind": "orient-infinite", "generator": g_inf.describe(), "run": res.to_json(),
           "_g": last.graph, "_heads": last.heads}
    if args.verify and not res.ok:
        raise VerificationFailed(out)
    return out


def cmd_verify(args) -> dict:
    """Re-check a JSON artifact produced by orient, lift-graph/classify or figure1."""
    if not args.input:
        raise DomainError("--in is required")
    d = json.loads(Path(args.input).read_text(encoding="utf-8"))
    kind = d.get("kind")
    g = _graph_from_json(d["graph"]) if "graph" in d else None
    problems: list[str] = []
    if kind == "orientation":
        k = args.k or d["k"]
        heads = {int(e): h for e, h in d["orientation"].items()}
        if len(heads) != g.num_edges():
            problems.append("orientation is not total")
        rep = verify_k_arc_connected(g, heads, k)
        if not rep.ok:
            problems.append(f"pair {rep.violating_pair} has only {rep.flow} arc-disjoint paths")
        if "trace" in d:
            st = replay(g, OrientationTrace.from_json(d["trace"]).steps, k)
            if st.heads != heads:
                problems.append("trace replay does not reproduce the orientation")
    elif kind in ("lifting-graph", "classification"):
        lg = lifting_graph(g, d["s"], d["k"], jobs=args.jobs)
        if sorted(list(p) for p in lg.adjacency) != sorted(d["adjacency"]):
            problems.append("recomputed lifting graph differs")
        if kind == "classification" and classify(lg).variant != d["classification"]["variant"]:
            problems.append("recomputed classification differs")
    elif kind == "figure1":
        lg = lifting_graph(g, d["s"], d["k"], jobs=args.jobs)
        cls = classify(lg)
        if cls.variant != "IsolatedPlusBalancedBipartite" or len(lg.adjacency) != 4:
            problems.append(f"classification {cls.variant} with {len(lg.adjacency)} liftable pairs")
    else:
        raise DomainError(f"cannot verify artifacts of kind {kind!r}")
    out = {"kind": "verification", "artifact": kind, "ok": not problems, "problems": problems}
    if problems:
        raise VerificationFailed(out)
    return out


COMMANDS: dict[str, Callable] = {
    "gen": cmd_gen,
    "lift-graph": cmd_lift_graph,
    "classify": cmd_classify,
    "lift-seq": cmd_lift_seq,
    "immerse": cmd_immerse,
    "orient": cmd_orient,
    "orient-infinite": cmd_orient_infinite,
    "verify": cmd_verify,
    "corpus": cmd_corpus,
    "figure1": cmd_figure1,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--in", dest="input", help="input edge list or JSON artifact")
    shared.add_argument("--out", help="output path (default: stdout)")
    shared.add_argument("--format", choices=("json", "dot", "csv", "edges"), default="json")
    shared.add_argument("--k", type=int)
    shared.add_argument("--s", type=int, help="distinguished vertex (default: recorded or 0)")
    shared.add_argument("--seed", type=int, default=1)
    shared.add_argument("--radius", type=int, default=0)
    shared.add_argument("--depth", type=int, default=6)
    shared.add_argument("--horizon", type=int)
    shared.add_argument("--width", type=int, default=2)
    shared.add_argument("--stages", type=int, default=2)
    shared.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    shared.add_argument("--verify", action="store_true")
    shared.add_argument("--trace-out")
    shared.add_argument("--gen", default="grid:m=1", help="infinite graph: grid:m=M, tri, tri:alt=1, file:PATH")
    shared.add_argument("--a", help="comma-separated vertex ids of A (default: the root)")
    shared.add_argument("--family", default="random_sk", choices=("random_sk", "eulerian", "figure1"))
    shared.add_argument("--count", type=int, default=100)
    shared.add_argument("--n", type=int, default=8)
    shared.add_argument("--deg-s", dest="deg_s", type=int, default=5)

    p = argparse.ArgumentParser(prog="liftorient", description="lifting, immersion and orientation toolkit")
    p.add_argument("--version", action="version", version=f"liftorient {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, parents=[shared], help=(fn.__doc__ or "").strip().split("\n")[0] or None)
        sp.set_defaults(func=fn)
    return p


def _render(out: dict, args) -> str:
    fmt = args.format
    if fmt == "dot":
        if "_dot" in out:
            return out["_dot"]
        g = out.get("_g") or out.get("_edges")
        if g is None:
            raise DomainError(f"{args.command} has no DOT rendering")
        return to_dot(g, heads=out.get("_heads"))
    if fmt == "edges":
        g = out.get("_edges") or out.get("_g")
        if g is None:
            raise DomainError(f"{args.command} has no edge-list rendering")
        s = out.get("_s")
        return (f"# s = {s}\n" if s is not None else "") + format_edge_list(g, collapse=False)
    if fmt == "csv":
        if "rows" not in out:
            raise DomainError(f"{args.command} has no CSV rendering")
        buf = io.StringIO()
        cols = ["instance", "n", "deg_s", "k", "classification", "agreement", "max_independent"]
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(out["rows"])
        return buf.getvalue()
    body = {k: v for k, v in out.items() if not k.startswith("_")}
    body["config"] = _config(args)
    body["metadata"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    return json.dumps(body, indent=1, sort_keys=True) + "\n"


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LIFTORIENT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        out = args.func(args)
        _emit(_render(out, args), args)
    except VerificationFailed as vf:
        _emit(_render(vf.payload, args), args)
        print(f"liftorient {args.command}: verification failed", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"liftorient {args.command}: invariant violated: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ResourceError, OSError, ValueError, KeyError) as exc:
        print(f"liftorient {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
