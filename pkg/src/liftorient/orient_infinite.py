"""Staged orientation of a 4k-edge-connected one-ended locally finite graph.

W_0 is a directed cycle through the first edge.  Stage n+1 immerses a
(4k-1)-edge-connected pattern around V(W_n) and the next uncovered edge,
extends the orientation of W_n over the pattern by O1/O2, and gives every
immersion path the direction of its pattern edge.  The host trace is carried
along so that the next extension can replay it.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .errors import DomainError, InvariantViolation, ResourceError
from .immersion import Immersion, ImmersionParams, ImmersionReport, build_immersion
from .infinite import LocallyFiniteGraph, distances
from .multigraph import EdgeId, MultiGraph, VertexId
from .orient import (
    ArcReport,
    LoopStep,
    O1Step,
    O2Step,
    OrientationState,
    PartialOrientation,
    Step,
    extend_orientation,
    verify_k_arc_connected,
)

log = logging.getLogger(__name__)


class EdgeEnumeration:
    """e_0, e_1, ... : edges by the radius at which both ends enter the ball, then by id."""

    def __init__(self, g_inf: LocallyFiniteGraph, max_radius: int = 200):
        self.g = g_inf
        self.max_radius = max_radius
        self._edges: list[EdgeId] = []
        self._index: dict[EdgeId, int] = {}
        self._radius = -1
        self._exhausted = False

    def _grow(self) -> None:
        if self._exhausted or self._radius >= self.max_radius:
            raise ResourceError("edge enumeration exhausted", parameter="max_radius")
        self._radius += 1
        ball = distances(self.g, [self.g.root], self._radius)
        fresh = set()
        for v in ball:
            for w, e in self.g.neighbors(v):
                if w in ball and e not in self._index:
                    fresh.add(e)
        for e in sorted(fresh):
            self._index[e] = len(self._edges)
            self._edges.append(e)
        if len(ball) == len(distances(self.g, [self.g.root], self._radius + 1)) and not fresh and self._radius > 0:
            self._exhausted = True

    def __getitem__(self, i: int) -> EdgeId:
        while i >= len(self._edges):
            self._grow()
        return self._edges[i]

    def __iter__(self) -> Iterator[EdgeId]:
        i = 0
        while True:
            yield self[i]
            i += 1

    def index(self, e: EdgeId) -> int:
        while e not in self._index:
            self._grow()
        return self._index[e]

    def first_missing(self, covered: set[EdgeId]) -> tuple[int, EdgeId]:
        for i, e in enumerate(self):
            if e not in covered:
                return i, e
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class StageRecord:
    n: int
    graph: MultiGraph
    heads: Mapping[EdgeId, VertexId]
    trace: tuple[Step, ...]
    target: EdgeId
    target_index: int
    immersion: Immersion | None = field(default=None, repr=False)
    immersion_report: ImmersionReport | None = None
    pattern_heads: Mapping[EdgeId, VertexId] | None = None
    pattern_check: ArcReport | None = None

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return self.graph.vertices

    def covered_prefix(self, enum: EdgeEnumeration) -> int:
        """Largest j with e_0..e_{j-1} all in W_n."""
        j = 0
        while enum[j] in self.heads:
            j += 1
        return j

    def to_json(self) -> dict:
        return {
            "stage": self.n,
            "target_edge": self.target,
            "target_index": self.target_index,
            "vertices": len(self.graph),
            "arcs": [[e, self.graph.other(e, h), h] for e, h in sorted(self.heads.items())],
            "trace_length": len(self.trace),
            "immersion": self.immersion_report.to_json() if self.immersion_report else None,
            "pattern_k_arc_connected": self.pattern_check.ok if self.pattern_check else None,
        }


def _shortest_cycle(g_inf: LocallyFiniteGraph, e0: EdgeId, budget: int) -> tuple[list[VertexId], list[EdgeId]]:
    u, v = g_inf.edge_ends(e0)
    prev: dict[VertexId, tuple[VertexId, EdgeId] | None] = {u: None}
    depth = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            break
        if depth[x] >= budget:
            continue
        for y, e in g_inf.neighbors(x):
            if e == e0 or y in prev:
                continue
            prev[y] = (x, e)
            depth[y] = depth[x] + 1
            queue.append(y)
    if v not in prev:
        raise ResourceError(f"no cycle through edge {e0} within radius {budget}", parameter="cycle_budget")
    vs, es = [v], []
    x = v
    while prev[x] is not None:
        px, pe = prev[x]
        es.append(pe)
        vs.append(px)
        x = px
    vs.reverse()
    es.reverse()
    return vs, es + [e0]


def _as_graph(g_inf: LocallyFiniteGraph, edges: Sequence[EdgeId], vertices: Sequence[VertexId] = ()) -> MultiGraph:
    triples = [(e, *g_inf.edge_ends(e)) for e in sorted(set(edges))]
    verts = set(vertices) | {x for _, a, b in triples for x in (a, b)}
    return MultiGraph(sorted(verts), triples)


def stage0(g_inf: LocallyFiniteGraph, enum: EdgeEnumeration, k: int, cycle_budget: int = 50) -> StageRecord:
    if k < 1:
        raise DomainError("k must be positive")
    e0 = enum[0]
    vs, es = _shortest_cycle(g_inf, e0, cycle_budget)
    w0 = _as_graph(g_inf, es)
    st = OrientationState(w0, k)
    first = vs[0]
    st.apply_O1(es, [vs[i + 1] if i + 1 < len(vs) else first for i in range(len(es))])
    log.info("stage 0: directed %d-cycle through edge %d", len(es), e0)
    return StageRecord(0, w0, dict(st.heads), tuple(st.steps), e0, 0)


# -- pushing a pattern trace through an immersion --------------------------------------


def _oriented_path(imm: Immersion, e: EdgeId, head: VertexId) -> list[tuple[EdgeId, VertexId]]:
    """theta(e) as (host edge, head) pairs running from phi(tail) to phi(head)."""
    hp = imm.theta[e]
    tail = imm.pattern.other(e, head)
    vs, es = list(hp.vertices), list(hp.edges)
    if vs[0] != imm.phi[tail]:
        vs.reverse()
        es.reverse()
    return list(zip(es, vs[1:]))


def _split_cycles(
    st: OrientationState, start: VertexId, trail: list[tuple[EdgeId, VertexId]]
) -> list[tuple[list[EdgeId], list[VertexId]]]:
    """Split a closed trail of the merged graph into cycles, each as (edges, heads)."""
    out = []
    reps = [st.find(start)]
    open_: list[tuple[EdgeId, VertexId]] = []
    for e, h in trail:
        r = st.find(h)
        if r == reps[-1]:
            raise InvariantViolation(f"host edge {e} is a loop while pushing a cycle")
        if r in reps:
            j = reps.index(r)
            cyc = open_[j:] + [(e, h)]
            del open_[j:]
            del reps[j + 1 :]
            out.append(([x for x, _ in cyc], [y for _, y in cyc]))
        else:
            reps.append(r)
            open_.append((e, h))
    if open_:
        raise InvariantViolation("pushed trail is not closed")
    return out


def _loop_erase_classes(st: OrientationState, start: VertexId, es: list[EdgeId]) -> list[EdgeId]:
    reps = [st.find(start)]
    kept: list[EdgeId] = []
    at = reps[0]
    for e in es:
        a, b = st.rep_ends(e)
        at = b if at == a else a
        if at in reps:
            j = reps.index(at)
            del reps[j + 1 :]
            del kept[j:]
        else:
            reps.append(at)
            kept.append(e)
    return kept


def push_forward(
    imm: Immersion, pattern_heads: Mapping[EdgeId, VertexId], pattern_trace: Sequence[Step], k: int
) -> tuple[MultiGraph, dict[EdgeId, VertexId], tuple[Step, ...]]:
    """Orient H = union of theta-paths and translate the pattern trace to an O1/O2 trace of H.

    Cycles push to closed trails (split into cycles), mixed paths to walks
    (loop-erased), end loops to loops or cycles.  Each translated step is
    applied to a state on H as it is produced, so an invalid step raises.
    """
    triples = sorted({(e, *imm.host.ends(e)) for hp in imm.theta.values() for e in hp.edges})
    verts = set(imm.phi.values()) | {x for hp in imm.theta.values() for x in hp.vertices}
    h_graph = MultiGraph(sorted(verts), triples)
    st = OrientationState(h_graph, k)
    for step in pattern_trace:
        if isinstance(step, O1Step):
            trail = []
            for e, head in zip(step.edges, step.heads):
                trail.extend(_oriented_path(imm, e, head))
            start = imm.phi[imm.pattern.other(step.edges[0], step.heads[0])]
            for cyc, heads in _split_cycles(st, start, trail):
                st.apply_O1(cyc, heads)
        elif isinstance(step, O2Step):
            witness = []
            for path in step.witness:
                host_es: list[EdgeId] = []
                at = st.find(imm.phi[step.u])
                for e in path:
                    hp = imm.theta[e]
                    es, last = list(hp.edges), hp.vertices[-1]
                    if st.find(hp.vertices[0]) != at:
                        es.reverse()
                        last = hp.vertices[0]
                    host_es.extend(es)
                    at = st.find(last)
                witness.append(tuple(_loop_erase_classes(st, imm.phi[step.u], host_es)))
            st.apply_O2(imm.phi[step.u], imm.phi[step.v], witness)
        elif isinstance(step, LoopStep):
            pairs = _oriented_path(imm, step.edge, step.head)
            if len(pairs) == 1:
                st.apply_loop(*pairs[0])
            else:
                st.apply_O1([e for e, _ in pairs], [h for _, h in pairs])
        else:
            raise DomainError(f"unknown step {step!r}")
    for e, head in pattern_heads.items():
        for he, h in _oriented_path(imm, e, head):
            if st.heads.get(he) != h:
                raise InvariantViolation(f"host edge {he} of theta({e}) is not directed along the path")
    if len(st.heads) != h_graph.num_edges():
        raise InvariantViolation("push-forward left host edges undirected")
    return h_graph, dict(st.heads), tuple(st.steps)


# -- stages -----------------------------------------------------------------------------------


def advance(
    g_inf: LocallyFiniteGraph,
    prev: StageRecord,
    enum: EdgeEnumeration,
    k: int,
    params: ImmersionParams | None = None,
) -> StageRecord:
    idx, target = enum.first_missing(set(prev.heads))
    a_set = set(prev.vertices) | set(g_inf.edge_ends(target))
    k_imm = 2 * k
    if 2 * k_imm - 1 < 4 * k - 2:
        raise InvariantViolation("pattern connectivity 4k-1 does not reach 4k-2")
    imm, rep = build_immersion(g_inf, a_set, k_imm, params)
    if not rep.ok:
        raise InvariantViolation(f"stage {prev.n + 1} immersion failed: {rep.violations[:3]}")
    pattern = imm.pattern
    for e in list(prev.heads) + [target]:
        if not pattern.has_edge(e) or imm.theta[e].edges != (e,):
            raise InvariantViolation(f"edge {e} of W_{prev.n} is not kept as a pattern edge")
    h_state = PartialOrientation(pattern, dict(prev.heads), prev.trace)
    orient_p, trace_p = extend_orientation(pattern, h_state, k)
    pcheck = verify_k_arc_connected(pattern, orient_p.heads, k)
    graph, heads, steps = push_forward(imm, orient_p.heads, trace_p.steps, k)
    log.info(
        "stage %d: target e_%d=%d, |S|=%d, W has %d vertices, %d arcs",
        prev.n + 1, idx, target, len(pattern), len(graph), len(heads),
    )
    return StageRecord(prev.n + 1, graph, heads, steps, target, idx, imm, rep, dict(orient_p.heads), pcheck)


@dataclass(frozen=True)
class TransferReport:
    stage: int
    nesting: bool
    paths_consistent: bool
    transfer: ArcReport
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "nesting": self.nesting,
            "theta_paths_directed": self.paths_consistent,
            "transfer": self.transfer.to_json(),
            "violations": list(self.violations),
        }


def verify_transfer(prev: StageRecord, nxt: StageRecord, k: int) -> TransferReport:
    out: list[str] = []
    nesting = True
    for e, h in prev.heads.items():
        got = nxt.heads.get(e)
        if got != h:
            nesting = False
            out.append(f"arc {e} of W_{prev.n} {'is missing' if got is None else 'is reversed'} in W_{nxt.n}")
    consistent = True
    if nxt.immersion is not None and nxt.pattern_heads is not None:
        imm = nxt.immersion
        owner: dict[EdgeId, EdgeId] = {}
        for pe, head in sorted(nxt.pattern_heads.items()):
            hp = imm.theta[pe]
            tail = imm.pattern.other(pe, head)
            vs, es = list(hp.vertices), list(hp.edges)
            if vs[0] != imm.phi[tail]:
                vs.reverse()
                es.reverse()
            for y, he in zip(vs[1:], es):
                if nxt.heads.get(he) != y:
                    consistent = False
                    out.append(f"theta({pe}) is not directed from phi({tail}) to phi({head}) at host edge {he}")
                    break
                if he in owner:
                    consistent = False
                    out.append(f"theta({pe}) and theta({owner[he]}) share host arc {he}")
                owner[he] = pe
    terms = [v for v in prev.vertices if v in nxt.graph]
    missing = set(prev.vertices) - set(terms)
    if missing:
        out.append(f"vertices {sorted(missing)[:5]} of W_{prev.n} are not in W_{nxt.n}")
    tr = verify_k_arc_connected(nxt.graph, nxt.heads, k, terms)
    if not tr.ok:
        out.append(
            f"only {tr.flow} arc-disjoint paths {tr.violating_pair[0]}->{tr.violating_pair[1]} in W_{nxt.n}"
        )
    return TransferReport(nxt.n, nesting, consistent, tr, tuple(out))


@dataclass(frozen=True)
class InfiniteRun:
    k: int
    stages: tuple[StageRecord, ...]
    transfers: tuple[TransferReport, ...]
    coverage: int

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.transfers)

    def orientation(self) -> dict[EdgeId, VertexId]:
        return dict(self.stages[-1].heads)

    def to_json(self) -> dict:
        n = len(self.stages)
        return {
            "k": self.k,
            "stages": [s.to_json() for s in self.stages],
            "transfers": [t.to_json() for t in self.transfers],
            "coverage": {"prefix_edges_covered": self.coverage},
            "certificate": f"{self.k}-arc-connectivity certified through stage {n - 1}" if self.ok else None,
            "ok": self.ok,
        }


def run(
    g_inf: LocallyFiniteGraph,
    k: int,
    stages: int,
    params: ImmersionParams | None = None,
    *,
    check_window: int | None = None,
) -> InfiniteRun:
    """N stages W_0 .. W_{N-1}, with the transfer check between consecutive stages."""
    if stages < 1:
        raise DomainError("need at least one stage")
    if check_window is not None:
        from .infinite import check_edge_connectivity

        ok, pair = check_edge_connectivity(g_inf, [g_inf.root], check_window, 4 * k)
        if not ok:
            raise DomainError(f"not {4 * k}-edge-connected on the window: pair {pair}")
    enum = EdgeEnumeration(g_inf)
    recs = [stage0(g_inf, enum, k)]
    transfers = []
    seen_idx = 0
    for _ in range(stages - 1):
        nxt = advance(g_inf, recs[-1], enum, k, params)
        if nxt.target_index < seen_idx:
            raise InvariantViolation("coverage index went backwards")
        seen_idx = nxt.target_index
        transfers.append(verify_transfer(recs[-1], nxt, k))
        recs.append(nxt)
    all_heads: dict[EdgeId, VertexId] = {}
    for r in recs:
        for e, h in r.heads.items():
            if all_heads.setdefault(e, h) != h:
                raise InvariantViolation(f"edge {e} received two directions")
    return InfiniteRun(k, tuple(recs), tuple(transfers), recs[-1].covered_prefix(enum))
