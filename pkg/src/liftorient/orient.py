"""Orientation by directed cycles and identifications.

Two moves act on a partially oriented multigraph whose vertices are being
merged:

* ``O1`` orients a cycle of undirected edges of the merged graph around the
  cycle;
* ``O2`` merges two vertices joined by 2k-1 edge-disjoint *mixed* paths
  (paths of directed edges, directions ignored).

On a (4k-2)-edge-connected graph the moves can be repeated until a single
vertex is left, and the orientation is k-arc-connected.  Edges that become
loops are oriented at the end, towards their smaller original endpoint.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import DomainError, InvariantViolation
from .flow import FlowNetwork, Indexer
from .multigraph import EdgeId, MultiGraph, VertexId, is_k_edge_connected

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class O1Step:
    edges: tuple[EdgeId, ...]
    heads: tuple[VertexId, ...]

    def to_json(self) -> dict:
        return {"op": "O1", "edges": list(self.edges), "heads": list(self.heads)}


@dataclass(frozen=True)
class O2Step:
    u: VertexId
    v: VertexId
    witness: tuple[tuple[EdgeId, ...], ...]

    def to_json(self) -> dict:
        return {"op": "O2", "u": self.u, "v": self.v, "witness": [list(p) for p in self.witness]}


@dataclass(frozen=True)
class LoopStep:
    edge: EdgeId
    head: VertexId

    def to_json(self) -> dict:
        return {"op": "L", "edge": self.edge, "head": self.head}


Step = Union[O1Step, O2Step, LoopStep]


def step_from_json(d: dict) -> Step:
    op = d.get("op")
    if op == "O1":
        return O1Step(tuple(d["edges"]), tuple(d["heads"]))
    if op == "O2":
        return O2Step(d["u"], d["v"], tuple(tuple(p) for p in d["witness"]))
    if op == "L":
        return LoopStep(d["edge"], d["head"])
    raise DomainError(f"unknown trace step {op!r}")


@dataclass(frozen=True)
class OrientationTrace:
    k: int
    steps: tuple[Step, ...]
    classes: dict[VertexId, VertexId] = field(default_factory=dict)
    policy: str = "O1-first"

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "policy": self.policy,
            "steps": [s.to_json() for s in self.steps],
            "classes": {str(v): r for v, r in sorted(self.classes.items())},
        }

    @classmethod
    def from_json(cls, d: dict) -> "OrientationTrace":
        return cls(
            int(d["k"]),
            tuple(step_from_json(s) for s in d["steps"]),
            {int(v): r for v, r in d.get("classes", {}).items()},
            d.get("policy", "O1-first"),
        )

    def o1_only(self) -> bool:
        """True when every edge was oriented by O1 before any identification."""
        seen_o2 = False
        for st in self.steps:
            if isinstance(st, O2Step):
                seen_o2 = True
            elif isinstance(st, LoopStep) or seen_o2:
                return False
        return True


@dataclass(frozen=True)
class PartialOrientation:
    """Directions on some edges of ``base``, with the trace that produced them."""

    base: MultiGraph
    heads: Mapping[EdgeId, VertexId]
    trace: tuple[Step, ...] = ()

    def __post_init__(self):
        for e, h in self.heads.items():
            if not self.base.has_edge(e):
                raise DomainError(f"oriented edge {e} is not in the graph")
            if h not in self.base.ends(e):
                raise DomainError(f"head {h} is not an end of edge {e}")

    def tail(self, e: EdgeId) -> VertexId:
        return self.base.other(e, self.heads[e])

    def is_total(self) -> bool:
        return len(self.heads) == self.base.num_edges()

    def arcs(self) -> list[tuple[EdgeId, VertexId, VertexId]]:
        return [(e, self.tail(e), h) for e, h in sorted(self.heads.items())]

    def to_json(self) -> dict:
        return {str(e): h for e, h in sorted(self.heads.items())}


class OrientationState:
    """Mutable O1/O2 state: directions, merged classes and the step log."""

    def __init__(self, g: MultiGraph, k: int):
        if k < 1:
            raise DomainError("k must be positive")
        self.g = g
        self.k = k
        self.parent: dict[VertexId, VertexId] = {v: v for v in g.vertices}
        self.heads: dict[EdgeId, VertexId] = {}
        self.steps: list[Step] = []

    # -- classes -----------------------------------------------------------------

    def find(self, v: VertexId) -> VertexId:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def classes(self) -> list[VertexId]:
        return sorted({self.find(v) for v in self.g.vertices})

    def rep_ends(self, e: EdgeId) -> tuple[VertexId, VertexId]:
        a, b = self.g.ends(e)
        return self.find(a), self.find(b)

    def is_loop(self, e: EdgeId) -> bool:
        a, b = self.rep_ends(e)
        return a == b

    def undirected(self) -> list[EdgeId]:
        return [e for e in self.g.edges if e not in self.heads]

    # -- moves ---------------------------------------------------------------------

    def _walk(self, edges: Sequence[EdgeId], start: VertexId) -> list[VertexId] | None:
        reps = [start]
        at = start
        for e in edges:
            a, b = self.rep_ends(e)
            if at == a:
                at = b
            elif at == b:
                at = a
            else:
                return None
            reps.append(at)
        return reps

    def apply_O1(self, cycle: Sequence[EdgeId], heads: Sequence[VertexId] | None = None) -> O1Step:
        cycle = list(cycle)
        if not cycle:
            raise DomainError("O1 needs a nonempty cycle")
        if len(set(cycle)) != len(cycle):
            raise DomainError("O1 cycle repeats an edge")
        for e in cycle:
            if not self.g.has_edge(e):
                raise DomainError(f"edge {e} is not in the graph")
            if e in self.heads:
                raise DomainError(f"edge {e} already has a direction")
            if self.is_loop(e):
                raise DomainError(f"edge {e} is a loop of the merged graph; loops are oriented at the end")
        reps = None
        for start in self.rep_ends(cycle[0]):
            walk = self._walk(cycle, start)
            if walk is None or walk[-1] != walk[0] or len(set(walk[:-1])) != len(cycle):
                continue
            got = [self._head_for(e, r) for e, r in zip(cycle, walk[1:])]
            if heads is None or list(heads) == got:
                reps = got
                break
        if reps is None:
            raise DomainError("edges do not form a cycle of the merged graph (with the given directions)")
        for e, h in zip(cycle, reps):
            self.heads[e] = h
        step = O1Step(tuple(cycle), tuple(reps))
        self.steps.append(step)
        return step

    def _head_for(self, e: EdgeId, rep: VertexId) -> VertexId:
        a, b = self.g.ends(e)
        return a if self.find(a) == rep else b

    def mixed_paths(self, u: VertexId, v: VertexId, limit: int) -> list[tuple[EdgeId, ...]]:
        """Up to ``limit`` edge-disjoint paths of directed edges between classes u and v."""
        reps = self.classes()
        idx = Indexer(reps)
        net = FlowNetwork(len(idx))
        pools: dict[tuple[VertexId, VertexId], list[EdgeId]] = {}
        for e in sorted(self.heads):
            a, b = self.rep_ends(e)
            if a == b:
                continue
            net.add_edge(idx[a], idx[b], 1)
            pools.setdefault((min(a, b), max(a, b)), []).append(e)
        ru, rv = self.find(u), self.find(v)
        net.max_flow(idx[ru], idx[rv], limit)
        out = []
        for node_path in net.flow_paths(idx[ru], idx[rv]):
            vp = [idx.labels[i] for i in node_path]
            out.append(tuple(pools[(min(a, b), max(a, b))].pop(0) for a, b in zip(vp, vp[1:])))
        return out

    def check_witness(self, u: VertexId, v: VertexId, witness: Sequence[Sequence[EdgeId]]) -> str | None:
        need = 2 * self.k - 1
        if len(witness) < need:
            return f"{len(witness)} mixed paths, need {need}"
        used: set[EdgeId] = set()
        for p in witness:
            for e in p:
                if not self.g.has_edge(e):
                    return f"witness edge {e} not in graph"
                if e not in self.heads:
                    return f"witness edge {e} has no direction"
                if self.is_loop(e):
                    return f"witness edge {e} is a loop"
                if e in used:
                    return f"witness paths share edge {e}"
                used.add(e)
            walk = self._walk(p, u)
            if walk is None or walk[-1] != v:
                return f"witness {list(p)} is not a {u}-{v} walk in the merged graph"
            if len(set(walk)) != len(walk):
                return f"witness {list(p)} repeats a vertex"
        return None

    def apply_O2(self, u: VertexId, v: VertexId, witness: Sequence[Sequence[EdgeId]] | None = None) -> O2Step:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            raise DomainError(f"{u} and {v} are already identified")
        need = 2 * self.k - 1
        if witness is None:
            witness = self.mixed_paths(ru, rv, need)
        problem = self.check_witness(ru, rv, witness)
        if problem:
            raise DomainError(f"O2 on {u},{v} rejected: {problem}")
        self.parent[rv] = ru
        step = O2Step(ru, rv, tuple(tuple(p) for p in witness[:need]))
        self.steps.append(step)
        return step

    def apply_loop(self, e: EdgeId, head: VertexId | None = None) -> LoopStep:
        if e in self.heads:
            raise DomainError(f"edge {e} already has a direction")
        if not self.is_loop(e):
            raise DomainError(f"edge {e} is not a loop of the merged graph")
        a, b = self.g.ends(e)
        head = min(a, b) if head is None else head
        if head not in (a, b):
            raise DomainError(f"{head} is not an end of edge {e}")
        self.heads[e] = head
        step = LoopStep(e, head)
        self.steps.append(step)
        return step

    # -- search ----------------------------------------------------------------------

    def find_cycle(self) -> list[EdgeId] | None:
        """A cycle of undirected non-loop edges in the merged graph (iterative DFS)."""
        adj: dict[VertexId, list[tuple[VertexId, EdgeId]]] = {}
        for e in self.undirected():
            a, b = self.rep_ends(e)
            if a == b:
                continue
            adj.setdefault(a, []).append((b, e))
            adj.setdefault(b, []).append((a, e))
        state: dict[VertexId, int] = {}
        via: dict[VertexId, tuple[VertexId, EdgeId] | None] = {}
        for root in sorted(adj):
            if root in state:
                continue
            state[root] = 1
            via[root] = None
            stack = [(root, iter(adj[root]))]
            while stack:
                v, it = stack[-1]
                advanced = False
                for w, e in it:
                    if via[v] is not None and via[v][1] == e:
                        continue
                    if w not in state:
                        state[w] = 1
                        via[w] = (v, e)
                        stack.append((w, iter(adj[w])))
                        advanced = True
                        break
                    if state[w] == 1:
                        # back edge v -> w closes a cycle w .. v -> w
                        cyc = []
                        x = v
                        while x != w:
                            px, pe = via[x]
                            cyc.append(pe)
                            x = px
                        cyc.reverse()
                        cyc.append(e)
                        return cyc
                if not advanced:
                    state[v] = 2
                    stack.pop()
        return None

    def undirected_is_forest(self) -> bool:
        parent: dict[VertexId, VertexId] = {}

        def root(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        for e in self.undirected():
            a, b = self.rep_ends(e)
            if a == b:
                continue
            ra, rb = root(a), root(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def _candidate_pairs(self) -> Iterable[tuple[VertexId, VertexId]]:
        need = 2 * self.k - 1
        ddeg: dict[VertexId, int] = {}
        adj: dict[VertexId, set[VertexId]] = {}
        for e in self.g.edges:
            a, b = self.rep_ends(e)
            if a == b:
                continue
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
            if e in self.heads:
                ddeg[a] = ddeg.get(a, 0) + 1
                ddeg[b] = ddeg.get(b, 0) + 1
        ok = {v for v, d in ddeg.items() if d >= need}
        tried = set()
        for a in sorted(adj):
            for b in sorted(adj[a]):
                if a < b and a in ok and b in ok:
                    tried.add((a, b))
                    yield a, b
        # farther pairs, by distance in the merged graph
        for a in sorted(ok):
            dist = {a: 0}
            queue = deque([a])
            order = []
            while queue:
                x = queue.popleft()
                for y in sorted(adj.get(x, ())):
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
                        order.append(y)
            for b in order:
                if b > a and b in ok and (a, b) not in tried:
                    yield a, b

    def find_next_operation(self):
        """("O1", cycle) | ("O2", u, v, witness) | ("done",) | ("stuck",)."""
        cyc = self.find_cycle()
        if cyc is not None:
            return ("O1", cyc)
        reps = self.classes()
        if len(reps) == 1:
            return ("done",)
        need = 2 * self.k - 1
        for a, b in self._candidate_pairs():
            paths = self.mixed_paths(a, b, need)
            if len(paths) >= need:
                return ("O2", a, b, paths)
        return ("stuck",)

    def run(self) -> None:
        while True:
            op = self.find_next_operation()
            if op[0] == "O1":
                self.apply_O1(op[1])
            elif op[0] == "O2":
                if not self.undirected_is_forest():
                    raise InvariantViolation("undirected edges do not form a forest before O2")
                self.apply_O2(op[1], op[2], op[3])
            elif op[0] == "done":
                for e in self.undirected():
                    self.apply_loop(e)
                return
            else:
                n = len(self.classes())
                bound = (2 * self.k - 1) * (n - 1)
                raise InvariantViolation(
                    f"stuck with {n} vertices: neither O1 nor O2 applies "
                    f"(|E| = {self.g.num_edges()}, counting bound (2k-1)(n-1) = {bound})"
                )

    def orientation(self) -> PartialOrientation:
        return PartialOrientation(self.g, dict(self.heads), tuple(self.steps))

    def trace(self, policy: str = "O1-first") -> OrientationTrace:
        return OrientationTrace(self.k, tuple(self.steps), {v: self.find(v) for v in self.g.vertices}, policy)


def _precondition(g: MultiGraph, k: int) -> None:
    need = 4 * k - 2
    if len(g) >= 2:
        rep = is_k_edge_connected(g, need)
        if not rep.ok:
            raise DomainError(
                f"input is not {need}-edge-connected: pair {rep.violating_pair} has only {rep.flow} edge-disjoint paths"
            )


def orient(g: MultiGraph, k: int, *, check: bool = True) -> tuple[PartialOrientation, OrientationTrace]:
    """Orient every edge of a (4k-2)-edge-connected multigraph by O1/O2."""
    if check:
        _precondition(g, k)
    st = OrientationState(g, k)
    st.run()
    return st.orientation(), st.trace()


def replay(g: MultiGraph, steps: Iterable[Step], k: int, state: OrientationState | None = None) -> OrientationState:
    """Apply recorded steps to a fresh state; DomainError names the first bad step."""
    st = state or OrientationState(g, k)
    for i, step in enumerate(steps):
        try:
            if isinstance(step, O1Step):
                st.apply_O1(step.edges, step.heads)
            elif isinstance(step, O2Step):
                for x in (step.u, step.v):
                    if x not in st.parent:
                        raise DomainError(f"vertex {x} is not in the graph")
                st.apply_O2(step.u, step.v, step.witness)
            elif isinstance(step, LoopStep):
                if not st.g.has_edge(step.edge):
                    raise DomainError(f"edge {step.edge} is not in the graph")
                st.apply_loop(step.edge, step.head)
            else:
                raise DomainError(f"unknown step {step!r}")
        except DomainError as exc:
            raise DomainError(f"trace step {i} ({type(step).__name__}) is invalid: {exc}") from None
    return st


def extend_orientation(
    g: MultiGraph, h_state: PartialOrientation, k: int, *, check: bool = True
) -> tuple[PartialOrientation, OrientationTrace]:
    """Continue O1/O2 on ``g`` from a state reached on a subgraph.

    ``h_state.trace`` is replayed on ``g`` (every cycle and mixed path of the
    subgraph is one of ``g``); the replayed directions must equal
    ``h_state.heads``.  The run then continues to a single vertex.
    """
    if check:
        _precondition(g, k)
    st = replay(g, h_state.trace, k)
    if st.heads != dict(h_state.heads):
        diff = sorted(set(st.heads.items()) ^ set(dict(h_state.heads).items()))
        raise DomainError(f"trace does not reproduce the given directions (first mismatch {diff[0]})")
    st.run()
    return st.orientation(), st.trace()


# -- verification ------------------------------------------------------------------


@dataclass(frozen=True)
class ArcReport:
    ok: bool
    k: int
    violating_pair: tuple[VertexId, VertexId] | None = None
    flow: int | None = None
    dicut_side: frozenset[VertexId] = frozenset()
    dicut_arcs: tuple[EdgeId, ...] = ()
    vacuous: bool = False

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "k": self.k,
            "violating_pair": list(self.violating_pair) if self.violating_pair else None,
            "flow": self.flow,
            "dicut_side": sorted(self.dicut_side),
            "dicut_arcs": list(self.dicut_arcs),
            "vacuous": self.vacuous,
        }


def _arc_network(vertices: Sequence[VertexId], arcs: Iterable[tuple[EdgeId, VertexId, VertexId]]):
    idx = Indexer(vertices)
    net = FlowNetwork(len(idx))
    arcs = list(arcs)
    for _, t, h in arcs:
        net.add_arc(idx[t], idx[h], 1)
    return idx, net, arcs


def verify_k_arc_connected(
    g: MultiGraph,
    heads: Mapping[EdgeId, VertexId],
    k: int,
    terminals: Iterable[VertexId] | None = None,
) -> ArcReport:
    """k arc-disjoint directed paths between every ordered pair of ``terminals``.

    Uses a root r: lambda(x, y) >= min(lambda(x, r), lambda(r, y)).  Edges
    without a direction are ignored.
    """
    verts = g.vertices
    terms = sorted(set(verts if terminals is None else terminals))
    if len(terms) < 2:
        return ArcReport(True, k, vacuous=True)
    arcs = [(e, g.other(e, h), h) for e, h in sorted(heads.items()) if g.has_edge(e)]
    idx, base, arcs = _arc_network(verts, arcs)
    r = terms[0]
    for t in terms[1:]:
        for x, y in ((r, t), (t, r)):
            net = base.copy()
            f = net.max_flow(idx[x], idx[y], k)
            if f < k:
                side = frozenset(idx.labels[i] for i in net.reachable(idx[x]))
                cut = tuple(e for e, a, b in arcs if a in side and b not in side)
                return ArcReport(False, k, (x, y), f, side, cut)
    return ArcReport(True, k)


def cut_balance(g: MultiGraph, heads: Mapping[EdgeId, VertexId], side: Iterable[VertexId]) -> tuple[int, int]:
    """(arcs leaving, arcs entering) the vertex set ``side``."""
    x = set(side)
    out = inn = 0
    for e, h in heads.items():
        t = g.other(e, h)
        if t in x and h not in x:
            out += 1
        elif h in x and t not in x:
            inn += 1
    return out, inn
