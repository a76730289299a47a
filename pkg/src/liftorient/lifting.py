"""Lifting (splitting off) at a vertex and the k-lifting graph.

Lifting ``sv, sw`` deletes both edges and adds ``vw`` (nothing when v = w).
The lifting graph ``L(G,s,k)`` has the edges at ``s`` as nodes; two are
adjacent when lifting them keeps the graph (s,k)-edge-connected.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal

from .errors import DomainError, ResourceError
from .multigraph import EdgeId, MultiGraph, SKReport, VertexId, check_s_k

log = logging.getLogger(__name__)

Pair = tuple[EdgeId, EdgeId]


def _pair(a: EdgeId, b: EdgeId) -> Pair:
    return (a, b) if a < b else (b, a)


def lift(g: MultiGraph, s: VertexId, e1: EdgeId, e2: EdgeId) -> MultiGraph:
    """Lift the pair ``e1, e2`` at ``s``.

    The new edge (if any) gets a fresh id recorded in ``lifted_from``.
    """
    if e1 == e2:
        raise DomainError("cannot lift an edge with itself")
    for e in (e1, e2):
        if not g.has_edge(e) or s not in g.ends(e):
            raise DomainError(f"edge {e} is not incident with {s}")
    v = g.other(e1, s)
    w = g.other(e2, s)
    rest = [t for t in g.edge_triples() if t[0] not in (e1, e2)]
    if v == w:
        return g._derive(g.vertices, rest)
    new = g.fresh_edge()
    lifted = dict(g.lifted_from)
    lifted[new] = (e1, e2)
    return g._derive(g.vertices, rest + [(new, v, w)], lifted_from=lifted, next_edge=new + 1)


def _lifted_capacities(
    g: MultiGraph, s: VertexId, e1: EdgeId, e2: EdgeId, base: dict | None = None
) -> dict[tuple[int, int], int]:
    caps = dict(g.capacities() if base is None else base)
    v = g.other(e1, s)
    w = g.other(e2, s)
    for x in (v, w):
        key = (min(s, x), max(s, x))
        caps[key] -= 1
    if v != w:
        key = (min(v, w), max(v, w))
        caps[key] = caps.get(key, 0) + 1
    return caps


def _liftable_fast(
    g: MultiGraph,
    s: VertexId,
    e1: EdgeId,
    e2: EdgeId,
    k: int,
    base: dict | None = None,
) -> SKReport:
    # Lifting only shrinks cuts whose s-free side holds both ends, so any
    # violation separates the end v of e1 from some vertex: root the check at v.
    caps = _lifted_capacities(g, s, e1, e2, base)
    return check_s_k(g, s, k, capacities=caps, root=g.other(e1, s))


def is_k_liftable(
    g: MultiGraph,
    s: VertexId,
    e1: EdgeId,
    e2: EdgeId,
    k: int,
    *,
    check_precondition: bool = True,
) -> bool:
    """Whether lifting ``e1, e2`` keeps ``g`` (s,k)-edge-connected."""
    if e1 == e2:
        raise DomainError("a pair needs two distinct edges")
    for e in (e1, e2):
        if not g.has_edge(e) or s not in g.ends(e):
            raise DomainError(f"edge {e} is not incident with {s}")
    if check_precondition:
        pre = check_s_k(g, s, k)
        if not pre.ok:
            raise DomainError(
                f"graph is not (s,{k})-edge-connected: pair {pre.violating_pair} "
                f"has only {pre.flow} edge-disjoint paths"
            )
    return _liftable_fast(g, s, e1, e2, k).ok


@dataclass(frozen=True)
class LiftingGraph:
    graph: MultiGraph
    s: VertexId
    k: int
    nodes: tuple[EdgeId, ...]
    adjacency: frozenset[Pair]

    def adjacent(self, a: EdgeId, b: EdgeId) -> bool:
        return _pair(a, b) in self.adjacency

    def neighbors(self, a: EdgeId) -> tuple[EdgeId, ...]:
        return tuple(b for b in self.nodes if b != a and _pair(a, b) in self.adjacency)

    def non_adjacent_pairs(self) -> list[Pair]:
        return [p for p in itertools.combinations(self.nodes, 2) if p not in self.adjacency]

    @classmethod
    def from_edges(
        cls, nodes: Iterable[EdgeId], adjacency: Iterable[tuple[EdgeId, EdgeId]], k: int = 0
    ) -> "LiftingGraph":
        """Abstract lifting graph (no base graph) for classification tests."""
        nodes = tuple(sorted(nodes))
        adj = frozenset(_pair(a, b) for a, b in adjacency)
        for a, b in adj:
            if a == b or a not in nodes or b not in nodes:
                raise DomainError(f"bad adjacency pair {(a, b)}")
        return cls(MultiGraph(), -1, k, nodes, adj)


def _pair_job(args):
    g, s, k, pairs, base = args
    return [_liftable_fast(g, s, a, b, k, base).ok for a, b in pairs]


def lifting_graph(g: MultiGraph, s: VertexId, k: int, *, jobs: int = 1) -> LiftingGraph:
    """Compute ``L(g, s, k)`` by testing every pair of edges at ``s``."""
    if k < 1:
        raise DomainError("k must be positive")
    if s not in g:
        raise DomainError(f"unknown vertex {s}")
    pre = check_s_k(g, s, k)
    if not pre.ok:
        raise DomainError(
            f"graph is not (s,{k})-edge-connected: pair {pre.violating_pair} "
            f"has only {pre.flow} edge-disjoint paths"
        )
    nodes = g.incident(s)
    pairs = list(itertools.combinations(nodes, 2))
    base = g.capacities()
    if jobs > 1 and len(pairs) > 64:
        chunks = [pairs[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_pair_job, [(g, s, k, c, base) for c in chunks]))
        verdict: dict[Pair, bool] = {}
        for chunk, res in zip(chunks, parts):
            verdict.update(zip(chunk, res))
        flags = [verdict[p] for p in pairs]
    else:
        flags = _pair_job((g, s, k, pairs, base))
    adjacency = frozenset(p for p, ok in zip(pairs, flags) if ok)
    return LiftingGraph(g, s, k, tuple(nodes), adjacency)


Variant = Literal["ComplementDisconnected", "IsolatedPlusBalancedBipartite", "Other"]


@dataclass(frozen=True)
class LiftClassification:
    variant: Variant
    isolated: EdgeId | None = None
    side_a: tuple[EdgeId, ...] = ()
    side_b: tuple[EdgeId, ...] = ()
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "isolated": self.isolated,
            "side_a": list(self.side_a),
            "side_b": list(self.side_b),
            "diagnostic": self.diagnostic,
        }


def _components(nodes: Iterable[EdgeId], linked) -> list[list[EdgeId]]:
    nodes = list(nodes)
    seen: set[EdgeId] = set()
    comps = []
    for start in nodes:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            a = stack.pop()
            for b in nodes:
                if b not in seen and linked(a, b):
                    seen.add(b)
                    comp.append(b)
                    stack.append(b)
        comps.append(sorted(comp))
    return comps


def classify(lg: LiftingGraph) -> LiftClassification:
    """Place a lifting graph in the even-k structure dichotomy."""
    nodes = lg.nodes
    if len(nodes) < 2:
        return LiftClassification("Other", diagnostic=f"only {len(nodes)} node(s)")

    def non_adjacent(a, b):
        return a != b and not lg.adjacent(a, b)

    if len(_components(nodes, non_adjacent)) > 1:
        return LiftClassification("ComplementDisconnected")

    isolated = [a for a in nodes if not lg.neighbors(a)]
    if len(isolated) != 1:
        return LiftClassification(
            "Other",
            diagnostic=f"complement connected with {len(isolated)} isolated nodes (need exactly 1)",
        )
    star = isolated[0]
    rest = [a for a in nodes if a != star]
    sides = _components(rest, non_adjacent)
    if len(sides) != 2:
        return LiftClassification(
            "Other",
            diagnostic=f"complement on non-isolated nodes has {len(sides)} components (need 2)",
        )
    a_side, b_side = sides
    for x in a_side:
        for y in b_side:
            if not lg.adjacent(x, y):
                return LiftClassification("Other", diagnostic=f"cross pair {(x, y)} not adjacent")
    for side in (a_side, b_side):
        for x, y in itertools.combinations(side, 2):
            if lg.adjacent(x, y):
                return LiftClassification("Other", diagnostic=f"same-side pair {(x, y)} adjacent")
    if len(a_side) != len(b_side):
        return LiftClassification(
            "Other", diagnostic=f"unbalanced bipartite part {len(a_side)} vs {len(b_side)}"
        )
    return LiftClassification(
        "IsolatedPlusBalancedBipartite", star, tuple(a_side), tuple(b_side)
    )


def max_independent_set_size(lg: LiftingGraph, bound: int = 30) -> int:
    """Exact maximum independent set by branch and bound over bitmasks."""
    n = len(lg.nodes)
    if n > bound:
        raise ResourceError(
            f"{n} nodes exceeds the exact-search bound {bound}; raise 'bound' knowingly",
            parameter="bound",
        )
    pos = {a: i for i, a in enumerate(lg.nodes)}
    nbr = [0] * n
    for a, b in lg.adjacency:
        nbr[pos[a]] |= 1 << pos[b]
        nbr[pos[b]] |= 1 << pos[a]
    best = 0

    def search(cand: int, size: int) -> None:
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        v = (cand & -cand).bit_length() - 1
        search(cand & ~(1 << v) & ~nbr[v], size + 1)
        search(cand & ~(1 << v), size)

    search((1 << n) - 1, 0)
    return best
