"""Finite loopless multigraphs with stable edge identities.

A :class:`MultiGraph` is immutable after construction; every rewrite
(:func:`contract`, :func:`identify`, and the lift in :mod:`liftorient.lifting`)
returns a new value.  Edge ids survive rewrites, which is what lets cut edges
be traced through a long sequence of graphs.

Connectivity queries go through :mod:`liftorient.flow`.  All-pairs questions
use a fixed root ``r``: ``lambda(x, y) >= min(lambda(x, r), lambda(r, y))``,
so checking ``lambda(r, t)`` for every ``t`` certifies every pair.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DomainError
from .flow import FlowNetwork, Indexer

log = logging.getLogger(__name__)

VertexId = int
EdgeId = int


class MultiGraph:
    """Finite loopless multigraph.

    ``lifted_from`` maps an edge created by a lift to the pair it replaced;
    ``loops`` holds edges that became loops under :func:`identify` (they are
    not part of the graph proper but keep their ids and original ends).
    """

    __slots__ = (
        "_ends",
        "_inc",
        "_next_vertex",
        "_next_edge",
        "lifted_from",
        "loops",
    )

    def __init__(
        self,
        vertices: Iterable[VertexId] = (),
        edges: Iterable[tuple[EdgeId, VertexId, VertexId]] = (),
        *,
        lifted_from: Mapping[EdgeId, tuple[EdgeId, EdgeId]] | None = None,
        loops: Mapping[EdgeId, tuple[VertexId, VertexId]] | None = None,
        next_vertex: int | None = None,
        next_edge: int | None = None,
    ):
        inc: dict[VertexId, list[EdgeId]] = {v: [] for v in vertices}
        ends: dict[EdgeId, tuple[VertexId, VertexId]] = {}
        for eid, u, v in edges:
            if u == v:
                raise DomainError(f"edge {eid} is a loop at {u}")
            if eid in ends:
                raise DomainError(f"duplicate edge id {eid}")
            ends[eid] = (u, v) if u < v else (v, u)
            inc.setdefault(u, []).append(eid)
            inc.setdefault(v, []).append(eid)
        for lst in inc.values():
            lst.sort()
        self._ends = ends
        self._inc = inc
        self.lifted_from: dict[EdgeId, tuple[EdgeId, EdgeId]] = dict(lifted_from or {})
        self.loops: dict[EdgeId, tuple[VertexId, VertexId]] = dict(loops or {})
        max_v = max(inc, default=-1)
        max_e = max(list(ends) + list(self.loops), default=-1)
        self._next_vertex = max(max_v + 1, next_vertex or 0)
        self._next_edge = max(max_e + 1, next_edge or 0)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[VertexId, VertexId]], vertices: Iterable[VertexId] = ()
    ) -> "MultiGraph":
        """Build from an edge list, numbering edges 0, 1, 2, ... in order."""
        pairs = list(pairs)
        verts = set(vertices)
        for u, v in pairs:
            verts.update((u, v))
        return cls(sorted(verts), ((i, u, v) for i, (u, v) in enumerate(pairs)))

    def _derive(
        self,
        vertices: Iterable[VertexId],
        edges: Iterable[tuple[EdgeId, VertexId, VertexId]],
        *,
        lifted_from: Mapping[EdgeId, tuple[EdgeId, EdgeId]] | None = None,
        loops: Mapping[EdgeId, tuple[VertexId, VertexId]] | None = None,
        next_vertex: int | None = None,
        next_edge: int | None = None,
    ) -> "MultiGraph":
        return MultiGraph(
            vertices,
            edges,
            lifted_from=self.lifted_from if lifted_from is None else lifted_from,
            loops=self.loops if loops is None else loops,
            next_vertex=max(self._next_vertex, next_vertex or 0),
            next_edge=max(self._next_edge, next_edge or 0),
        )

    # -- queries --------------------------------------------------------------

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return tuple(sorted(self._inc))

    @property
    def edges(self) -> tuple[EdgeId, ...]:
        return tuple(sorted(self._ends))

    def __len__(self) -> int:
        return len(self._inc)

    def __contains__(self, v: object) -> bool:
        return v in self._inc

    def has_edge(self, e: EdgeId) -> bool:
        return e in self._ends

    def num_edges(self) -> int:
        return len(self._ends)

    def ends(self, e: EdgeId) -> tuple[VertexId, VertexId]:
        try:
            return self._ends[e]
        except KeyError:
            raise DomainError(f"unknown edge {e}") from None

    def other(self, e: EdgeId, v: VertexId) -> VertexId:
        a, b = self.ends(e)
        if v == a:
            return b
        if v == b:
            return a
        raise DomainError(f"edge {e} is not incident with {v}")

    def incident(self, v: VertexId) -> tuple[EdgeId, ...]:
        try:
            return tuple(self._inc[v])
        except KeyError:
            raise DomainError(f"unknown vertex {v}") from None

    def degree(self, v: VertexId) -> int:
        return len(self.incident(v))

    def edges_between(self, u: VertexId, v: VertexId) -> tuple[EdgeId, ...]:
        return tuple(e for e in self.incident(u) if self.other(e, u) == v)

    def edge_triples(self) -> Iterator[tuple[EdgeId, VertexId, VertexId]]:
        for e in sorted(self._ends):
            u, v = self._ends[e]
            yield e, u, v

    def capacities(self) -> dict[tuple[VertexId, VertexId], int]:
        """Multiplicity of each unordered vertex pair (``u < v``)."""
        caps: dict[tuple[VertexId, VertexId], int] = defaultdict(int)
        for u, v in self._ends.values():
            caps[(u, v)] += 1
        return dict(caps)

    def fresh_vertex(self) -> VertexId:
        return self._next_vertex

    def fresh_edge(self) -> EdgeId:
        return self._next_edge

    def is_connected(self) -> bool:
        if not self._inc:
            return True
        start = next(iter(self._inc))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for e in self._inc[u]:
                w = self.other(e, u)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self._inc)

    # -- rewrites -------------------------------------------------------------

    def with_edge(self, u: VertexId, v: VertexId, eid: EdgeId | None = None) -> tuple["MultiGraph", EdgeId]:
        eid = self._next_edge if eid is None else eid
        g = self._derive(self._inc, list(self.edge_triples()) + [(eid, u, v)])
        return g, eid

    def without_edges(self, removed: Iterable[EdgeId]) -> "MultiGraph":
        removed = set(removed)
        return self._derive(self._inc, (t for t in self.edge_triples() if t[0] not in removed))

    def without_vertex(self, v: VertexId) -> "MultiGraph":
        if v not in self._inc:
            raise DomainError(f"unknown vertex {v}")
        return self._derive(
            (w for w in self._inc if w != v),
            (t for t in self.edge_triples() if v not in t[1:]),
        )

    def induced(self, vertices: Iterable[VertexId]) -> "MultiGraph":
        keep = set(vertices)
        return self._derive(
            sorted(keep & set(self._inc)),
            (t for t in self.edge_triples() if t[1] in keep and t[2] in keep),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self._ends == other._ends and set(self._inc) == set(other._inc)

    def __hash__(self) -> int:
        return hash((frozenset(self._inc), frozenset(self._ends.items())))

    def __repr__(self) -> str:
        return f"MultiGraph(|V|={len(self._inc)}, |E|={len(self._ends)})"


@dataclass(frozen=True)
class Cut:
    side: frozenset[VertexId]
    edges: tuple[EdgeId, ...]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class EdgeDisjointPaths:
    """Pairwise edge-disjoint paths between two terminals.

    ``paths`` holds edge sequences, ``vertex_paths`` the matching vertex
    sequences (each starts at ``source`` and ends at ``target``).
    """

    source: VertexId
    target: VertexId
    paths: tuple[tuple[EdgeId, ...], ...]
    vertex_paths: tuple[tuple[VertexId, ...], ...]

    def __len__(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class Connectivity:
    count: int
    witness: EdgeDisjointPaths
    cut: Cut


@dataclass(frozen=True)
class SKReport:
    """Result of an (s,k)-edge-connectivity check."""

    ok: bool
    violating_pair: tuple[VertexId, VertexId] | None = None
    flow: int | None = None
    vacuous: bool = False

    def __bool__(self) -> bool:
        return self.ok


# -- cuts ---------------------------------------------------------------------


def delta(g: MultiGraph, x_set: Iterable[VertexId]) -> Cut:
    """Edges with exactly one end in ``x_set``, sorted by id."""
    side = frozenset(x_set)
    unknown = [v for v in side if v not in g]
    if unknown:
        raise DomainError(f"vertices not in graph: {sorted(unknown)}")
    crossing = tuple(e for e, u, v in g.edge_triples() if (u in side) != (v in side))
    return Cut(side, crossing)


# -- flows --------------------------------------------------------------------


class _Oracle:
    """Flow network for one graph, reused across many source/sink queries."""

    def __init__(self, g: MultiGraph, capacities: dict[tuple[int, int], int] | None = None):
        self.indexer = Indexer(g.vertices)
        caps = g.capacities() if capacities is None else capacities
        net = FlowNetwork(len(self.indexer))
        idx = self.indexer.index
        for (u, v), c in caps.items():
            if c > 0:
                net.add_edge(idx[u], idx[v], c)
        self.base = net

    def flow(self, x: VertexId, y: VertexId, limit: int | None = None) -> tuple[int, FlowNetwork]:
        net = self.base.copy()
        value = net.max_flow(self.indexer[x], self.indexer[y], limit)
        return value, net

    def value(self, x: VertexId, y: VertexId, limit: int | None = None) -> int:
        return self.flow(x, y, limit)[0]


def local_edge_connectivity(g: MultiGraph, x: VertexId, y: VertexId) -> Connectivity:
    """Maximum number of edge-disjoint x-y paths, with paths and a minimum cut."""
    if x == y:
        raise DomainError("local connectivity needs two distinct vertices")
    for v in (x, y):
        if v not in g:
            raise DomainError(f"unknown vertex {v}")
    oracle = _Oracle(g)
    value, net = oracle.flow(x, y)
    labels = oracle.indexer.labels
    side = frozenset(labels[i] for i in net.reachable(oracle.indexer[x]))
    cut = delta(g, side)

    pools: dict[tuple[VertexId, VertexId], list[EdgeId]] = defaultdict(list)
    for e, u, v in g.edge_triples():
        pools[(u, v)].append(e)
    vertex_paths = []
    edge_paths = []
    for node_path in net.flow_paths(oracle.indexer[x], oracle.indexer[y]):
        vp = tuple(labels[i] for i in node_path)
        ep = []
        for a, b in zip(vp, vp[1:]):
            ep.append(pools[(min(a, b), max(a, b))].pop(0))
        vertex_paths.append(vp)
        edge_paths.append(tuple(ep))
    witness = EdgeDisjointPaths(x, y, tuple(edge_paths), tuple(vertex_paths))
    return Connectivity(value, witness, cut)


def local_connectivity_value(
    g: MultiGraph, x: VertexId, y: VertexId, limit: int | None = None
) -> int:
    if x == y:
        raise DomainError("local connectivity needs two distinct vertices")
    return _Oracle(g).value(x, y, limit)


def edge_connectivity(g: MultiGraph) -> int:
    """Global edge-connectivity; 0 for a disconnected graph."""
    vs = g.vertices
    if len(vs) < 2:
        raise DomainError("edge connectivity needs at least two vertices")
    if not g.is_connected():
        return 0
    oracle = _Oracle(g)
    root = vs[0]
    return min(oracle.value(root, t) for t in vs[1:])


def is_k_edge_connected(g: MultiGraph, k: int) -> SKReport:
    vs = g.vertices
    if len(vs) < 2:
        return SKReport(True, vacuous=True)
    oracle = _Oracle(g)
    root = vs[0]
    for t in vs[1:]:
        f = oracle.value(root, t, k)
        if f < k:
            return SKReport(False, (root, t), f)
    return SKReport(True)


def check_s_k(
    g: MultiGraph,
    s: VertexId,
    k: int,
    capacities: dict[tuple[int, int], int] | None = None,
    root: VertexId | None = None,
) -> SKReport:
    """(s,k)-edge-connectivity via the fixed-root reduction.

    ``capacities`` overrides the multiplicities of ``g`` (used by the lift
    fast path, which edits three entries instead of building a new graph).
    """
    others = [v for v in g.vertices if v != s]
    if len(others) < 2:
        return SKReport(True, vacuous=True)
    oracle = _Oracle(g, capacities)
    if root is None:
        root = others[0]
    for t in others:
        if t == root:
            continue
        f = oracle.value(root, t, k)
        if f < k:
            return SKReport(False, (root, t), f)
    return SKReport(True)


def is_s_k_edge_connected(g: MultiGraph, s: VertexId, k: int) -> SKReport:
    """True iff every two vertices other than ``s`` are joined by k edge-disjoint paths.

    Paths may pass through ``s``.  Fewer than two non-``s`` vertices gives a
    vacuous pass with ``vacuous`` set.
    """
    if s not in g:
        raise DomainError(f"unknown vertex {s}")
    if k < 1:
        raise DomainError("k must be positive")
    report = check_s_k(g, s, k)
    if report.vacuous:
        log.info("(s,k) check on %r is vacuous", g)
    return report


# -- rewrites -----------------------------------------------------------------


def contract(
    g: MultiGraph, x_set: Iterable[VertexId], s: VertexId | None = None
) -> tuple[MultiGraph, VertexId]:
    """Identify ``x_set`` into a single vertex, deleting edges inside it.

    Surviving edges keep their ids.  A one-vertex ``x_set`` is returned
    unchanged (``s`` is that vertex).
    """
    xs = set(x_set)
    if not xs:
        raise DomainError("cannot contract an empty set")
    unknown = [v for v in xs if v not in g]
    if unknown:
        raise DomainError(f"vertices not in graph: {sorted(unknown)}")
    if len(xs) == 1:
        (only,) = xs
        return g, only
    if s is None:
        s = g.fresh_vertex()
    elif s in g and s not in xs:
        raise DomainError(f"contraction vertex {s} already in graph")
    if len(xs) == len(g):
        log.warning("contracting every vertex: result has a single vertex")
    vertices = [v for v in g.vertices if v not in xs] + [s]
    edges = []
    for e, u, v in g.edge_triples():
        a = s if u in xs else u
        b = s if v in xs else v
        if a != b:
            edges.append((e, a, b))
    return g._derive(vertices, edges, next_vertex=s + 1), s


def identify(g: MultiGraph, u: VertexId, v: VertexId) -> MultiGraph:
    """Merge ``v`` into ``u``; u-v edges are moved to ``loops``."""
    if u == v:
        raise DomainError("identify needs two distinct vertices")
    for w in (u, v):
        if w not in g:
            raise DomainError(f"unknown vertex {w}")
    loops = dict(g.loops)
    edges = []
    for e, a, b in g.edge_triples():
        a2 = u if a == v else a
        b2 = u if b == v else b
        if a2 == b2:
            loops[e] = (a, b)
        else:
            edges.append((e, a2, b2))
    return g._derive((w for w in g.vertices if w != v), edges, loops=loops)


# -- text formats -------------------------------------------------------------


def parse_edge_list(text: str) -> MultiGraph:
    """Parse ``u v [m]`` lines; ``#`` starts a comment; m expands to parallels."""
    pairs: list[tuple[int, int]] = []
    verts: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            v = int(parts[0])
            if v < 0:
                raise DomainError(f"line {lineno}: negative vertex")
            verts.add(v)
            continue
        if len(parts) not in (2, 3):
            raise DomainError(f"line {lineno}: expected 'u v [m]'")
        u, v = int(parts[0]), int(parts[1])
        m = int(parts[2]) if len(parts) == 3 else 1
        if u < 0 or v < 0:
            raise DomainError(f"line {lineno}: vertices must be nonnegative")
        if m < 1:
            raise DomainError(f"line {lineno}: multiplicity must be >= 1")
        if u == v:
            raise DomainError(f"line {lineno}: loops are not allowed")
        pairs.extend([(u, v)] * m)
    return MultiGraph.from_pairs(pairs, verts)


def read_edge_list(path: str | Path) -> MultiGraph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def format_edge_list(g: MultiGraph, *, collapse: bool = True) -> str:
    lines = []
    isolated = [v for v in g.vertices if g.degree(v) == 0]
    if collapse:
        for (u, v), m in sorted(g.capacities().items()):
            lines.append(f"{u} {v}" if m == 1 else f"{u} {v} {m}")
    else:
        for _, u, v in g.edge_triples():
            lines.append(f"{u} {v}")
    lines.extend(str(v) for v in isolated)
    return "\n".join(lines) + "\n"


def to_dot(
    g: MultiGraph,
    *,
    name: str = "G",
    highlight: Iterable[VertexId] = (),
    edge_colors: Mapping[EdgeId, str] | None = None,
    heads: Mapping[EdgeId, VertexId] | None = None,
) -> str:
    """DOT rendering; ``heads`` turns edges into arcs pointing at the head."""
    hi = set(highlight)
    colors = edge_colors or {}
    directed = bool(heads)
    out = [f"{'di' if directed else ''}graph {name} {{"]
    for v in g.vertices:
        attr = ' [style=filled, fillcolor="#f4b942"]' if v in hi else ""
        out.append(f"  {v}{attr};")
    for e, u, v in g.edge_triples():
        attrs = [f'label="{e}"']
        if e in colors:
            attrs.append(f'color="{colors[e]}"')
        if directed:
            h = heads.get(e) if heads else None
            if h is None:
                attrs.append("dir=none")
                a, b = u, v
            else:
                a, b = (u, v) if h == v else (v, u)
            out.append(f"  {a} -> {b} [{', '.join(attrs)}];")
        else:
            out.append(f"  {u} -- {v} [{', '.join(attrs)}];")
    out.append("}")
    return "\n".join(out) + "\n"
