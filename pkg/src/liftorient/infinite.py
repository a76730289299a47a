"""Locally-finite infinite graphs given by a neighbour oracle.

The oracle is the only view of the infinite graph.  Everything finite is cut
out of it: truncations (balls), the finite set ``S`` whose boundary edges
start edge-disjoint rays, and the end graph on those boundary edges.

"Infinitely many vertex-disjoint paths" cannot be observed on a finite
window, so end-graph adjacency is certified by ``width`` vertex-disjoint
connections inside the ball of radius ``horizon`` around ``S``.  Every
:class:`EndGraph` records the horizon and width it was certified at.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DomainError, ResourceError
from .flow import FlowNetwork, Indexer, vertex_disjoint_count
from .multigraph import Cut, EdgeId, MultiGraph, VertexId

log = logging.getLogger(__name__)


# -- oracles ------------------------------------------------------------------


class LocallyFiniteGraph(ABC):
    """Connected locally-finite graph presented by a neighbour oracle.

    ``neighbors(v)`` returns ``(w, edge)`` pairs sorted by edge id; an edge
    appears in the lists of both its ends with the same id.
    """

    name: str = "oracle"

    def __init__(self) -> None:
        self._memo: dict[VertexId, tuple[tuple[VertexId, EdgeId], ...]] = {}

    @property
    @abstractmethod
    def root(self) -> VertexId: ...

    @abstractmethod
    def _neighbors(self, v: VertexId) -> list[tuple[VertexId, EdgeId]]: ...

    @abstractmethod
    def edge_ends(self, e: EdgeId) -> tuple[VertexId, VertexId]: ...

    @abstractmethod
    def has_vertex(self, v: VertexId) -> bool: ...

    def params(self) -> dict:
        return {}

    def neighbors(self, v: VertexId) -> tuple[tuple[VertexId, EdgeId], ...]:
        hit = self._memo.get(v)
        if hit is None:
            if not self.has_vertex(v):
                raise DomainError(f"{v} is not a vertex of {self.name}")
            hit = tuple(sorted(self._neighbors(v), key=lambda t: (t[1], t[0])))
            self._memo[v] = hit
        return hit

    def degree(self, v: VertexId) -> int:
        return len(self.neighbors(v))

    def describe(self) -> dict:
        return {"generator": self.name, "params": self.params()}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, {self.params()})"


def _zig(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def _unzig(n: int) -> int:
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def _pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def _unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


@dataclass(frozen=True)
class Rule:
    """``mult`` edges from cell vertex ``u`` at (x, y) to ``v`` at (x+dx, y+dy)."""

    u: int
    v: int
    dx: int
    dy: int
    mult: int = 1


class PeriodicGraph(LocallyFiniteGraph):
    """Z^2-periodic graph: a cell of ``cell`` vertices repeated at every lattice point.

    Vertex (x, y, i) has id ``pair(zig x, zig y) * cell + i``; the j-th copy
    of rule r issued from cell (x, y) has id ``pair(zig x, zig y) * M + off[r] + j``
    where M is the total multiplicity of all rules.
    """

    def __init__(self, cell: int, rules: Sequence[Rule], name: str, params: dict | None = None):
        super().__init__()
        if cell < 1:
            raise DomainError("a cell needs at least one vertex")
        if not rules:
            raise DomainError("a periodic graph needs at least one rule")
        for r in rules:
            if not (0 <= r.u < cell and 0 <= r.v < cell):
                raise DomainError(f"rule {r} names a vertex outside the cell")
            if r.mult < 1:
                raise DomainError(f"rule {r} has non-positive multiplicity")
            if r.u == r.v and r.dx == 0 and r.dy == 0:
                raise DomainError(f"rule {r} is a loop")
        self.cell = cell
        self.rules = tuple(rules)
        self.name = name
        self._params = dict(params or {})
        self._offsets = list(itertools.accumulate([0] + [r.mult for r in self.rules]))
        self._block = self._offsets[-1]

    def params(self) -> dict:
        return dict(self._params)

    @property
    def root(self) -> VertexId:
        return self.vertex(0, 0, 0)

    def vertex(self, x: int, y: int, i: int = 0) -> VertexId:
        return _pair(_zig(x), _zig(y)) * self.cell + i

    def coords(self, v: VertexId) -> tuple[int, int, int]:
        c, i = divmod(v, self.cell)
        a, b = _unpair(c)
        return _unzig(a), _unzig(b), i

    def has_vertex(self, v: VertexId) -> bool:
        return isinstance(v, int) and v >= 0

    def _edge_id(self, x: int, y: int, r: int, j: int) -> EdgeId:
        return _pair(_zig(x), _zig(y)) * self._block + self._offsets[r] + j

    def edge_ends(self, e: EdgeId) -> tuple[VertexId, VertexId]:
        if e < 0:
            raise DomainError(f"unknown edge {e}")
        c, rem = divmod(e, self._block)
        r = next(i for i in range(len(self.rules)) if self._offsets[i + 1] > rem)
        a, b = _unpair(c)
        x, y = _unzig(a), _unzig(b)
        rule = self.rules[r]
        return self.vertex(x, y, rule.u), self.vertex(x + rule.dx, y + rule.dy, rule.v)

    def _neighbors(self, v: VertexId) -> list[tuple[VertexId, EdgeId]]:
        x, y, i = self.coords(v)
        out = []
        for r, rule in enumerate(self.rules):
            if rule.u == i:
                w = self.vertex(x + rule.dx, y + rule.dy, rule.v)
                out.extend((w, self._edge_id(x, y, r, j)) for j in range(rule.mult))
            if rule.v == i:
                w = self.vertex(x - rule.dx, y - rule.dy, rule.u)
                out.extend((w, self._edge_id(x - rule.dx, y - rule.dy, r, j)) for j in range(rule.mult))
        return out

    def to_json(self) -> dict:
        return {
            "cell": self.cell,
            "rules": [[r.u, r.v, r.dx, r.dy, r.mult] for r in self.rules],
        }


def generator_grid(multiplicity: int = 1) -> PeriodicGraph:
    """Square lattice Z^2 with every lattice edge repeated ``multiplicity`` times."""
    if multiplicity < 1:
        raise DomainError("grid multiplicity must be >= 1")
    m = multiplicity
    return PeriodicGraph(1, [Rule(0, 0, 1, 0, m), Rule(0, 0, 0, 1, m)], "grid", {"m": m})


def generator_triangular(alternating: bool = False) -> PeriodicGraph:
    """Triangular lattice (6-regular).

    With ``alternating`` the vertical edges leaving even rows are doubled, so
    every vertex has degree 7 and odd cuts exist; the graph still contains
    the triangular lattice and is 6-edge-connected.
    """
    if not alternating:
        rules = [Rule(0, 0, 1, 0), Rule(0, 0, 0, 1), Rule(0, 0, 1, 1)]
        return PeriodicGraph(1, rules, "tri", {})
    # cell (x, y) holds a = (x, 2y) and b = (x, 2y+1)
    rules = [
        Rule(0, 0, 1, 0),
        Rule(1, 1, 1, 0),
        Rule(0, 1, 0, 0, 2),
        Rule(1, 0, 0, 1, 1),
        Rule(0, 1, 1, 0),
        Rule(1, 0, 1, 1),
    ]
    return PeriodicGraph(2, rules, "tri", {"alt": 1})


def periodic_from_json(data: dict, name: str = "file") -> PeriodicGraph:
    try:
        cell = int(data["cell"])
        rules = [Rule(*[int(x) for x in r]) for r in data["rules"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad periodic tiling description: {exc}") from None
    return PeriodicGraph(cell, rules, name, {k: v for k, v in data.items() if k not in ("cell", "rules")})


class FiniteOracle(LocallyFiniteGraph):
    """A finite multigraph behind the oracle interface (for negative tests)."""

    name = "finite"

    def __init__(self, g: MultiGraph, root: VertexId | None = None):
        super().__init__()
        self.graph = g
        self._root = g.vertices[0] if root is None else root

    @property
    def root(self) -> VertexId:
        return self._root

    def has_vertex(self, v: VertexId) -> bool:
        return v in self.graph

    def edge_ends(self, e: EdgeId) -> tuple[VertexId, VertexId]:
        return self.graph.ends(e)

    def _neighbors(self, v: VertexId) -> list[tuple[VertexId, EdgeId]]:
        return [(self.graph.other(e, v), e) for e in self.graph.incident(v)]

    def params(self) -> dict:
        return {"n": len(self.graph), "m": self.graph.num_edges()}


class CorridorGraph(LocallyFiniteGraph):
    """A finite core whose s-edges continue as parallel half-line corridors.

    ``core`` is a finite multigraph with a distinguished vertex ``s``; every
    edge at ``s`` is re-attached to the base of its own corridor, in the
    order given by ``order``.  Consecutive corridors are joined by rungs.
    The corridor named ``middle`` carries single edges and its rungs to the
    left neighbour sit at even positions, those to the right at odd ones, so
    any connection across it must use one of its edges.  Contracting the
    corridors back to one vertex returns ``core``.
    """

    name = "corridor"

    def __init__(
        self,
        core: MultiGraph,
        s: VertexId,
        order: Sequence[EdgeId],
        middle: EdgeId | None = None,
        *,
        corridor_mult: int = 3,
        rung_mult: int = 3,
        middle_rung_mult: int | None = None,
    ):
        super().__init__()
        order = tuple(order)
        if sorted(order) != sorted(core.incident(s)):
            raise DomainError("corridor order must list every edge at s exactly once")
        self.core = core
        self.s = s
        self.order = order
        self.middle = order.index(middle) if middle is not None else None
        self.corridor_mult = corridor_mult
        self.rung_mult = rung_mult
        self.middle_rung_mult = rung_mult if middle_rung_mult is None else middle_rung_mult
        self._base_v = max(core.vertices) + 1
        self._base_e = max(core.edges) + 1
        self._nc = len(order)
        # per-position block of edge slots: corridor copies then rung copies
        self._layout: list[tuple[str, int, int]] = []
        for j in range(self._nc):
            mult = 1 if j == self.middle else corridor_mult
            self._layout.extend(("c", j, c) for c in range(mult))
        for j in range(self._nc - 1):
            mult = self.middle_rung_mult if self.middle in (j, j + 1) else rung_mult
            self._layout.extend(("r", j, c) for c in range(mult))
        self._slot = {t: i for i, t in enumerate(self._layout)}
        self._block = len(self._layout)

    def params(self) -> dict:
        return {
            "corridors": self._nc,
            "middle": self.middle,
            "corridor_mult": self.corridor_mult,
            "rung_mult": self.rung_mult,
            "middle_rung_mult": self.middle_rung_mult,
        }

    @property
    def root(self) -> VertexId:
        return min(v for v in self.core.vertices if v != self.s)

    def corridor_vertex(self, j: int, t: int) -> VertexId:
        return self._base_v + t * self._nc + j

    def _pos(self, v: VertexId) -> tuple[int, int]:
        t, j = divmod(v - self._base_v, self._nc)
        return j, t

    def has_vertex(self, v: VertexId) -> bool:
        return (v in self.core and v != self.s) or (isinstance(v, int) and v >= self._base_v)

    def _rung_here(self, j: int, t: int) -> bool:
        # rung between corridors j and j+1 at position t
        if self.middle is None or self.middle not in (j, j + 1):
            return True
        left_of_middle = j + 1 == self.middle
        return (t % 2 == 0) if left_of_middle else (t % 2 == 1)

    def _eid(self, t: int, kind: str, j: int, c: int) -> EdgeId:
        return self._base_e + t * self._block + self._slot[(kind, j, c)]

    def edge_ends(self, e: EdgeId) -> tuple[VertexId, VertexId]:
        if e < self._base_e:
            u, v = self.core.ends(e)
            if self.s in (u, v):
                x = v if u == self.s else u
                return x, self.corridor_vertex(self.order.index(e), 0)
            return u, v
        t, slot = divmod(e - self._base_e, self._block)
        kind, j, _ = self._layout[slot]
        if kind == "c":
            return self.corridor_vertex(j, t), self.corridor_vertex(j, t + 1)
        if not self._rung_here(j, t):
            raise DomainError(f"unknown edge {e}")
        return self.corridor_vertex(j, t), self.corridor_vertex(j + 1, t)

    def _neighbors(self, v: VertexId) -> list[tuple[VertexId, EdgeId]]:
        out = []
        if v < self._base_v:
            for e in self.core.incident(v):
                w = self.core.other(e, v)
                if w == self.s:
                    out.append((self.corridor_vertex(self.order.index(e), 0), e))
                else:
                    out.append((w, e))
            return out
        j, t = self._pos(v)
        if t == 0:
            e = self.order[j]
            out.append((self.core.other(e, self.s), e))
        mult = 1 if j == self.middle else self.corridor_mult
        for c in range(mult):
            out.append((self.corridor_vertex(j, t + 1), self._eid(t, "c", j, c)))
            if t > 0:
                out.append((self.corridor_vertex(j, t - 1), self._eid(t - 1, "c", j, c)))
        for jj, other in ((j, j + 1), (j - 1, j - 1)):
            if not (0 <= jj < self._nc - 1) or not self._rung_here(jj, t):
                continue
            mult = self.middle_rung_mult if self.middle in (jj, jj + 1) else self.rung_mult
            for c in range(mult):
                out.append((self.corridor_vertex(other, t), self._eid(t, "r", jj, c)))
        return out


def parse_generator(spec: str) -> LocallyFiniteGraph:
    """Build an oracle from ``grid:m=2``, ``tri``, ``tri:alt=1`` or ``file:<path>``."""
    head, _, rest = spec.partition(":")
    if head == "file":
        if not rest:
            raise DomainError("file: generator needs a path")
        try:
            data = json.loads(Path(rest).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read tiling file {rest}: {exc}") from None
        return periodic_from_json(data, name=f"file:{rest}")
    opts: dict[str, int] = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise DomainError(f"bad generator option {item!r} (expected key=value)")
        try:
            opts[key.strip()] = int(value)
        except ValueError:
            raise DomainError(f"generator option {key} must be an integer") from None
    if head == "grid":
        unknown = set(opts) - {"m"}
        if unknown:
            raise DomainError(f"unknown grid options {sorted(unknown)}")
        return generator_grid(opts.get("m", 1))
    if head == "tri":
        unknown = set(opts) - {"alt"}
        if unknown:
            raise DomainError(f"unknown tri options {sorted(unknown)}")
        return generator_triangular(bool(opts.get("alt", 0)))
    raise DomainError(f"unknown generator {head!r} (expected grid, tri or file)")


# -- balls and truncations ----------------------------------------------------


def distances(
    g_inf: LocallyFiniteGraph,
    centers: Iterable[VertexId],
    radius: int,
    avoid: Iterable[VertexId] = (),
) -> dict[VertexId, int]:
    """BFS distances from ``centers`` up to ``radius`` (``avoid`` is never entered)."""
    blocked = set(avoid)
    dist: dict[VertexId, int] = {}
    queue: deque[VertexId] = deque()
    for c in centers:
        if c not in dist and c not in blocked:
            g_inf.neighbors(c)  # validates membership
            dist[c] = 0
            queue.append(c)
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d == radius:
            continue
        for w, _ in g_inf.neighbors(v):
            if w not in dist and w not in blocked:
                dist[w] = d + 1
                queue.append(w)
    return dist


def induced_graph(g_inf: LocallyFiniteGraph, vertices: Iterable[VertexId]) -> MultiGraph:
    keep = set(vertices)
    seen: set[EdgeId] = set()
    triples = []
    for v in sorted(keep):
        for w, e in g_inf.neighbors(v):
            if w in keep and e not in seen:
                seen.add(e)
                triples.append((e, v, w))
    return MultiGraph(sorted(keep), triples)


@dataclass(frozen=True)
class Truncation:
    graph: MultiGraph
    depth: int
    core: frozenset[VertexId]
    boundary: frozenset[VertexId]
    dist: dict[VertexId, int] = field(compare=False, repr=False)


def truncate(g_inf: LocallyFiniteGraph, centers: Iterable[VertexId], radius: int) -> Truncation:
    """Induced subgraph on the radius-``radius`` ball around ``centers``."""
    centers = list(centers)
    if not centers:
        raise DomainError("truncation needs at least one center")
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    dist = distances(g_inf, centers, radius)
    boundary = frozenset(v for v, d in dist.items() if d == radius)
    return Truncation(induced_graph(g_inf, dist), radius, frozenset(centers), boundary, dist)


def one_ended_diagnostic(g_inf: LocallyFiniteGraph, center: VertexId, r_max: int) -> dict:
    """Count components of G - ball(r) that reach the depth r_max+3 sphere, r <= r_max."""
    outer = r_max + 3
    dist = distances(g_inf, [center], outer)
    sphere = {v for v, d in dist.items() if d == outer}
    counts = {}
    for r in range(r_max + 1):
        inside = {v for v, d in dist.items() if d <= r}
        rest = {v for v, d in dist.items() if d > r}
        seen: set[VertexId] = set()
        touching = 0
        for start in sorted(rest):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                v = stack.pop()
                for w, _ in g_inf.neighbors(v):
                    if w in rest and w not in seen:
                        seen.add(w)
                        comp.add(w)
                        stack.append(w)
            if comp & sphere:
                touching += 1
        counts[r] = touching
        del inside
    return {"center": center, "r_max": r_max, "components": counts, "one_ended": all(c == 1 for c in counts.values())}


def check_edge_connectivity(
    g_inf: LocallyFiniteGraph, centers: Iterable[VertexId], radius: int, k: int
) -> tuple[bool, tuple[VertexId, VertexId] | None]:
    """k-edge-connectivity of G on the window: ball(radius) plus one vertex for the rest.

    The vertices at distance radius+1 are merged into a single vertex
    standing for the (connected) remainder of a 1-ended graph.
    """
    from .multigraph import contract, is_k_edge_connected

    t = truncate(g_inf, centers, radius + 1)
    outside = [v for v, d in t.dist.items() if d == radius + 1]
    g = t.graph
    if outside:
        g, _ = contract(g, outside)
    rep = is_k_edge_connected(g, k)
    return rep.ok, rep.violating_pair


# -- rays -----------------------------------------------------------------------


@dataclass(frozen=True)
class Ray:
    """Prefix of a ray: ``vertices[0]`` is in S, ``edges[0]`` is the cut edge.

    ``edges[j]`` joins ``vertices[j]`` and ``vertices[j+1]``.
    """

    start_edge: EdgeId
    vertices: tuple[VertexId, ...]
    edges: tuple[EdgeId, ...]

    @property
    def inner(self) -> VertexId:
        return self.vertices[0]

    @property
    def outer(self) -> VertexId:
        return self.vertices[1]

    def __len__(self) -> int:
        return len(self.edges)

    def position(self) -> dict[VertexId, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def to_json(self) -> dict:
        return {"start_edge": self.start_edge, "vertices": list(self.vertices), "edges": list(self.edges)}


@dataclass(frozen=True)
class RayCollection:
    rays: tuple[Ray, ...]
    depth: int

    def __len__(self) -> int:
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def by_edge(self) -> dict[EdgeId, Ray]:
        return {r.start_edge: r for r in self.rays}

    def overlaps(self) -> list[tuple[EdgeId, EdgeId, EdgeId]]:
        """(ray, ray, shared edge) triples; empty for a valid collection."""
        owner: dict[EdgeId, EdgeId] = {}
        bad = []
        for r in self.rays:
            for e in r.edges:
                if e in owner:
                    bad.append((owner[e], r.start_edge, e))
                else:
                    owner[e] = r.start_edge
        return bad

    def extend(self, g_inf: LocallyFiniteGraph, s_set: Iterable[VertexId], new_depth: int) -> "RayCollection":
        """Lengthen every prefix to reach distance ``new_depth`` from S.

        The extension is routed through the shell between the current tips
        and the new sphere by one flow, so no ray revisits its own prefix.
        """
        if new_depth <= self.depth:
            return self
        s_set = set(s_set)
        dist = distances(g_inf, s_set, new_depth)
        region = {v for v, d in dist.items() if d >= self.depth}
        sphere = {v for v, d in dist.items() if d == new_depth}
        if not sphere:
            raise ResourceError("no vertex at the new depth: graph appears finite", parameter="depth")
        used = {e for r in self.rays for e in r.edges}
        tips: dict[VertexId, list[int]] = {}
        for i, r in enumerate(self.rays):
            tips.setdefault(r.vertices[-1], []).append(i)
        net, idx, pools = _region_network(g_inf, region, used)
        src, snk = len(idx), len(idx) + 1
        for v, owners in tips.items():
            net.add_arc(src, idx[v], len(owners))
        for v in sphere:
            net.add_arc(idx[v], snk, 10**9)
        value = net.max_flow(src, snk)
        if value < len(self.rays):
            raise ResourceError(
                f"shell flow {value} < {len(self.rays)} rays between depth {self.depth} and {new_depth}",
                parameter="depth",
            )
        labels = idx.labels
        by_tip: dict[VertexId, list[tuple[list[VertexId], list[EdgeId]]]] = {}
        for node_path in net.flow_paths(src, snk):
            vp = [labels[i] for i in node_path[1:-1]]
            vp = _trim_at(vp, sphere)
            by_tip.setdefault(vp[0], []).append((vp, _edges_for(vp, pools)))
        rays = list(self.rays)
        for v, owners in tips.items():
            for i, (vp, ep) in zip(owners, by_tip[v]):
                r = rays[i]
                rays[i] = Ray(r.start_edge, r.vertices + tuple(vp[1:]), r.edges + tuple(ep))
        return RayCollection(tuple(rays), new_depth)


def _trim_at(vp: list[VertexId], stop: set[VertexId]) -> list[VertexId]:
    for i, v in enumerate(vp):
        if v in stop:
            return vp[: i + 1]
    return vp


def _edges_for(vp: Sequence[VertexId], pools: dict[tuple[VertexId, VertexId], list[EdgeId]]) -> list[EdgeId]:
    out = []
    for a, b in zip(vp, vp[1:]):
        out.append(pools[(min(a, b), max(a, b))].pop(0))
    return out


def _region_network(
    g_inf: LocallyFiniteGraph, region: set[VertexId], blocked: set[EdgeId] = frozenset()
) -> tuple[FlowNetwork, Indexer, dict]:
    """Undirected unit network on ``region`` (plus two spare nodes), skipping ``blocked``."""
    idx = Indexer(sorted(region))
    net = FlowNetwork(len(idx) + 2)
    pools: dict[tuple[VertexId, VertexId], list[EdgeId]] = {}
    seen: set[EdgeId] = set()
    for v in sorted(region):
        for w, e in g_inf.neighbors(v):
            if w in region and e not in seen and e not in blocked:
                seen.add(e)
                net.add_edge(idx[v], idx[w], 1)
                pools.setdefault((min(v, w), max(v, w)), []).append(e)
    for lst in pools.values():
        lst.sort()
    return net, idx, pools


@dataclass(frozen=True)
class RayCut:
    """A finite S with edge-disjoint rays from every edge of delta(S)."""

    s_set: frozenset[VertexId]
    a_set: frozenset[VertexId]
    cut: Cut
    rays: RayCollection
    depth: int
    flow: int
    recheck_flow: int
    rounds: int
    g_inf: LocallyFiniteGraph = field(compare=False, repr=False)

    def ray(self, e: EdgeId) -> Ray:
        return self.rays.by_edge()[e]


def _fill(g_inf: LocallyFiniteGraph, s_set: set[VertexId], depth: int) -> set[VertexId]:
    """Add to S every component of ball(S, depth) - S that misses the depth sphere."""
    dist = distances(g_inf, s_set, depth)
    sphere = {v for v, d in dist.items() if d == depth}
    rest = {v for v in dist if v not in s_set}
    out = set(s_set)
    seen: set[VertexId] = set()
    for start in sorted(rest):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        hits = start in sphere
        while stack:
            v = stack.pop()
            for w, _ in g_inf.neighbors(v):
                if w in rest and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
                    hits = hits or w in sphere
        if not hits:
            out.update(comp)
    return out


def _stub_flow(g_inf: LocallyFiniteGraph, s_set: set[VertexId], depth: int):
    dist = distances(g_inf, s_set, depth)
    sphere = {v for v, d in dist.items() if d == depth}
    if not sphere:
        raise ResourceError(
            f"no vertex at distance {depth} from S: the graph looks finite, so no rays exist",
            parameter="depth",
        )
    outside = {v for v in dist if v not in s_set}
    cut_edges = []
    landing: dict[VertexId, list[EdgeId]] = {}
    for v in sorted(s_set):
        for w, e in g_inf.neighbors(v):
            if w not in s_set:
                cut_edges.append(e)
                landing.setdefault(w, []).append(e)
    net, idx, pools = _region_network(g_inf, outside)
    src, snk = len(idx), len(idx) + 1
    for w, es in landing.items():
        net.add_arc(src, idx[w], len(es))
    for v in sphere:
        net.add_arc(idx[v], snk, 10**9)
    value = net.max_flow(src, snk)
    return value, sorted(cut_edges), landing, net, idx, pools, sphere


def find_ray_cut(
    g_inf: LocallyFiniteGraph,
    a_set: Iterable[VertexId],
    depth: int = 6,
    *,
    radius: int = 0,
    max_rounds: int = 50,
) -> RayCut:
    """Finite S containing ``a_set`` whose cut edges start edge-disjoint rays.

    Start from the filled radius-``radius`` ball around ``a_set``.  While the
    flow from the cut edges to the depth-``depth`` sphere of G - S does not
    saturate, absorb the source side of a minimum cut into S.  The final
    flow is decomposed into ray prefixes and re-certified at depth+2.
    """
    a = set(a_set)
    if not a:
        raise DomainError("a_set must be nonempty")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    s_set = _fill(g_inf, set(distances(g_inf, a, radius)), depth)
    for rounds in range(1, max_rounds + 1):
        value, cut_edges, landing, net, idx, pools, sphere = _stub_flow(g_inf, s_set, depth)
        if value == len(cut_edges):
            break
        src = len(idx)
        side = {idx.labels[i] for i in net.reachable(src) if i < len(idx)}
        grown = _fill(g_inf, s_set | side, depth)
        if grown & sphere or len(grown) == len(s_set):
            raise ResourceError(
                f"cut of S (|S|={len(s_set)}) does not link to depth {depth}; raise depth",
                parameter="depth",
            )
        s_set = grown
    else:
        raise ResourceError(f"no ray cut within {max_rounds} rounds; raise depth", parameter="depth")

    recheck, *_ = _stub_flow(g_inf, s_set, depth + 2)
    if recheck != len(cut_edges):
        raise ResourceError(
            f"ray certificate fails at depth {depth + 2} ({recheck} < {len(cut_edges)}); raise depth",
            parameter="depth",
        )
    labels = idx.labels
    src, snk = len(idx), len(idx) + 1
    starts: dict[VertexId, list[list[VertexId]]] = {}
    for node_path in net.flow_paths(src, snk):
        vp = _trim_at([labels[i] for i in node_path[1:-1]], sphere)
        starts.setdefault(vp[0], []).append(vp)
    rays = []
    for w in sorted(landing):
        for e, vp in zip(landing[w], starts[w]):
            u = next(x for x in g_inf.edge_ends(e) if x in s_set)
            rays.append(Ray(e, (u,) + tuple(vp), (e,) + tuple(_edges_for(vp, pools))))
    rays.sort(key=lambda r: r.start_edge)
    s_frozen = frozenset(s_set)
    cut = Cut(s_frozen, tuple(cut_edges))
    return RayCut(s_frozen, frozenset(a), cut, RayCollection(tuple(rays), depth), depth, value, recheck, rounds, g_inf)


# -- end graph and connecting paths --------------------------------------------


@dataclass(frozen=True)
class EndGraph:
    nodes: tuple[EdgeId, ...]
    adjacency: frozenset[tuple[EdgeId, EdgeId]]
    horizon: int
    width: int
    relaxed: bool = False

    def adjacent(self, a: EdgeId, b: EdgeId) -> bool:
        return (min(a, b), max(a, b)) in self.adjacency

    def neighbors(self, a: EdgeId) -> tuple[EdgeId, ...]:
        return tuple(b for b in self.nodes if b != a and self.adjacent(a, b))

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            a = stack.pop()
            for b in self.neighbors(a):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return len(seen) == len(self.nodes)

    @classmethod
    def from_edges(cls, nodes, adjacency, horizon: int = 0, width: int = 0) -> "EndGraph":
        adj = frozenset((min(a, b), max(a, b)) for a, b in adjacency)
        return cls(tuple(sorted(nodes)), adj, horizon, width)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "adjacency": [list(p) for p in sorted(self.adjacency)],
            "horizon": self.horizon,
            "width": self.width,
            "relaxed": self.relaxed,
        }


class RayWindow:
    """The finite window T - S used for end-graph certification and path search."""

    def __init__(self, rc: RayCut, horizon: int | None = None):
        self.rc = rc
        self.horizon = rc.depth if horizon is None else horizon
        if self.horizon > rc.depth:
            raise DomainError(f"horizon {self.horizon} exceeds materialised ray depth {rc.depth}")
        g_inf = rc.g_inf
        self.dist = distances(g_inf, rc.s_set, self.horizon)
        self.outside = frozenset(v for v in self.dist if v not in rc.s_set)
        self.adj: dict[VertexId, list[tuple[VertexId, EdgeId]]] = {}
        for v in self.outside:
            self.adj[v] = [(w, e) for w, e in g_inf.neighbors(v) if w in self.outside]
        self.rays = rc.rays.by_edge()
        self._ray_edges = {e: frozenset(r.edges) for e, r in self.rays.items()}
        self._ray_pos = {}
        for e, r in self.rays.items():
            pos = {}
            for i, v in enumerate(r.vertices):
                if i > 0 and v in self.outside and v not in pos:
                    pos[v] = i
            self._ray_pos[e] = pos

    def ray_edges(self, e: EdgeId) -> frozenset[EdgeId]:
        return self._ray_edges[e]

    def blocked(
        self, active: Iterable[EdgeId], forbidden: Iterable[EdgeId] = (), exempt: Iterable[EdgeId] = ()
    ) -> set[EdgeId]:
        skip = set(exempt)
        out = set(forbidden)
        for x in active:
            if x not in skip:
                out |= self._ray_edges[x]
        return out

    def width(self, a: EdgeId, b: EdgeId, blocked: set[EdgeId], limit: int) -> int:
        """Vertex-disjoint connections between the rays of ``a`` and ``b`` avoiding ``blocked``."""
        adjacency = {
            v: [w for w, e in nbrs if e not in blocked] for v, nbrs in self.adj.items()
        }
        return vertex_disjoint_count(adjacency, self._ray_pos[a], self._ray_pos[b], limit)

    def outer_distance(self, a: EdgeId, b: EdgeId) -> int:
        """Distance in T - S between the outer ends of the two cut edges."""
        cache = getattr(self, "_outer_dist", None)
        if cache is None:
            cache = self._outer_dist = {}
        src = self.rays[a].outer
        if src not in cache:
            dist = {src: 0}
            queue = deque([src])
            while queue:
                v = queue.popleft()
                for w, _ in self.adj.get(v, ()):
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        queue.append(w)
            cache[src] = dist
        return cache[src].get(self.rays[b].outer, 10**9)

    def connect(self, a: EdgeId, b: EdgeId, blocked: set[EdgeId]) -> tuple[list[VertexId], list[EdgeId]]:
        """Cheapest connection from ray ``a`` to ray ``b``.

        Cost = position on ray a + length + position on ray b, so the spliced
        path from the outer end of a to the outer end of b is as short as
        possible.  The returned path meets ray a only at its first vertex and
        ray b only at its last.
        """
        src, tgt = self._ray_pos[a], self._ray_pos[b]
        best = None
        dist: dict[VertexId, int] = {}
        parent: dict[VertexId, tuple[VertexId, EdgeId] | None] = {}
        heap = []
        for v, i in src.items():
            dist[v] = i
            parent[v] = None
            heapq.heappush(heap, (i, v))
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            if best is not None and d >= best[0]:
                break
            if v in tgt:
                cand = (d + tgt[v], v)
                if best is None or cand < best:
                    best = cand
            for w, e in self.adj[v]:
                if e in blocked:
                    continue
                nd = d + 1
                if nd < dist.get(w, 10**9):
                    dist[w] = nd
                    parent[w] = (v, e)
                    heapq.heappush(heap, (nd, w))
        if best is None:
            raise ResourceError(
                f"no connection between rays {a} and {b} inside horizon {self.horizon}; raise horizon",
                parameter="horizon",
            )
        v = best[1]
        vs, es = [v], []
        while parent[v] is not None:
            v, e = parent[v]
            vs.append(v)
            es.append(e)
        vs.reverse()
        es.reverse()
        # meet ray a only at the start and ray b only at the end
        start = max(i for i, v in enumerate(vs) if v in src)
        vs, es = vs[start:], es[start:]
        stop = min(i for i, v in enumerate(vs) if v in tgt)
        return vs[: stop + 1], es[:stop]

    def splice(
        self, a: EdgeId, b: EdgeId, q_vertices: Sequence[VertexId], q_edges: Sequence[EdgeId]
    ) -> tuple[list[VertexId], list[EdgeId]]:
        """Outer end of a, along ray a to the connection, across, back down ray b."""
        ra, rb = self.rays[a], self.rays[b]
        ia = self._ray_pos[a][q_vertices[0]]
        ib = self._ray_pos[b][q_vertices[-1]]
        vs = list(ra.vertices[1 : ia + 1])
        es = list(ra.edges[1:ia])
        vs.extend(q_vertices[1:])
        es.extend(q_edges)
        vs.extend(reversed(rb.vertices[1:ib]))
        es.extend(reversed(rb.edges[1:ib]))
        return loop_erase(vs, es)

    def position(self, e: EdgeId, v: VertexId) -> int:
        return self._ray_pos[e][v]


def loop_erase(vs: Sequence[VertexId], es: Sequence[EdgeId]) -> tuple[list[VertexId], list[EdgeId]]:
    """Chronological loop erasure of a walk; the result is a path on a subset of its edges."""
    if len(vs) != len(es) + 1:
        raise DomainError("walk needs one more vertex than edges")
    out_v = [vs[0]]
    out_e: list[EdgeId] = []
    where = {vs[0]: 0}
    for e, v in zip(es, vs[1:]):
        if v in where:
            cut = where[v]
            for w in out_v[cut + 1 :]:
                del where[w]
            del out_v[cut + 1 :]
            del out_e[cut:]
        else:
            where[v] = len(out_v)
            out_v.append(v)
            out_e.append(e)
    return out_v, out_e


def end_graph(
    rc: RayCut,
    nodes: Iterable[EdgeId] | None = None,
    *,
    horizon: int | None = None,
    width: int = 2,
    forbidden: Iterable[EdgeId] = (),
    exempt: Iterable[EdgeId] = (),
    window: RayWindow | None = None,
    require_connected: bool = False,
) -> EndGraph:
    """End graph on ``nodes`` (default: all cut edges) certified at (horizon, width).

    Two nodes are adjacent when ``width`` vertex-disjoint paths of T - S join
    their rays while avoiding ``forbidden`` and the rays of the other nodes
    (rays in ``exempt`` may be used).
    """
    if width < 1:
        raise DomainError("width must be >= 1")
    win = window or RayWindow(rc, horizon)
    nodes = tuple(sorted(rc.cut.edges if nodes is None else nodes))
    forbidden = set(forbidden)
    adjacency = set()
    blocked = win.blocked(nodes, forbidden, exempt)
    for a, b in itertools.combinations(nodes, 2):
        if win.width(a, b, blocked, width) >= width:
            adjacency.add((a, b))
    eg = EndGraph(nodes, frozenset(adjacency), win.horizon, width, relaxed=bool(set(exempt)))
    if require_connected and not eg.is_connected():
        raise ResourceError(
            f"end graph on {len(nodes)} nodes is disconnected at horizon {win.horizon}, width {width}; "
            "raise horizon (and depth)",
            parameter="horizon",
        )
    return eg


def connecting_path(
    rc: RayCut,
    e: EdgeId,
    e_prime: EdgeId,
    *,
    active: Iterable[EdgeId] | None = None,
    forbidden: Iterable[EdgeId] = (),
    exempt: Iterable[EdgeId] = (),
    horizon: int | None = None,
    window: RayWindow | None = None,
) -> tuple[list[VertexId], list[EdgeId]]:
    """Connection between ray(e) and ray(e'), spliced into a path in G - S.

    The result runs from the outer end of ``e`` to the outer end of ``e'``,
    avoids ``forbidden`` and the rays of ``active`` edges other than its own
    two (except those in ``exempt``).
    """
    win = window or RayWindow(rc, horizon)
    active = rc.cut.edges if active is None else tuple(active)
    blocked = win.blocked(set(active) | {e, e_prime}, forbidden, exempt)
    qv, qe = win.connect(e, e_prime, blocked)
    return win.splice(e, e_prime, qv, qe)
