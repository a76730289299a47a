"""Immersion of a finite (2k-1)-edge-connected graph around a finite vertex set.

Run the lifting sequence at connectivity 2k on a ray cut S of A.  The last
graph G* has deg(s) <= 3, so G' = G* - s is (2k-1)-edge-connected on S.
Each lifted edge of G' is realised in G by its two cut-edge stubs joined by
the linking path of its step; every other edge of G' is an edge of G.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DomainError
from .infinite import LocallyFiniteGraph, check_edge_connectivity, distances, find_ray_cut, induced_graph
from .multigraph import EdgeId, MultiGraph, VertexId, edge_connectivity, is_k_edge_connected
from .sequence import LiftSequenceResult, ResidualTriple, run_lifting_sequence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HostPath:
    vertices: tuple[VertexId, ...]
    edges: tuple[EdgeId, ...]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": list(self.edges)}


@dataclass(frozen=True)
class Immersion:
    host: MultiGraph
    pattern: MultiGraph
    phi: dict[VertexId, VertexId]
    theta: dict[EdgeId, HostPath]
    a_set: frozenset[VertexId] = frozenset()
    residual: ResidualTriple | None = None
    sequence: LiftSequenceResult | None = field(default=None, repr=False)
    radius: int = 0

    @property
    def branch_set(self) -> frozenset[VertexId]:
        return frozenset(self.phi.values())

    def to_json(self) -> dict:
        return {
            "phi": {str(k): v for k, v in sorted(self.phi.items())},
            "theta": {str(e): p.to_json() for e, p in sorted(self.theta.items())},
            "pattern": [[e, u, v] for e, u, v in self.pattern.edge_triples()],
            "pattern_vertices": list(self.pattern.vertices),
            "host": [[e, u, v] for e, u, v in self.host.edge_triples()],
            "a_set": sorted(self.a_set),
            "residual": self.residual.to_json() if self.residual else None,
            "host_radius": self.radius,
        }


@dataclass(frozen=True)
class ImmersionReport:
    target: int
    connectivity: int | None
    condition_paths: bool
    condition_branch: bool
    condition_disjoint: bool
    a_edges_preserved: bool
    violations: tuple[str, ...]
    stats: dict

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "target_connectivity": self.target,
            "pattern_connectivity": self.connectivity,
            "condition_1_paths": self.condition_paths,
            "condition_2_branch_vertices": self.condition_branch,
            "condition_3_edge_disjoint": self.condition_disjoint,
            "a_edges_preserved": self.a_edges_preserved,
            "violations": list(self.violations),
            "stats": self.stats,
        }


@dataclass(frozen=True)
class ImmersionParams:
    depth: int = 6
    radius: int = 0
    width: int = 2
    horizon: int | None = None
    jobs: int = 1
    check_radius: int | None = None


def build_immersion(
    g_inf: LocallyFiniteGraph,
    a_set: Iterable[VertexId],
    k: int,
    params: ImmersionParams | None = None,
) -> tuple[Immersion, ImmersionReport]:
    """Immerse a (2k-1)-edge-connected pattern on S containing ``a_set``."""
    if k < 1:
        raise DomainError("k must be positive")
    p = params or ImmersionParams()
    a = frozenset(a_set)
    if p.check_radius is not None:
        ok, pair = check_edge_connectivity(g_inf, a, p.check_radius, 2 * k)
        if not ok:
            raise DomainError(f"G is not {2 * k}-edge-connected on the window (pair {pair})")
    rc = find_ray_cut(g_inf, a, p.depth, radius=p.radius)
    seq = run_lifting_sequence(rc, 2 * k, width=p.width, horizon=p.horizon, jobs=p.jobs)
    imm = immersion_from_sequence(g_inf, seq, a)
    return imm, verify_immersion(imm, k, a)


def immersion_from_sequence(
    g_inf: LocallyFiniteGraph, seq: LiftSequenceResult, a_set: Iterable[VertexId] = ()
) -> Immersion:
    rc = seq.raycut
    s_set = rc.s_set
    pattern = seq.final.without_vertex(seq.s)
    rays = rc.rays.by_edge()
    theta: dict[EdgeId, HostPath] = {}
    from_step = {st.lifted_edge: st for st in seq.steps if st.lifted_edge is not None}
    for e, u, v in pattern.edge_triples():
        st = from_step.get(e)
        if st is None:
            theta[e] = HostPath((u, v), (e,))
            continue
        a, b = st.pair
        vs = (rays[a].inner,) + st.path_vertices + (rays[b].inner,)
        es = (a,) + st.path_edges + (b,)
        theta[e] = HostPath(vs, es)
    touched = set(s_set)
    for hp in theta.values():
        touched.update(hp.vertices)
    if seq.residual:
        for vs, _ in seq.residual.paths:
            touched.update(vs)
    dist = distances(g_inf, s_set, max(rc.depth, 1) + 1)
    radius = max(dist.get(v, rc.depth) for v in touched) + 1
    host = induced_graph(g_inf, distances(g_inf, s_set, radius))
    phi = {v: v for v in pattern.vertices}
    return Immersion(host, pattern, phi, theta, frozenset(a_set), seq.residual, seq, radius)


def verify_immersion(imm: Immersion, k: int, a_set: Iterable[VertexId] | None = None) -> ImmersionReport:
    """Re-check the immersion conditions, the pattern connectivity and the A-edges."""
    a = imm.a_set if a_set is None else frozenset(a_set)
    out: list[str] = []
    host, pattern = imm.host, imm.pattern
    phi = imm.phi
    c1 = c2 = c3 = True

    images = list(phi.values())
    if len(set(images)) != len(images):
        out.append("phi is not injective")
        c1 = False
    for v in pattern.vertices:
        if v not in phi or phi[v] not in host:
            out.append(f"phi({v}) missing from host")
            c1 = False
    if set(imm.theta) != set(pattern.edges):
        out.append("theta does not cover exactly the pattern edges")
        c1 = False
    branch = set(images)
    owner: dict[EdgeId, EdgeId] = {}
    for pe, hp in sorted(imm.theta.items()):
        if not pattern.has_edge(pe):
            continue
        u, v = pattern.ends(pe)
        vs, es = hp.vertices, hp.edges
        if len(vs) != len(es) + 1 or not es:
            out.append(f"theta({pe}) is malformed")
            c1 = False
            continue
        if {vs[0], vs[-1]} != {phi.get(u), phi.get(v)}:
            out.append(f"theta({pe}) runs {vs[0]}..{vs[-1]}, expected phi({u})..phi({v})")
            c1 = False
        if len(set(vs)) != len(vs):
            out.append(f"theta({pe}) repeats a vertex")
            c1 = False
        for x, y, e in zip(vs, vs[1:], es):
            if not host.has_edge(e) or set(host.ends(e)) != {x, y}:
                out.append(f"theta({pe}) uses {e}, which is not a host edge {x}-{y}")
                c1 = False
        interior = [x for x in vs[1:-1] if x in branch]
        if interior:
            out.append(f"branch vertex {interior[0]} is interior to theta({pe})")
            c2 = False
        for e in es:
            if e in owner:
                out.append(f"theta({pe}) and theta({owner[e]}) share host edge {e}")
                c3 = False
            owner[e] = pe

    target = 2 * k - 1
    conn = None
    if len(pattern) >= 2:
        rep = is_k_edge_connected(pattern, target)
        conn = edge_connectivity(pattern)
        if not rep.ok:
            out.append(f"pattern is not {target}-edge-connected: pair {rep.violating_pair} has {rep.flow}")

    preserved = True
    for v in sorted(a):
        if v not in host:
            continue
        for e in host.incident(v):
            w = host.other(e, v)
            if w in a and w > v:
                hp = imm.theta.get(e)
                if not pattern.has_edge(e) or hp is None or hp.edges != (e,):
                    out.append(f"A-edge {e} ({v}-{w}) is not an edge of the pattern and of H")
                    preserved = False
    lengths = [len(hp.edges) for hp in imm.theta.values()]
    stats = {
        "pattern_vertices": len(pattern),
        "pattern_edges": pattern.num_edges(),
        "host_vertices": len(host),
        "host_edges": host.num_edges(),
        "lifted_edges": sum(1 for x in lengths if x > 1),
        "max_path_length": max(lengths, default=0),
        "host_radius": imm.radius,
    }
    return ImmersionReport(target, conn, c1, c2, c3, preserved, tuple(out), stats)


def identity_immersion(g: MultiGraph) -> Immersion:
    """The finite graph immersed in itself by single-edge paths."""
    theta = {e: HostPath((u, v), (e,)) for e, u, v in g.edge_triples()}
    return Immersion(g, g, {v: v for v in g.vertices}, theta)


def branch_overlay(imm: Immersion) -> str:
    """DOT rendering of the host with branch vertices filled and theta-paths coloured."""
    from .multigraph import to_dot

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"]
    colours = {}
    for i, (pe, hp) in enumerate(sorted(imm.theta.items())):
        for e in hp.edges:
            colours[e] = palette[i % len(palette)]
    return to_dot(imm.host, name="immersion", highlight=imm.branch_set, edge_colors=colours)


__all__ = [
    "HostPath",
    "Immersion",
    "ImmersionParams",
    "ImmersionReport",
    "branch_overlay",
    "build_immersion",
    "identity_immersion",
    "immersion_from_sequence",
    "verify_immersion",
]
