"""The lifting sequence over the rays of a ray cut.

Given a finite S whose cut edges start edge-disjoint rays, contract G - S to
a vertex s and lift the cut edges in pairs.  Every pair is k-liftable in the
current graph, and every pair is linked by a path of G - S that avoids the
earlier linking paths and the rays of the edges not yet paired.  For an odd
cut the last three edges form a residual tripod: a vertex w of G - S with
edge-disjoint paths W, W*, W' to the outer ends of the three edges.

Liftability is decided exactly on ``G/(G-S)`` (a finite graph).  The end
graph is certified on a finite window; see :mod:`liftorient.infinite`.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError, InvariantViolation, ResourceError
from .infinite import EndGraph, LocallyFiniteGraph, RayCut, RayWindow, end_graph, loop_erase
from .lifting import LiftingGraph, _liftable_fast, classify, lift, lifting_graph
from .multigraph import EdgeId, MultiGraph, VertexId, check_s_k, is_s_k_edge_connected

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LiftStep:
    index: int
    pair: tuple[EdgeId, EdgeId]
    lifted_edge: EdgeId | None
    path_vertices: tuple[VertexId, ...]
    path_edges: tuple[EdgeId, ...]
    case: str
    relaxed: bool = False

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "pair": list(self.pair),
            "lifted_edge": self.lifted_edge,
            "path_vertices": list(self.path_vertices),
            "path_edges": list(self.path_edges),
            "case": self.case,
            "relaxed": self.relaxed,
        }


@dataclass(frozen=True)
class ResidualTriple:
    """Paths W, W*, W' from w to the outer ends of e, e*, e'."""

    edges: tuple[EdgeId, EdgeId, EdgeId]
    w: VertexId
    paths: tuple[tuple[tuple[VertexId, ...], tuple[EdgeId, ...]], ...]

    @property
    def e(self) -> EdgeId:
        return self.edges[0]

    @property
    def e_star(self) -> EdgeId:
        return self.edges[1]

    @property
    def e_prime(self) -> EdgeId:
        return self.edges[2]

    def path_edges(self) -> set[EdgeId]:
        return {x for _, es in self.paths for x in es}

    def to_json(self) -> dict:
        names = ("W", "W*", "W'")
        return {
            "edges": list(self.edges),
            "w": self.w,
            "paths": {
                n: {"vertices": list(vs), "edges": list(es)} for n, (vs, es) in zip(names, self.paths)
            },
        }


@dataclass(frozen=True)
class LiftSequenceResult:
    steps: tuple[LiftStep, ...]
    initial: MultiGraph
    final: MultiGraph
    s: VertexId
    k: int
    residual: ResidualTriple | None
    raycut: RayCut = field(repr=False)
    horizon: int = 0
    width: int = 0
    log: tuple[str, ...] = ()

    def to_json(self) -> dict:
        rc = self.raycut
        return {
            "k": self.k,
            "S": sorted(rc.s_set),
            "cut": list(rc.cut.edges),
            "depth": rc.depth,
            "horizon": self.horizon,
            "width": self.width,
            "rays": [r.to_json() for r in rc.rays],
            "steps": [st.to_json() for st in self.steps],
            "residual": self.residual.to_json() if self.residual else None,
            "final_degree_s": self.final.degree(self.s),
            "log": list(self.log),
        }


def contracted_graph(g_inf: LocallyFiniteGraph, s_set: Iterable[VertexId]) -> tuple[MultiGraph, VertexId]:
    """``G/(G-S)`` for a finite S: G[S] plus one vertex s carrying delta(S).

    Exact, because G - S is connected for a 1-ended graph with the finite
    components of G - S absorbed into S (which :func:`find_ray_cut` does).
    Fresh ids start above every id in the 1-neighbourhood of S.
    """
    s_set = set(s_set)
    triples = []
    seen: set[EdgeId] = set()
    top_v, top_e = max(s_set), 0
    for v in sorted(s_set):
        for w, e in g_inf.neighbors(v):
            top_v = max(top_v, w)
            top_e = max(top_e, e)
            if e in seen:
                continue
            seen.add(e)
            triples.append((e, v, w))
    s = top_v + 1
    edges = [(e, v, w if w in s_set else s) for e, v, w in triples]
    return MultiGraph(sorted(s_set) + [s], edges, next_vertex=s + 1, next_edge=top_e + 1), s


def choose_pair_case1(
    lg: LiftingGraph, eg: EndGraph, order: Sequence[tuple[EdgeId, EdgeId]] | None = None
) -> tuple[EdgeId, EdgeId] | None:
    """First pair adjacent in both graphs; lexicographic unless ``order`` is given."""
    candidates = order if order is not None else sorted(eg.adjacency)
    for a, b in candidates:
        if eg.adjacent(a, b) and lg.adjacent(a, b):
            return (min(a, b), max(a, b))
    return None


class _Run:
    def __init__(self, rc: RayCut, k: int, width: int, horizon: int | None, jobs: int):
        self.rc = rc
        self.k = k
        self.width = width
        self.win = RayWindow(rc, horizon)
        self.jobs = jobs
        self.g, self.s = contracted_graph(rc.g_inf, rc.s_set)
        self.initial = self.g
        self.remaining: list[EdgeId] = sorted(rc.cut.edges)
        self.forbidden: set[EdgeId] = set()
        self.exempt: frozenset[EdgeId] = frozenset()
        self.steps: list[LiftStep] = []
        self.residual: ResidualTriple | None = None
        self.star: EdgeId | None = None
        self.log: list[str] = []

    # -- helpers ---------------------------------------------------------------

    def by_proximity(self, pairs: Iterable[tuple[EdgeId, EdgeId]]) -> list[tuple[EdgeId, EdgeId]]:
        return sorted(pairs, key=lambda p: (self.win.outer_distance(*p), p))

    def e_adjacent(self, a: EdgeId, b: EdgeId, nodes: Sequence[EdgeId]) -> bool:
        blocked = self.win.blocked(nodes, self.forbidden, self.exempt)
        return self.win.width(a, b, blocked, self.width) >= self.width

    def path(self, a: EdgeId, b: EdgeId, nodes: Sequence[EdgeId], extra: Iterable[EdgeId] = ()):
        blocked = self.win.blocked(set(nodes) | {a, b}, self.forbidden | set(extra), self.exempt)
        qv, qe = self.win.connect(a, b, blocked)
        return qv, qe

    def do_lift(self, a: EdgeId, b: EdgeId, case: str) -> None:
        if not _liftable_fast(self.g, self.s, a, b, self.k).ok:
            raise InvariantViolation(f"chosen pair ({a}, {b}) is not {self.k}-liftable")
        qv, qe = self.path(a, b, self.remaining)
        pv, pe = self.win.splice(a, b, qv, qe)
        nxt = lift(self.g, self.s, a, b)
        new = [e for e in nxt.edges if not self.g.has_edge(e)]
        self.g = nxt
        self.remaining = [e for e in self.remaining if e not in (a, b)]
        self.forbidden |= set(pe)
        step = LiftStep(len(self.steps) + 1, (a, b), new[0] if new else None, tuple(pv), tuple(pe), case,
                        relaxed=bool(self.exempt))
        self.steps.append(step)
        self.log.append(f"step {step.index}: {case} lift {a},{b}")

    # -- the case split ----------------------------------------------------------

    def step(self) -> bool:
        n = len(self.remaining)
        if n == 0:
            return False
        if n == 2:
            a, b = self.remaining
            self.do_lift(a, b, "case2-continue" if self.residual else "unique")
            return True
        if n == 3:
            self.tripod_from_end_graph()
            return False
        if self.residual is not None:
            self.continue_after_case2()
            return True
        for a, b in self.by_proximity(itertools.combinations(self.remaining, 2)):
            if self.e_adjacent(a, b, self.remaining) and _liftable_fast(self.g, self.s, a, b, self.k).ok:
                self.do_lift(a, b, "case1")
                return True
        lg = lifting_graph(self.g, self.s, self.k, jobs=self.jobs)
        cls = classify(lg)
        eg = end_graph(self.rc, self.remaining, width=self.width, forbidden=self.forbidden,
                       window=self.win, require_connected=True)
        if cls.variant != "IsolatedPlusBalancedBipartite":
            raise InvariantViolation(
                f"no pair adjacent in both the end graph and the lifting graph, but the lifting graph "
                f"is {cls.variant} ({cls.diagnostic or 'complement disconnected'}) on a connected end graph"
            )
        self.handle_case2(lg, eg, cls)
        return True

    def handle_case2(self, lg: LiftingGraph, eg: EndGraph, cls) -> None:
        star = cls.isolated
        nbrs = eg.neighbors(star)
        side_a = [x for x in nbrs if x in cls.side_a]
        side_b = [x for x in nbrs if x in cls.side_b]
        if not side_a or not side_b:
            raise ResourceError(
                f"isolated edge {star} lacks end-graph neighbours on both sides at horizon {self.win.horizon}",
                parameter="horizon",
            )
        e = min(side_a, key=lambda x: (self.win.outer_distance(star, x), x))
        e_prime = min(side_b, key=lambda x: (self.win.outer_distance(star, x), x))
        self.residual = self.build_tripod(e, star, e_prime)
        self.star = star
        self.exempt = frozenset((e, star, e_prime))
        self.forbidden |= self.residual.path_edges()
        self.remaining = [x for x in self.remaining if x not in self.exempt]
        self.log.append(f"case2: residual ({e}, {star}, {e_prime}) at w={self.residual.w}")

    def build_tripod(self, e: EdgeId, star: EdgeId, e_prime: EdgeId) -> ResidualTriple:
        nodes = self.remaining
        qv, qe = self.path(e, star, nodes)
        qv2, qe2 = self.path(star, e_prime, nodes, extra=qe)
        win = self.win
        i1 = win.position(star, qv[-1])
        i2 = win.position(star, qv2[0])
        if (i2, qv2[0]) < (i1, qv[-1]):
            # the e'-side connection meets R* closer to S: swap the roles of e and e'
            e, e_prime = e_prime, e
            qv, qe, qv2, qe2 = list(reversed(qv2)), list(reversed(qe2)), list(reversed(qv)), list(reversed(qe))
            i1, i2 = i2, i1
        ray_e, ray_s, ray_p = win.rays[e], win.rays[star], win.rays[e_prime]
        w = ray_s.vertices[i1]
        # W: w back along the P-connection, then down ray(e)
        ie = win.position(e, qv[0])
        wv = list(reversed(qv)) + list(reversed(ray_e.vertices[1:ie]))
        we = list(reversed(qe)) + list(reversed(ray_e.edges[1:ie]))
        # W*: ray(e*) from w down to its outer end
        sv = list(reversed(ray_s.vertices[1 : i1 + 1]))
        se = list(reversed(ray_s.edges[1:i1]))
        # W': along ray(e*) out to w', across, down ray(e')
        ip = win.position(e_prime, qv2[-1])
        pv = list(ray_s.vertices[i1 : i2 + 1]) + list(qv2[1:]) + list(reversed(ray_p.vertices[1:ip]))
        pe = list(ray_s.edges[i1:i2]) + list(qe2) + list(reversed(ray_p.edges[1:ip]))
        paths = tuple(tuple(map(tuple, loop_erase(v, x))) for v, x in ((wv, we), (sv, se), (pv, pe)))
        return ResidualTriple((e, star, e_prime), w, paths)

    def tripod_from_end_graph(self) -> None:
        eg = end_graph(self.rc, self.remaining, width=self.width, forbidden=self.forbidden,
                       exempt=self.exempt, window=self.win, require_connected=True)
        degree = {x: len(eg.neighbors(x)) for x in eg.nodes}
        star = max(eg.nodes, key=lambda x: (degree[x], -x))
        e, e_prime = [x for x in eg.nodes if x != star]
        self.residual = self.build_tripod(e, star, e_prime)
        self.star = star
        self.forbidden |= self.residual.path_edges()
        self.remaining = []
        self.log.append(f"tripod: residual ({self.residual.edges}) at w={self.residual.w}")

    def continue_after_case2(self) -> None:
        lg = lifting_graph(self.g, self.s, self.k, jobs=self.jobs)
        if lg.neighbors(self.star):
            raise InvariantViolation(f"isolated edge {self.star} gained a liftable partner")
        cls = classify(lg)
        if cls.variant != "IsolatedPlusBalancedBipartite" or cls.isolated != self.star:
            raise InvariantViolation(f"bipartite structure lost after Case 2: {cls.variant} {cls.diagnostic}")
        rest = set(self.remaining)
        side_a = [x for x in cls.side_a if x in rest]
        side_b = [x for x in cls.side_b if x in rest]
        cross = [(min(a, b), max(a, b)) for a in side_a for b in side_b]
        for a, b in self.by_proximity(cross):
            if self.e_adjacent(a, b, self.remaining):
                self.do_lift(a, b, "case2-continue")
                return
        raise ResourceError(
            f"relaxed end graph has no cross-side edge among {len(self.remaining)} edges at horizon "
            f"{self.win.horizon}; raise horizon",
            parameter="horizon",
        )


def run_lifting_sequence(
    rc: RayCut,
    k: int,
    *,
    width: int = 2,
    horizon: int | None = None,
    jobs: int = 1,
) -> LiftSequenceResult:
    """Pair up the cut edges of ``rc`` by k-liftable lifts with linking paths."""
    if k < 2 or k % 2:
        raise DomainError("the lifting sequence needs an even k >= 2")
    run = _Run(rc, k, width, horizon, jobs)
    pre = check_s_k(run.g, run.s, k)
    if not pre.ok:
        raise DomainError(
            f"G/(G-S) is not (s,{k})-edge-connected: pair {pre.violating_pair} has {pre.flow} paths; "
            f"G is not {k}-edge-connected around S"
        )
    while run.step():
        pass
    return LiftSequenceResult(
        tuple(run.steps), run.initial, run.g, run.s, k, run.residual, rc, run.win.horizon, width, tuple(run.log)
    )


# -- verification ------------------------------------------------------------------


def _check_path(g_inf: LocallyFiniteGraph, vs, es, start, end, s_set, label, out: list[str]) -> None:
    if not vs:
        out.append(f"{label}: empty vertex list")
        return
    if vs[0] != start or vs[-1] != end:
        out.append(f"{label}: runs {vs[0]}..{vs[-1]}, expected {start}..{end}")
    if len(set(vs)) != len(vs):
        out.append(f"{label}: repeats a vertex")
    if len(vs) != len(es) + 1:
        out.append(f"{label}: {len(vs)} vertices for {len(es)} edges")
        return
    for a, b, e in zip(vs, vs[1:], es):
        if set(g_inf.edge_ends(e)) != {a, b}:
            out.append(f"{label}: edge {e} does not join {a} and {b}")
    inside = [v for v in vs if v in s_set]
    if inside:
        out.append(f"{label}: enters S at {inside[:3]}")


@dataclass(frozen=True)
class SequenceReport:
    violations: tuple[str, ...]
    steps_checked: int
    residual_checked: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_lift_sequence(g_inf: LocallyFiniteGraph, result: LiftSequenceResult, k: int | None = None) -> SequenceReport:
    """Re-check the lifting conditions from scratch (fresh graph, fresh oracle)."""
    k = result.k if k is None else k
    rc = result.raycut
    out: list[str] = []
    g, s = contracted_graph(g_inf, rc.s_set)
    rays = rc.rays.by_edge()
    cut = set(g.incident(s))
    if cut != set(rc.cut.edges):
        out.append("cut edges of the contraction differ from the recorded cut")
    for e, r in rays.items():
        if len(set(r.vertices)) != len(r.vertices):
            out.append(f"ray {e} repeats a vertex")
        if r.edges[0] != e:
            out.append(f"ray {e} does not start with its cut edge")
    for a, b, e in rc.rays.overlaps():
        out.append(f"rays {a} and {b} share edge {e}")
    if not is_s_k_edge_connected(g, s, k).ok:
        out.append(f"G/(G-S) is not (s,{k})-edge-connected")

    survived = set(cut)
    used: dict[EdgeId, str] = {}
    exempt: set[EdgeId] = set(result.residual.edges) if result.residual else set()
    for st in result.steps:
        a, b = st.pair
        label = f"step {st.index}"
        if a not in survived or b not in survived:
            out.append(f"{label}: pair ({a}, {b}) not among the unpaired cut edges")
            continue
        nxt = lift(g, s, a, b)
        rep = is_s_k_edge_connected(nxt, s, k)
        if not rep.ok:
            out.append(f"{label}: pair ({a}, {b}) is not {k}-liftable (pair {rep.violating_pair} has {rep.flow})")
        g = nxt
        survived -= {a, b}
        _check_path(g_inf, st.path_vertices, st.path_edges, rays[a].outer, rays[b].outer, rc.s_set, label, out)
        for e in st.path_edges:
            if e in used:
                out.append(f"{label}: path shares edge {e} with {used[e]}")
            used[e] = label
        for x in sorted(survived):
            if st.relaxed and x in exempt:
                continue
            common = set(st.path_edges) & set(rays[x].edges)
            if common:
                out.append(f"{label}: path uses edge {min(common)} of the unpaired ray {x}")
    res = result.residual
    if res is not None:
        if set(res.edges) != survived:
            out.append(f"residual edges {res.edges} differ from the unpaired edges {sorted(survived)}")
        for name, x, (vs, es) in zip(("W", "W*", "W'"), res.edges, res.paths):
            _check_path(g_inf, vs, es, res.w, rays[x].outer, rc.s_set, name, out)
            for e in es:
                if e in used:
                    out.append(f"{name}: shares edge {e} with {used[e]}")
                used[e] = name
        if res.w in rc.s_set:
            out.append("w lies in S")
    elif survived:
        out.append(f"{len(survived)} cut edges left unpaired without a residual")
    deg = g.degree(s)
    expected = 3 if len(cut) % 2 else 0
    if deg != expected:
        out.append(f"final degree of s is {deg}, expected {expected}")
    if len(result.steps) != (len(cut) - expected) // 2:
        out.append(f"{len(result.steps)} steps for a cut of size {len(cut)}")
    if g != result.final:
        out.append("replayed final graph differs from the recorded one")
    return SequenceReport(tuple(out), len(result.steps), res is not None)
