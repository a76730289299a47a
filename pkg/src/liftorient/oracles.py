"""Independent oracles and instance builders.

Nothing here calls the flow engine for the quantity it is meant to check:
``brute_liftability_table`` lifts on a plain edge list and then enumerates
every vertex set, so it shares no code path with
:func:`liftorient.lifting.is_k_liftable`.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, ResourceError
from .lifting import LiftClassification, LiftingGraph, Pair, classify, is_k_liftable, lift, lifting_graph, max_independent_set_size
from .multigraph import EdgeId, MultiGraph, VertexId, check_s_k

MAX_BRUTE_VERTICES = 10
MAX_BRUTE_EDGES = 40


# -- exhaustive cut enumeration ------------------------------------------------


def _min_s_free_cut(others: list[VertexId], pairs: list[tuple[VertexId, VertexId]]) -> int:
    """Smallest |delta(X)| over nonempty proper subsets X of ``others``.

    Vertices outside ``others`` (i.e. s) are never in X.  Every cut separating
    two non-s vertices has such a side, so the result is the minimum over
    non-s pairs of the local edge-connectivity (Menger).
    """
    m = len(others)
    if m < 2:
        return 10**9
    pos = {v: i for i, v in enumerate(others)}
    masks = np.arange(1, (1 << m) - 1, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    bits = np.concatenate([bits, np.zeros((len(masks), 1), dtype=bool)], axis=1)
    outside = m
    a = np.array([pos.get(u, outside) for u, _ in pairs], dtype=np.int64)
    b = np.array([pos.get(v, outside) for _, v in pairs], dtype=np.int64)
    if len(pairs) == 0:
        return 0
    sizes = (bits[:, a] != bits[:, b]).sum(axis=1)
    return int(sizes.min())


def _check_budget(g: MultiGraph) -> None:
    if len(g) > MAX_BRUTE_VERTICES or g.num_edges() > MAX_BRUTE_EDGES:
        raise ResourceError(
            f"exhaustive oracle refuses |V|={len(g)}, |E|={g.num_edges()} "
            f"(budget {MAX_BRUTE_VERTICES} vertices, {MAX_BRUTE_EDGES} edges)",
            parameter="budget",
        )


def brute_s_k_connected(g: MultiGraph, s: VertexId, k: int) -> bool:
    _check_budget(g)
    others = [v for v in g.vertices if v != s]
    pairs = [(u, v) for _, u, v in g.edge_triples()]
    return _min_s_free_cut(others, pairs) >= k


def brute_liftability_table(
    g: MultiGraph, s: VertexId, k: int
) -> dict[tuple[EdgeId, EdgeId], bool]:
    """Liftability of every pair at ``s`` by lift-then-enumerate-all-cuts."""
    _check_budget(g)
    others = [v for v in g.vertices if v != s]
    triples = list(g.edge_triples())
    at_s = [e for e, u, v in triples if s in (u, v)]
    table = {}
    for e1, e2 in itertools.combinations(at_s, 2):
        ends = {e: (u, v) for e, u, v in triples}
        v1 = ends[e1][0] if ends[e1][1] == s else ends[e1][1]
        v2 = ends[e2][0] if ends[e2][1] == s else ends[e2][1]
        pairs = [ends[e] for e, _, _ in triples if e not in (e1, e2)]
        if v1 != v2:
            pairs.append((v1, v2))
        table[(e1, e2)] = _min_s_free_cut(others, pairs) >= k
    return table


def brute_edge_disjoint_paths(g: MultiGraph, x: VertexId, y: VertexId, max_paths: int = 5000) -> int:
    """Maximum edge-disjoint x-y path packing by exhaustive search (tiny graphs)."""
    paths: list[frozenset[EdgeId]] = []

    def walk(v: VertexId, seen: set[VertexId], used: list[EdgeId]) -> None:
        if v == y:
            paths.append(frozenset(used))
            if len(paths) > max_paths:
                raise ResourceError("too many simple paths for exhaustive packing", "max_paths")
            return
        for e in g.incident(v):
            w = g.other(e, v)
            if w not in seen:
                seen.add(w)
                used.append(e)
                walk(w, seen, used)
                used.pop()
                seen.discard(w)

    walk(x, {x}, [])
    best = 0

    def pack(start: int, taken: frozenset[EdgeId], count: int) -> None:
        nonlocal best
        best = max(best, count)
        if count + (len(paths) - start) <= best:
            return
        for i in range(start, len(paths)):
            if not (paths[i] & taken):
                pack(i + 1, taken | paths[i], count + 1)

    pack(0, frozenset(), 0)
    return best


# -- Figure-1 family ----------------------------------------------------------


@dataclass(frozen=True)
class ObstructionInstance:
    """An (s,k)-edge-connected graph whose lifting graph is isolated + K_{h,h}."""

    graph: MultiGraph
    s: VertexId
    k: int
    regions: dict[str, tuple[VertexId, ...]]
    edges_at_s: dict[str, tuple[EdgeId, ...]]
    descriptor: dict = field(default_factory=dict)


def _obstruction(k: int, h: int, p: int, q: int, to_c: int | None = None) -> ObstructionInstance:
    s = 0
    L = tuple(range(1, h + 1))
    R = tuple(range(h + 1, 2 * h + 1))
    c, n = 2 * h + 1, 2 * h + 2
    pairs: list[tuple[int, int]] = []
    named: dict[str, list[int]] = {"L": [], "C": [], "R": []}

    def add(u, v, label=None):
        if label:
            named[label].append(len(pairs))
        pairs.append((u, v))

    for v in L:
        add(s, v, "L")
    add(s, c, "C")
    for v in R:
        add(s, v, "R")
    for side in (L, R):
        for a, b in itertools.combinations(side, 2):
            for _ in range(p):
                add(a, b)
        # k - h edges leave each side towards C u N: to_c of them into C
        # (round-robin between C and N when to_c is None)
        if to_c is None:
            targets = itertools.cycle((c, n))
            ends = [next(targets) for _ in range(k - h)]
        else:
            ends = [c] * to_c + [n] * (k - h - to_c)
        for i, t in enumerate(ends):
            add(side[i % h], t)
    for _ in range(q):
        add(c, n)
    g = MultiGraph.from_pairs(pairs)
    return ObstructionInstance(
        g,
        s,
        k,
        {"L": L, "C": (c,), "R": R, "N": (n,)},
        {name: tuple(ids) for name, ids in named.items()},
        {
            "family": "bipartite-obstruction",
            "k": k,
            "side": h,
            "internal_multiplicity": p,
            "c_n_multiplicity": q,
            "side_edges_to_c": to_c,
            "cut_sizes": {"L+C+N": k + 1, "R+C+N": k + 1},
        },
    )


def post_lift_liftable(inst: ObstructionInstance, lg: LiftingGraph | None = None) -> list[tuple[Pair, Pair]]:
    """(lifted pair, still-liftable pair) for every liftable pair of the instance."""
    lg = lg or lifting_graph(inst.graph, inst.s, inst.k)
    out = []
    for a, b in sorted(lg.adjacency):
        after = lift(inst.graph, inst.s, a, b)
        rest = [e for e in lg.nodes if e not in (a, b)]
        for x, y in itertools.combinations(rest, 2):
            if is_k_liftable(after, inst.s, x, y, inst.k):
                out.append(((a, b), (x, y)))
    return out


def build_bipartite_obstruction(k: int, h: int = 2, *, blocked_after_lift: bool | None = None) -> ObstructionInstance:
    """Generalised Figure-1 graph: deg(s) = 2h+1, regions L, C, R, N.

    s sends h edges into L, one into C and h into R; L and R each send k-h
    edges into C u N and none to each other, so delta(L u C u N) and
    delta(R u C u N) both have size k+1.  Internal multiplicities and the
    split of the side edges between C and N are the first (in a fixed search
    order) that make the graph (s,k)-edge-connected with the intended lifting
    graph.  With ``blocked_after_lift`` (default for h = 2) the instance must
    also leave every remaining pair non-liftable after any liftable lift; the
    cross pair is only blocked when deg(C) = k.  Choices go in ``descriptor``.
    """
    if k % 2:
        raise DomainError("the obstruction family is built for even k")
    if h < 1:
        raise DomainError("side size must be positive")
    if k - h < 0 or 1 + 2 * (k - h) < k:
        raise DomainError(
            f"no realisation for k={k}, side {h}: delta(C u N) = 1 + 2(k-h) = {1 + 2 * (k - h)} < k, "
            "so the graph cannot be (s,k)-edge-connected"
        )
    strict = (h == 2) if blocked_after_lift is None else blocked_after_lift
    for to_c in [None] + list(range(k - h + 1)):
        for p in range(1, k + 1):
            for q in range(1, k + 1):
                inst = _obstruction(k, h, p, q, to_c)
                if not check_s_k(inst.graph, inst.s, k).ok:
                    continue
                lg = lifting_graph(inst.graph, inst.s, k)
                cls = classify(lg)
                if cls.variant != "IsolatedPlusBalancedBipartite" or cls.isolated != inst.edges_at_s["C"][0]:
                    continue
                if strict and post_lift_liftable(inst, lg):
                    continue
                return inst
    raise DomainError(f"no multiplicities up to {k} realise the obstruction for k={k}, side {h}")


def build_figure1(k: int) -> ObstructionInstance:
    """The deg(s)=5 instance: isolated middle edge plus K_{2,2}."""
    if k % 2 or k < 2:
        raise DomainError("build_figure1 needs an even k >= 2")
    return build_bipartite_obstruction(k, 2)


# -- random corpora -----------------------------------------------------------


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    seed: int
    n: int
    k: int
    deg_s: int

    @property
    def ident(self) -> str:
        return f"{self.family}-s{self.seed}-n{self.n}-k{self.k}-d{self.deg_s}"


def _build_random(rng: random.Random, n: int, k: int, deg_s: int, max_edges: int) -> MultiGraph | None:
    s = 0
    others = list(range(1, n))
    pairs = [(s, rng.choice(others)) for _ in range(deg_s)]
    g = MultiGraph.from_pairs(pairs, range(n))
    while not check_s_k(g, s, k).ok:
        if g.num_edges() >= max_edges:
            return None
        u, v = rng.sample(others, 2)
        g, _ = g.with_edge(u, v)
    # prune redundant non-s edges so tight sets (and thus structure) survive
    removable = [e for e, u, v in g.edge_triples() if s not in (u, v)]
    rng.shuffle(removable)
    for e in removable:
        h = g.without_edges([e])
        if check_s_k(h, s, k).ok:
            g = h
    extra = rng.randint(0, 2)
    for _ in range(extra):
        if g.num_edges() >= max_edges:
            break
        u, v = rng.sample(others, 2)
        g, _ = g.with_edge(u, v)
    return MultiGraph.from_pairs([(u, v) for _, u, v in g.edge_triples()], range(n))


def random_sk_instance(
    seed: int, n: int, k: int, deg_s: int, *, budget: int = 200, max_edges: int = MAX_BRUTE_EDGES
) -> tuple[MultiGraph, VertexId]:
    """Seed-reproducible (s,k)-edge-connected multigraph with s = 0 of degree ``deg_s``."""
    if n < 3:
        raise DomainError("need at least three vertices")
    if k < 1 or deg_s < 1:
        raise DomainError("k and deg_s must be positive")
    if deg_s < k:
        raise ResourceError(
            f"rejection budget exhausted: deg_s={deg_s} < k={k} is infeasible for this family",
            parameter="deg_s",
        )
    rng = random.Random(f"sk:{seed}:{n}:{k}:{deg_s}")
    for _ in range(budget):
        g = _build_random(rng, n, k, deg_s, max_edges)
        if g is not None:
            return g, 0
    raise ResourceError(f"rejection budget {budget} exhausted", parameter="budget")


def eulerian_random(
    seed: int, n: int, k: int, deg_s: int, *, budget: int = 200, max_edges: int = MAX_BRUTE_EDGES
) -> tuple[MultiGraph, VertexId]:
    """Random (s,k)-edge-connected multigraph in which every degree is even."""
    if deg_s % 2:
        raise DomainError("an Eulerian instance needs even deg_s")
    rng = random.Random(f"euler:{seed}:{n}:{k}:{deg_s}")
    for attempt in range(budget):
        g, s = random_sk_instance(rng.randrange(1 << 30), n, k, deg_s, budget=budget, max_edges=max_edges)
        odd = [v for v in g.vertices if g.degree(v) % 2]
        rng.shuffle(odd)
        for u, v in zip(odd[::2], odd[1::2]):
            g, _ = g.with_edge(u, v)
        if g.num_edges() <= max_edges and all(g.degree(v) % 2 == 0 for v in g.vertices):
            return MultiGraph.from_pairs([(u, v) for _, u, v in g.edge_triples()], range(n)), s
    raise ResourceError(f"rejection budget {budget} exhausted", parameter="budget")


def corpus_specs(family: str, seed: int, count: int, ks: Iterable[int] = (2, 4),
                 degrees: Iterable[int] = (4, 5, 6, 7), n_range: tuple[int, int] = (5, 10)) -> list[InstanceSpec]:
    rng = random.Random(f"corpus:{family}:{seed}")
    ks = list(ks)
    degrees = list(degrees)
    if family == "eulerian":
        degrees = [d for d in degrees if d % 2 == 0] or [4]
    specs = []
    for i in range(count):
        specs.append(
            InstanceSpec(family, rng.randrange(1 << 30), rng.randint(*n_range), rng.choice(ks), rng.choice(degrees))
        )
    return specs


def build_instance(spec: InstanceSpec) -> tuple[MultiGraph, VertexId]:
    if spec.family == "random_sk":
        return random_sk_instance(spec.seed, spec.n, spec.k, spec.deg_s)
    if spec.family == "eulerian":
        return eulerian_random(spec.seed, spec.n, spec.k, spec.deg_s)
    if spec.family == "figure1":
        inst = build_figure1(spec.k)
        return inst.graph, inst.s
    raise DomainError(f"unknown family {spec.family!r}")


@dataclass(frozen=True)
class CorpusRow:
    ident: str
    n: int
    deg_s: int
    k: int
    classification: str
    agreement: bool
    max_independent: int

    def as_dict(self) -> dict:
        return {
            "instance": self.ident,
            "n": self.n,
            "deg_s": self.deg_s,
            "k": self.k,
            "classification": self.classification,
            "agreement": self.agreement,
            "max_independent": self.max_independent,
        }


def analyse_instance(spec: InstanceSpec) -> CorpusRow:
    g, s = build_instance(spec)
    lg = lifting_graph(g, s, spec.k)
    cls: LiftClassification = classify(lg)
    table = brute_liftability_table(g, s, spec.k)
    agreement = all(lg.adjacent(a, b) == ok for (a, b), ok in table.items())
    return CorpusRow(spec.ident, len(g), g.degree(s), spec.k, cls.variant, agreement,
                     max_independent_set_size(lg))
