import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftorient.errors import DomainError, ResourceError
from liftorient.lifting import (
    LiftingGraph,
    classify,
    is_k_liftable,
    lift,
    lifting_graph,
    max_independent_set_size,
)
from liftorient.multigraph import MultiGraph, is_s_k_edge_connected
from liftorient.oracles import brute_liftability_table, build_figure1, random_sk_instance


def test_lift_triangle_adds_parallel_edge():
    g = MultiGraph.from_pairs([(0, 1), (0, 2), (1, 2)])
    h = lift(g, 0, 0, 1)
    assert h.degree(0) == 0
    assert len(h.edges_between(1, 2)) == 2
    new = [e for e in h.edges if e not in g.edges]
    assert h.lifted_from[new[0]] == (0, 1)


def test_lift_parallel_pair_adds_nothing():
    g = MultiGraph.from_pairs([(0, 1), (0, 1), (1, 2)])
    h = lift(g, 0, 0, 1)
    assert h.num_edges() == 1 and h.degree(0) == 0


def test_lift_rejects_edge_not_at_s():
    g = MultiGraph.from_pairs([(0, 1), (0, 2), (1, 2)])
    with pytest.raises(DomainError):
        lift(g, 0, 0, 2)
    with pytest.raises(DomainError):
        lift(g, 0, 0, 0)


def test_unique_pair_is_liftable():
    # s of degree 2 in a doubled triangle plus s
    g = MultiGraph.from_pairs([(0, 1), (0, 2), (1, 2), (1, 2)])
    assert is_k_liftable(g, 0, 0, 1, 2)
    lg = lifting_graph(g, 0, 2)
    assert lg.adjacency == frozenset({(0, 1)})


def test_liftability_precondition_checked():
    g = MultiGraph.from_pairs([(0, 1), (0, 2), (1, 3), (2, 3)])
    with pytest.raises(DomainError):
        is_k_liftable(g, 0, 0, 1, 3)


@pytest.fixture(scope="module")
def fig4():
    inst = build_figure1(4)
    return inst, lifting_graph(inst.graph, inst.s, 4)


def test_figure1_cross_pairs_liftable_same_side_not(fig4):
    inst, _ = fig4
    L, C, R = (inst.edges_at_s[x] for x in "LCR")
    for a in L:
        for b in R:
            assert is_k_liftable(inst.graph, inst.s, a, b, 4)
    assert not is_k_liftable(inst.graph, inst.s, R[0], R[1], 4)
    assert not is_k_liftable(inst.graph, inst.s, L[0], C[0], 4)


def test_figure1_lifting_graph_shape(fig4):
    inst, lg = fig4
    L, C, R = (inst.edges_at_s[x] for x in "LCR")
    assert lg.adjacency == frozenset(tuple(sorted(p)) for p in itertools.product(L, R))
    cls = classify(lg)
    assert cls.variant == "IsolatedPlusBalancedBipartite" and cls.isolated == C[0]
    assert max_independent_set_size(lg) == 3


def test_figure1_after_lift_nothing_liftable(fig4):
    inst, _ = fig4
    L, R = inst.edges_at_s["L"], inst.edges_at_s["R"]
    after = lift(inst.graph, inst.s, L[0], R[0])
    lg = lifting_graph(after, inst.s, 4)
    assert len(lg.nodes) == 3 and not lg.adjacency
    assert classify(lg).variant == "Other"


def test_classify_abstract_shapes():
    nodes = range(4)
    full = LiftingGraph.from_edges(nodes, itertools.combinations(nodes, 2))
    assert classify(full).variant == "ComplementDisconnected"
    bip = LiftingGraph.from_edges(range(5), [(1, 3), (1, 4), (2, 3), (2, 4)])
    got = classify(bip)
    assert got.variant == "IsolatedPlusBalancedBipartite"
    assert got.isolated == 0 and {got.side_a, got.side_b} == {(1, 2), (3, 4)}
    assert classify(LiftingGraph.from_edges(range(3), [])).variant == "Other"
    unbalanced = LiftingGraph.from_edges(range(6), [(1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)])
    assert "unbalanced" in classify(unbalanced).diagnostic


def test_max_independent_set_examples():
    n = 6
    assert max_independent_set_size(LiftingGraph.from_edges(range(n), itertools.combinations(range(n), 2))) == 1
    assert max_independent_set_size(LiftingGraph.from_edges(range(3), [])) == 3
    with pytest.raises(ResourceError):
        max_independent_set_size(LiftingGraph.from_edges(range(40), []), bound=30)


def test_parallel_lifting_graph_matches_serial():
    g, s = random_sk_instance(11, 8, 2, 12)
    assert lifting_graph(g, s, 2, jobs=2).adjacency == lifting_graph(g, s, 2).adjacency


def _brute_mis(lg):
    best = 0
    for r in range(len(lg.nodes) + 1):
        for sub in itertools.combinations(lg.nodes, r):
            if all(not lg.adjacent(a, b) for a, b in itertools.combinations(sub, 2)):
                best = r
    return best


@given(st.integers(0, 7), st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6))))
def test_max_independent_set_matches_brute(n, pairs):
    pairs = {(a, b) for a, b in pairs if a < b < n}
    lg = LiftingGraph.from_edges(range(n), pairs)
    assert max_independent_set_size(lg) == _brute_mis(lg)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]), st.integers(4, 7), st.integers(5, 8))
def test_flow_liftability_matches_brute_table(seed, k, deg_s, n):
    if deg_s < k:
        return
    try:
        g, s = random_sk_instance(seed, n, k, deg_s)
    except ResourceError:
        return
    lg = lifting_graph(g, s, k)
    table = brute_liftability_table(g, s, k)
    assert {p for p, ok in table.items() if ok} == set(lg.adjacency)
    for a, b in lg.adjacency:
        assert lift(g, s, a, b).degree(s) == g.degree(s) - 2


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_non_liftable_pairs_stay_non_liftable(seed):
    rng = random.Random(seed)
    try:
        g, s = random_sk_instance(seed, rng.randint(5, 8), rng.choice([2, 4]), rng.randint(5, 8))
    except ResourceError:
        return
    k = next(k for k in (4, 2) if is_s_k_edge_connected(g, s, k).ok)
    lg = lifting_graph(g, s, k)
    if not lg.adjacency:
        return
    a, b = rng.choice(sorted(lg.adjacency))
    after = lifting_graph(lift(g, s, a, b), s, k)
    for x, y in lg.non_adjacent_pairs():
        if a not in (x, y) and b not in (x, y):
            assert not after.adjacent(x, y)
