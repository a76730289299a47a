import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftorient.errors import DomainError
from liftorient.infinite import generator_grid, truncate
from liftorient.multigraph import (
    MultiGraph,
    contract,
    delta,
    edge_connectivity,
    format_edge_list,
    identify,
    is_k_edge_connected,
    is_s_k_edge_connected,
    local_edge_connectivity,
    parse_edge_list,
    to_dot,
)
from liftorient.oracles import brute_edge_disjoint_paths, build_figure1
from tests.helpers import brute_min_cut, complete, cycle
from tests.strategies import multigraphs


def test_delta_star_and_whole_set(k4):
    assert len(delta(k4, {0})) == 3
    assert delta(k4, k4.vertices).edges == ()


def test_delta_unknown_vertex(k4):
    with pytest.raises(DomainError):
        delta(k4, {99})


def test_delta_figure1_cut_is_k_plus_one():
    inst = build_figure1(4)
    r = inst.regions
    assert len(delta(inst.graph, r["L"] + r["C"] + r["N"])) == 5
    assert len(delta(inst.graph, r["R"] + r["C"] + r["N"])) == 5


def test_local_connectivity_examples(k4):
    assert local_edge_connectivity(k4, 0, 1).count == 3
    path = MultiGraph.from_pairs([(0, 1), (1, 2)])
    assert local_edge_connectivity(path, 0, 2).count == 1


def test_doubled_c4_opposite_vertices():
    g = cycle(4, 2)
    got = local_edge_connectivity(g, 0, 2)
    assert got.count == brute_edge_disjoint_paths(g, 0, 2) == 4


def test_local_connectivity_same_vertex(k4):
    with pytest.raises(DomainError):
        local_edge_connectivity(k4, 1, 1)


def test_edge_connectivity_examples(k4):
    assert edge_connectivity(cycle(5)) == 2
    assert edge_connectivity(k4) == 3
    assert edge_connectivity(MultiGraph.from_pairs([(0, 1)], [2])) == 0
    with pytest.raises(DomainError):
        edge_connectivity(MultiGraph([0]))


def test_grid_truncation_5x5_has_connectivity_2():
    pairs = []
    for x in range(5):
        for y in range(5):
            v = 5 * x + y
            if x < 4:
                pairs.append((v, v + 5))
            if y < 4:
                pairs.append((v, v + 1))
    g = MultiGraph.from_pairs(pairs)
    assert edge_connectivity(g) == 2 == min(g.degree(v) for v in g.vertices)


def test_s_k_star_goes_through_s():
    star = MultiGraph.from_pairs([(0, 1), (0, 2), (0, 3)])
    assert is_s_k_edge_connected(star, 0, 1).ok
    assert not is_s_k_edge_connected(star, 0, 2).ok


def test_s_k_tiny_graph_is_vacuous():
    rep = is_s_k_edge_connected(MultiGraph.from_pairs([(0, 1)]), 0, 3)
    assert rep.ok and rep.vacuous


def test_s_k_k5_partial_star_matches_cut_enumeration():
    g = complete(5)
    for drop in itertools.combinations(g.incident(0), 2):
        h = g.without_edges(drop)
        want = all(brute_min_cut(h, x, y) >= 3 for x, y in itertools.combinations(range(1, 5), 2))
        assert is_s_k_edge_connected(h, 0, 3).ok == want


def test_contract_examples():
    tri = cycle(3)
    g, s = contract(tri, {0, 1})
    assert len(g) == 2 and g.degree(s) == 2
    same, s1 = contract(tri, {2})
    assert s1 == 2 and same == tri


def test_contract_keeps_edge_ids():
    tri = cycle(3)
    g, s = contract(tri, {0, 1})
    assert set(g.edges) <= set(tri.edges)


def test_contract_outside_ball_gives_boundary_degree():
    t = truncate(generator_grid(1), [generator_grid(1).root], 3)
    ball = {v for v, d in t.dist.items() if d <= 2}
    outside = set(t.graph.vertices) - ball
    g, s = contract(t.graph, outside)
    boundary = sum(1 for _, u, v in t.graph.edge_triples() if (u in ball) != (v in ball))
    assert g.degree(s) == boundary == 20


def test_identify_parallel_edges_become_loops():
    g = MultiGraph.from_pairs([(0, 1)] * 3)
    h = identify(g, 0, 1)
    assert len(h) == 1 and sorted(h.loops) == sorted(g.edges)


def test_identify_c4_edge():
    h = identify(cycle(4), 0, 1)
    assert len(h) == 3 and h.num_edges() == 3 and len(h.loops) == 1


def test_edge_list_roundtrip():
    g = parse_edge_list("# comment\n0 1 2\n1 2\n5\n")
    assert g.num_edges() == 3 and 5 in g
    assert parse_edge_list(format_edge_list(g)) == g


@pytest.mark.parametrize("text", ["0 0\n", "0 1 0\n", "-1 2\n", "1 2 3 4\n"])
def test_edge_list_rejects(text):
    with pytest.raises(DomainError):
        parse_edge_list(text)


def test_dot_export_mentions_every_edge(k4):
    dot = to_dot(k4, heads={0: 1})
    assert dot.startswith("digraph") and dot.count("->") == k4.num_edges()


@given(multigraphs(max_vertices=6))
def test_connectivity_matches_cut_enumeration(g):
    x, y = g.vertices[0], g.vertices[-1]
    c = local_edge_connectivity(g, x, y)
    assert c.count == len(c.cut) == brute_min_cut(g, x, y)
    used = set()
    for es, vs in zip(c.witness.paths, c.witness.vertex_paths):
        assert vs[0] == x and vs[-1] == y and len(set(vs)) == len(vs)
        assert not used & set(es)
        used |= set(es)
        for a, b, e in zip(vs, vs[1:], es):
            assert set(g.ends(e)) == {a, b}


@given(multigraphs(), st.data())
def test_delta_complement_symmetry(g, data):
    side = data.draw(st.sets(st.sampled_from(g.vertices)))
    assert delta(g, side).edges == delta(g, set(g.vertices) - side).edges


@given(multigraphs(min_vertices=4, connected=True), st.data())
def test_contraction_never_lowers_connectivity(g, data):
    x_set = data.draw(st.sets(st.sampled_from(g.vertices), min_size=1, max_size=len(g) - 2))
    h, s = contract(g, x_set)
    rest = [v for v in g.vertices if v not in x_set]
    for a, b in itertools.combinations(rest, 2):
        assert local_edge_connectivity(h, a, b).count >= local_edge_connectivity(g, a, b).count


@given(multigraphs(min_vertices=3, max_vertices=6, connected=True), st.integers(1, 4))
def test_k_edge_connected_matches_brute(g, k):
    want = all(brute_min_cut(g, x, y) >= k for x, y in itertools.combinations(g.vertices, 2))
    assert is_k_edge_connected(g, k).ok == want
