import pytest

from liftorient.errors import DomainError, ResourceError
from liftorient.lifting import classify, is_k_liftable, lifting_graph
from liftorient.multigraph import MultiGraph, delta, local_edge_connectivity
from liftorient.oracles import (
    brute_edge_disjoint_paths,
    brute_liftability_table,
    brute_s_k_connected,
    build_bipartite_obstruction,
    build_figure1,
    corpus_specs,
    eulerian_random,
    post_lift_liftable,
    random_sk_instance,
)
from tests.helpers import complete


def test_figure1_odd_k_rejected():
    with pytest.raises(DomainError):
        build_figure1(3)


def test_figure1_k2_has_no_realisation():
    # delta(C u N) would be 1 < 2 with the prescribed cut sizes
    with pytest.raises(DomainError, match="delta"):
        build_figure1(2)


@pytest.mark.parametrize("k", [4, 6])
def test_figure1_structure(k):
    inst = build_figure1(k)
    g, s = inst.graph, inst.s
    assert g.degree(s) == 5
    assert [len(inst.edges_at_s[x]) for x in "LCR"] == [2, 1, 2]
    r = inst.regions
    assert len(delta(g, r["L"] + r["C"] + r["N"])) == k + 1
    assert len(delta(g, r["R"] + r["C"] + r["N"])) == k + 1
    for side in (r["L"], r["R"]):
        assert local_edge_connectivity(g, side[0], side[1]).count >= k // 2
    assert brute_s_k_connected(g, s, k)
    assert not post_lift_liftable(inst)


def test_figure1_table_matches_flow():
    inst = build_figure1(4)
    table = brute_liftability_table(inst.graph, inst.s, 4)
    assert len(table) == 10
    for (a, b), ok in table.items():
        assert ok == is_k_liftable(inst.graph, inst.s, a, b, 4)


def test_larger_obstruction_is_isolated_plus_k33():
    inst = build_bipartite_obstruction(6, 3)
    cls = classify(lifting_graph(inst.graph, inst.s, 6))
    assert cls.variant == "IsolatedPlusBalancedBipartite" and len(cls.side_a) == 3


def test_degree_two_table_single_true():
    g = MultiGraph.from_pairs([(0, 1), (0, 2), (1, 2), (1, 2)])
    assert brute_liftability_table(g, 0, 2) == {(0, 1): True}


def test_k5_table_matches_flow():
    g = complete(5)
    table = brute_liftability_table(g, 0, 3)
    for (a, b), ok in table.items():
        assert ok == is_k_liftable(g, 0, a, b, 3)


def test_brute_budget_refuses():
    g = complete(12)
    with pytest.raises(ResourceError):
        brute_liftability_table(g, 0, 2)


def test_random_instance_reproducible():
    a = random_sk_instance(1, 8, 4, 6)
    b = random_sk_instance(1, 8, 4, 6)
    assert a[0] == b[0] and a[0].degree(a[1]) == 6
    assert brute_s_k_connected(a[0], a[1], 4)


def test_random_infeasible_degree():
    with pytest.raises(ResourceError):
        random_sk_instance(1, 8, 4, 1)


@pytest.mark.parametrize("seed", range(5))
def test_random_small_n_never_invalid(seed):
    try:
        g, s = random_sk_instance(seed, 3, 2, 4)
    except ResourceError:
        return
    assert brute_s_k_connected(g, s, 2)


def test_eulerian_instances_are_eulerian():
    g, s = eulerian_random(3, 7, 2, 6)
    assert all(g.degree(v) % 2 == 0 for v in g.vertices)


def test_brute_path_packing_on_k4():
    assert brute_edge_disjoint_paths(complete(4), 0, 1) == 3


def test_corpus_specs_deterministic():
    assert corpus_specs("random_sk", 5, 10) == corpus_specs("random_sk", 5, 10)
    assert all(s.deg_s % 2 == 0 for s in corpus_specs("eulerian", 5, 20))
