import dataclasses
import itertools

import pytest

from liftorient.errors import DomainError
from liftorient.infinite import CorridorGraph, end_graph, find_ray_cut, generator_grid, generator_triangular
from liftorient.lifting import LiftingGraph, classify, lift, lifting_graph
from liftorient.infinite import EndGraph
from liftorient.multigraph import MultiGraph, is_s_k_edge_connected
from liftorient.oracles import build_bipartite_obstruction
from liftorient.sequence import (
    choose_pair_case1,
    contracted_graph,
    run_lifting_sequence,
    verify_lift_sequence,
)


def _corridor(core_pairs, order, middle=None, mult=2):
    core = MultiGraph.from_pairs(core_pairs)
    return CorridorGraph(core, 0, order, middle=middle, corridor_mult=mult, rung_mult=mult)


def test_degree_two_is_one_unique_lift():
    g = _corridor([(0, 1), (0, 1), (1, 2), (1, 2)], [0, 1])
    rc = find_ray_cut(g, [1, 2], 6)
    res = run_lifting_sequence(rc, 2)
    assert len(res.steps) == 1 and res.steps[0].case == "unique" and res.residual is None
    assert verify_lift_sequence(g, res).ok


def test_degree_three_is_residual_only():
    g = _corridor([(0, 1), (0, 1), (0, 1), (1, 2), (1, 2)], [0, 1, 2], middle=1)
    rc = find_ray_cut(g, [1, 2], 6)
    res = run_lifting_sequence(rc, 2)
    assert not res.steps and res.residual is not None
    assert res.final.degree(res.s) == 3
    assert verify_lift_sequence(g, res).ok


@pytest.fixture(scope="module")
def grid_run():
    g = generator_grid(1)
    rc = find_ray_cut(g, [g.root], 6, radius=1)
    return g, run_lifting_sequence(rc, 4)


def test_grid_radius_one_six_steps(grid_run):
    g, res = grid_run
    assert len(res.steps) == 6 and res.residual is None
    assert res.final.degree(res.s) == 0
    assert verify_lift_sequence(g, res).ok


def test_every_intermediate_graph_stays_s_k(grid_run):
    g, res = grid_run
    cur = res.initial
    for st in res.steps:
        cur = lift(cur, res.s, *st.pair)
        assert is_s_k_edge_connected(cur, res.s, 4).ok


def test_paths_pairwise_edge_disjoint(grid_run):
    _, res = grid_run
    for a, b in itertools.combinations(res.steps, 2):
        assert not set(a.path_edges) & set(b.path_edges)


def test_contracted_graph_degree_equals_cut(grid_run):
    g, res = grid_run
    rc = res.raycut
    g0, s = contracted_graph(g, rc.s_set)
    assert g0.degree(s) == len(rc.cut) == 12
    assert sorted(g0.incident(s)) == sorted(rc.cut.edges)


def test_odd_k_or_small_k_rejected(grid_run):
    _, res = grid_run
    with pytest.raises(DomainError):
        run_lifting_sequence(res.raycut, 3)


def test_precondition_fails_when_k_too_large(grid_run):
    _, res = grid_run
    with pytest.raises(DomainError):
        run_lifting_sequence(res.raycut, 6)


def test_planted_shared_edge_is_reported(grid_run):
    g, res = grid_run
    i, j = [n for n, st in enumerate(res.steps) if st.path_edges][:2]
    s0, s1 = res.steps[i], res.steps[j]
    bad = dataclasses.replace(s1, path_edges=s1.path_edges[:-1] + (s0.path_edges[0],))
    steps = list(res.steps)
    steps[j] = bad
    broken = dataclasses.replace(res, steps=tuple(steps))
    rep = verify_lift_sequence(g, broken)
    assert any("shares edge" in v for v in rep.violations)


def test_planted_non_liftable_pair_is_reported(grid_run):
    g, res = grid_run
    g0 = res.initial
    # two cut edges at the same leaf of the plus-shaped S
    by_inner = {}
    for e in g0.incident(res.s):
        by_inner.setdefault(g0.other(e, res.s), []).append(e)
    pair = tuple(sorted(next(v for v in by_inner.values() if len(v) >= 2)[:2]))
    st0 = dataclasses.replace(res.steps[0], pair=pair)
    rep = verify_lift_sequence(g, dataclasses.replace(res, steps=(st0,) + res.steps[1:]))
    assert any("is not 4-liftable" in v for v in rep.violations)


def test_choose_pair_examples():
    nodes = range(4)
    lg = LiftingGraph.from_edges(nodes, itertools.combinations(nodes, 2))
    eg = EndGraph.from_edges(nodes, [(2, 3), (1, 2), (0, 1)])
    assert choose_pair_case1(lg, eg) == (0, 1)
    bip = LiftingGraph.from_edges(range(5), [(1, 3), (1, 4), (2, 3), (2, 4)])
    assert choose_pair_case1(bip, EndGraph.from_edges(range(5), [(0, 1), (0, 3), (2, 4), (1, 2)])) == (2, 4)
    star = EndGraph.from_edges(range(5), [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert choose_pair_case1(bip, star) is None


def _obstruction_corridor(k, h):
    inst = build_bipartite_obstruction(k, h)
    e = inst.edges_at_s
    order = list(e["L"]) + list(e["C"]) + list(e["R"])
    g = CorridorGraph(
        inst.graph, inst.s, order, middle=e["C"][0],
        corridor_mult=k // 2 + 1, rung_mult=k // 2 + 1, middle_rung_mult=k - 2,
    )
    s_set = [v for v in inst.graph.vertices if v != inst.s]
    return g, find_ray_cut(g, s_set, 8), inst


@pytest.mark.parametrize("k,h,lifts", [(4, 2, 1), (6, 3, 2)])
def test_case_two_residual_then_lifts(k, h, lifts):
    g, rc, inst = _obstruction_corridor(k, h)
    g0, s = contracted_graph(g, rc.s_set)
    assert classify(lifting_graph(g0, s, k)).variant == "IsolatedPlusBalancedBipartite"
    res = run_lifting_sequence(rc, k)
    assert res.residual is not None and len(res.steps) == lifts
    assert res.residual.e_star == inst.edges_at_s["C"][0]
    assert all(st.relaxed for st in res.steps)
    rep = verify_lift_sequence(g, res)
    assert rep.ok and rep.residual_checked
    w_paths = [set(es) for _, es in res.residual.paths]
    for a, b in itertools.combinations(w_paths, 2):
        assert not a & b
    for st in res.steps:
        assert not set(st.path_edges) & res.residual.path_edges()


def test_case_two_isolated_edge_stays_isolated():
    g, rc, inst = _obstruction_corridor(6, 3)
    res = run_lifting_sequence(rc, 6)
    cur = res.initial
    star = res.residual.e_star
    for st in res.steps:
        cur = lift(cur, res.s, *st.pair)
        if cur.degree(res.s) >= 2:
            assert not lifting_graph(cur, res.s, 6).neighbors(star)


def test_odd_triangular_cut_keeps_residual():
    g = generator_triangular(alternating=True)
    rc = find_ray_cut(g, [g.root], 6, radius=1)
    assert len(rc.cut) % 2 == 1
    res = run_lifting_sequence(rc, 4)
    assert res.residual is not None and res.final.degree(res.s) == 3
    assert len(res.steps) == (len(rc.cut) - 3) // 2
    assert verify_lift_sequence(g, res).ok


def test_end_graph_connected_for_grid(grid_run):
    _, res = grid_run
    assert end_graph(res.raycut).is_connected()
