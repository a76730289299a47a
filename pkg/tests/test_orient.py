import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftorient.errors import DomainError, InvariantViolation
from liftorient.multigraph import MultiGraph, is_k_edge_connected
from liftorient.oracles import brute_edge_disjoint_paths
from liftorient.orient import (
    O1Step,
    OrientationState,
    OrientationTrace,
    PartialOrientation,
    cut_balance,
    extend_orientation,
    orient,
    replay,
    verify_k_arc_connected,
)
from tests.helpers import brute_arc_connectivity, complete, cycle
from tests.strategies import multigraphs


def test_o1_on_c4_balances_every_vertex():
    g = cycle(4)
    st_ = OrientationState(g, 1)
    st_.apply_O1([0, 1, 2, 3])
    for v in g.vertices:
        assert cut_balance(g, st_.heads, {v}) == (1, 1)


def test_o1_two_parallel_edges_one_each_way():
    g = MultiGraph.from_pairs([(0, 1), (0, 1)])
    st_ = OrientationState(g, 1)
    st_.apply_O1([0, 1])
    assert sorted(st_.heads.values()) == [0, 1]


def test_o1_rejects_directed_edge_and_loops():
    g = cycle(3)
    st_ = OrientationState(g, 1)
    st_.apply_O1([0, 1, 2])
    with pytest.raises(DomainError):
        st_.apply_O1([0, 1, 2])
    g2 = MultiGraph.from_pairs([(0, 1), (0, 1), (1, 2), (1, 2)])
    st2 = OrientationState(g2, 1)
    st2.apply_O1([0, 1])
    st2.apply_O2(0, 1)
    with pytest.raises(DomainError):
        st2.apply_O1([0, 1])  # already directed
    g3 = MultiGraph.from_pairs([(0, 1), (0, 1), (0, 1)])
    st3 = OrientationState(g3, 1)
    st3.apply_O1([0, 1])
    st3.apply_O2(0, 1)
    with pytest.raises(DomainError, match="loop"):
        st3.apply_O1([2])


def test_o1_rejects_non_cycle():
    st_ = OrientationState(MultiGraph.from_pairs([(0, 1), (1, 2), (2, 3)]), 1)
    with pytest.raises(DomainError):
        st_.apply_O1([0, 1, 2])


def test_o2_k1_needs_one_mixed_path():
    g = MultiGraph.from_pairs([(0, 1), (1, 2), (2, 0)])
    st_ = OrientationState(g, 1)
    st_.apply_O1([0, 1, 2])
    step = st_.apply_O2(0, 1)
    assert len(step.witness) == 1


def test_o2_three_parallel_arcs_k2():
    g = MultiGraph.from_pairs([(0, 1)] * 4)
    st_ = OrientationState(g, 2)
    st_.apply_O1([0, 1])
    st_.apply_O1([2, 3])
    assert len(st_.apply_O2(0, 1).witness) == 3


def test_o2_rejected_with_too_few_connections():
    # two directed triangles sharing vertex 2, plus an undirected 0-4 edge
    pairs = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]
    g = MultiGraph.from_pairs(pairs + [(0, 4)])
    st_ = OrientationState(g, 2)
    st_.apply_O1([0, 1, 2])
    st_.apply_O1([3, 4, 5])
    assert brute_edge_disjoint_paths(MultiGraph.from_pairs(pairs), 0, 4) == 2
    assert len(st_.mixed_paths(0, 4, 3)) == 2
    with pytest.raises(DomainError, match="need 3"):
        st_.apply_O2(0, 4)


def test_find_next_operation_examples():
    st_ = OrientationState(cycle(5), 1)
    op = st_.find_next_operation()
    assert op[0] == "O1" and sorted(op[1]) == list(range(5))
    g = MultiGraph.from_pairs([(0, 1), (1, 2), (2, 0), (2, 3)])
    st2 = OrientationState(g, 1)
    st2.apply_O1([0, 1, 2])
    assert st2.undirected_is_forest()
    assert st2.find_next_operation()[0] == "O2"
    g3 = MultiGraph.from_pairs([(0, 1), (0, 1), (0, 1)])
    st3 = OrientationState(g3, 1)
    st3.apply_O1([0, 1])
    st3.apply_O2(0, 1)
    assert st3.find_next_operation() == ("done",)


def test_verify_directed_triangle():
    g = cycle(3)
    heads = {0: 1, 1: 2, 2: 0}
    assert verify_k_arc_connected(g, heads, 1).ok
    rep = verify_k_arc_connected(g, heads, 2)
    assert not rep.ok and len(rep.dicut_arcs) == 1 and rep.flow == 1


@pytest.mark.parametrize(
    "name,g,k",
    [("C3", cycle(3), 1), ("C6", cycle(6), 1), ("K4", complete(4), 1), ("K7", complete(7), 2), ("2K5", complete(5, 2), 2)],
)
def test_orient_examples(name, g, k):
    o, trace = orient(g, k)
    assert o.is_total()
    assert len(set(trace.classes.values())) == 1
    assert verify_k_arc_connected(g, o.heads, k).ok
    assert brute_arc_connectivity(g, o.heads) >= k


def test_orient_precondition_and_stuck():
    with pytest.raises(DomainError):
        orient(cycle(4), 2)
    with pytest.raises(InvariantViolation, match="stuck"):
        orient(MultiGraph.from_pairs([(0, 1), (1, 2)]), 1, check=False)


def test_replay_reproduces_orientation(k7):
    o, trace = orient(k7, 2)
    again = replay(k7, trace.steps, 2)
    assert again.heads == dict(o.heads)
    back = OrientationTrace.from_json(trace.to_json())
    assert replay(k7, back.steps, 2).heads == dict(o.heads)


def test_extend_from_empty_matches_orient(k7):
    o, _ = orient(k7, 2)
    o2, _ = extend_orientation(k7, PartialOrientation(k7, {}), 2)
    assert dict(o2.heads) == dict(o.heads)


def test_extend_keeps_a_directed_cycle(k7):
    ham = [next(e for e in k7.edges_between(i, (i + 1) % 7)) for i in range(7)]
    st_ = OrientationState(k7, 2)
    st_.apply_O1(ham)
    part = st_.orientation()
    o, _ = extend_orientation(k7, part, 2)
    assert all(o.heads[e] == h for e, h in part.heads.items()) and len(part.heads) == 7
    assert brute_arc_connectivity(k7, o.heads) >= 2


def test_extend_fully_oriented_is_unchanged(k7):
    o, _ = orient(k7, 2)
    o2, _ = extend_orientation(k7, o, 2)
    assert dict(o2.heads) == dict(o.heads)


def test_extend_rejects_bad_trace(k7):
    bad = PartialOrientation(k7, {0: k7.ends(0)[1]}, (O1Step((0,), (k7.ends(0)[1],)),))
    with pytest.raises(DomainError, match="step 0"):
        extend_orientation(k7, bad, 2)


def test_extend_rejects_heads_not_from_trace(k7):
    with pytest.raises(DomainError, match="reproduce"):
        extend_orientation(k7, PartialOrientation(k7, {0: k7.ends(0)[0]}), 2)


def test_partial_orientation_head_must_be_endpoint(k4):
    with pytest.raises(DomainError):
        PartialOrientation(k4, {0: 3 if 3 not in k4.ends(0) else 2})


def _all_cuts_balanced(g, heads):
    vs = g.vertices
    for r in range(1, len(vs)):
        for side in itertools.combinations(vs, r):
            out, inn = cut_balance(g, heads, side)
            if out != inn:
                return False
    return True


@settings(max_examples=40)
@given(multigraphs(min_vertices=2, max_vertices=6, max_edges=16, connected=True), st.sampled_from([1, 2]))
def test_orient_random_graphs(g, k):
    if not is_k_edge_connected(g, 4 * k - 2).ok:
        return
    o, trace = orient(g, k)
    assert o.is_total()
    assert brute_arc_connectivity(g, o.heads) >= k
    if trace.o1_only():
        assert _all_cuts_balanced(g, o.heads)


def test_eulerian_graph_runs_o1_only_and_balances():
    g = complete(5, 2)
    o, trace = orient(g, 2)
    if trace.o1_only():
        assert _all_cuts_balanced(g, o.heads)
    g2 = cycle(5, 2)
    o2, t2 = orient(g2, 1)
    assert t2.o1_only() and _all_cuts_balanced(g2, o2.heads)
