import dataclasses

import pytest

from liftorient.errors import ResourceError
from liftorient.immersion import ImmersionParams
from liftorient.infinite import FiniteOracle, distances, generator_grid
from liftorient.multigraph import MultiGraph
from liftorient.orient import verify_k_arc_connected
from liftorient.orient_infinite import EdgeEnumeration, run, stage0, verify_transfer
from tests.helpers import arc_disjoint_paths, cycle


def test_enumeration_is_deterministic_and_by_radius():
    g = generator_grid(1)
    a, b = EdgeEnumeration(g), EdgeEnumeration(g)
    first = [a[i] for i in range(40)]
    assert first == [b[i] for i in range(40)]
    assert len(set(first)) == 40
    # an edge never precedes an edge from a smaller ball
    rad = []
    for e in first:
        u, v = g.edge_ends(e)
        d = distances(g, [g.root], 10)
        rad.append(max(d[u], d[v]))
    assert rad == sorted(rad)
    assert all(a.index(e) == i for i, e in enumerate(first))


def test_enumeration_exhausts_on_finite_graph():
    enum = EdgeEnumeration(FiniteOracle(cycle(4)))
    assert sorted(enum[i] for i in range(4)) == [0, 1, 2, 3]
    with pytest.raises(ResourceError):
        enum[4]


def test_stage0_shortest_cycles():
    g1 = generator_grid(1)
    w = stage0(g1, EdgeEnumeration(g1), 1)
    assert len(w.heads) == 4 and len(w.graph) == 4
    g2 = generator_grid(2)
    w2 = stage0(g2, EdgeEnumeration(g2), 2)
    assert len(w2.heads) == 2 and len(w2.graph) == 2
    assert verify_k_arc_connected(w.graph, w.heads, 1).ok


def test_single_stage_run():
    res = run(generator_grid(1), 1, 1)
    assert res.ok and not res.transfers and len(res.stages) == 1


def _independent_transfer_ok(prev, nxt, k):
    vs = [v for v in prev.vertices]
    return all(
        arc_disjoint_paths(nxt.graph, nxt.heads, x, y, k) >= k for x in vs for y in vs if x != y
    )


@pytest.fixture(scope="module")
def grid1_run():
    return run(generator_grid(1), 1, 4)


@pytest.fixture(scope="module")
def grid2_run():
    return run(generator_grid(2), 2, 3)


@pytest.mark.parametrize("name", ["grid1_run", "grid2_run"])
def test_staged_runs(name, request):
    res = request.getfixturevalue(name)
    assert res.ok
    assert res.coverage >= len(res.stages)
    for prev, nxt in zip(res.stages, res.stages[1:]):
        assert set(prev.vertices) <= set(nxt.vertices)
        assert all(nxt.heads[e] == h for e, h in prev.heads.items())
        assert nxt.pattern_check.ok
        assert _independent_transfer_ok(prev, nxt, res.k)
    assert res.to_json()["certificate"].startswith(f"{res.k}-arc-connectivity")


def test_every_stage_is_totally_oriented(grid1_run):
    for st in grid1_run.stages:
        assert set(st.heads) == set(st.graph.edges)
    idx = [st.target_index for st in grid1_run.stages]
    assert idx == sorted(idx)


def test_planted_reversed_theta_path(grid1_run):
    prev, nxt = grid1_run.stages[1], grid1_run.stages[2]
    imm = nxt.immersion
    pe = next(e for e, hp in sorted(imm.theta.items()) if len(hp.edges) > 1)
    e = imm.theta[pe].edges[1]
    heads = dict(nxt.heads)
    heads[e] = nxt.graph.other(e, heads[e])
    bad = dataclasses.replace(nxt, heads=heads)
    rep = verify_transfer(prev, bad, 1)
    assert not rep.ok and not rep.paths_consistent


def test_planted_reversed_old_arc(grid1_run):
    prev, nxt = grid1_run.stages[0], grid1_run.stages[1]
    e = next(iter(prev.heads))
    heads = dict(nxt.heads)
    heads[e] = nxt.graph.other(e, heads[e])
    rep = verify_transfer(prev, dataclasses.replace(nxt, heads=heads), 1)
    assert not rep.nesting


def test_singleton_is_vacuous():
    rep = verify_k_arc_connected(MultiGraph([0], []), {}, 3)
    assert rep.ok and rep.vacuous


def test_window_check_rejects_low_connectivity():
    from liftorient.errors import DomainError

    with pytest.raises(DomainError):
        run(generator_grid(1), 2, 2, ImmersionParams(), check_window=2)
