from liftorient.flow import FlowNetwork, Indexer, vertex_disjoint_count


def test_parallel_capacity_and_limit():
    net = FlowNetwork(3)
    net.add_edge(0, 1, 3)
    net.add_edge(1, 2, 2)
    assert net.max_flow(0, 2) == 2
    net.reset()
    assert net.max_flow(0, 2, limit=1) == 1


def test_flow_paths_are_simple_and_count_matches():
    net = FlowNetwork(4)
    for a, b in [(0, 1), (1, 3), (0, 2), (2, 3), (1, 2)]:
        net.add_edge(a, b, 1)
    f = net.max_flow(0, 3)
    paths = net.flow_paths(0, 3)
    assert f == len(paths) == 2
    for p in paths:
        assert p[0] == 0 and p[-1] == 3 and len(set(p)) == len(p)


def test_reachable_is_min_cut_side():
    net = FlowNetwork(3)
    net.add_arc(0, 1, 1)
    net.add_arc(1, 2, 5)
    net.max_flow(0, 2)
    assert net.reachable(0) == {0}


def test_indexer_roundtrip():
    idx = Indexer([7, 3, 9])
    assert [idx.labels[idx[v]] for v in (7, 3, 9)] == [7, 3, 9]


def test_vertex_disjoint_paths_through_a_cut_vertex():
    # two triangles sharing vertex 2: only one vertex-disjoint 0 -> 4 route
    adj = {0: [1, 2], 1: [0, 2], 2: [0, 1, 3, 4], 3: [2, 4], 4: [2, 3]}
    assert vertex_disjoint_count(adj, [0], [4], limit=5) == 1
