"""Integer max-flow on small dense-index networks.

Every connectivity oracle in the package funnels through :class:`FlowNetwork`.
Capacities are integers (edge multiplicities), augmentation is BFS-based
(Edmonds-Karp), and every call accepts a ``limit`` so that threshold queries
("are there at least k paths?") stop after k augmentations.
"""

from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable, Sequence


class FlowNetwork:
    """Residual network over nodes ``0..n-1``.

    ``add_arc`` adds a directed arc, ``add_edge`` an undirected edge (an arc
    each way with the same capacity).  The network keeps the original
    capacities so that net flows can be read back after :meth:`max_flow`.
    """

    __slots__ = ("n", "cap", "res")

    def __init__(self, n: int):
        self.n = n
        self.cap: list[dict[int, int]] = [dict() for _ in range(n)]
        self.res: list[dict[int, int]] = [dict() for _ in range(n)]

    def add_arc(self, u: int, v: int, c: int = 1) -> None:
        if u == v or c <= 0:
            return
        self.cap[u][v] = self.cap[u].get(v, 0) + c
        self.cap[v].setdefault(u, 0)
        self.res[u][v] = self.res[u].get(v, 0) + c
        self.res[v].setdefault(u, 0)

    def add_edge(self, u: int, v: int, c: int = 1) -> None:
        self.add_arc(u, v, c)
        self.add_arc(v, u, c)

    def reset(self) -> None:
        self.res = [dict(d) for d in self.cap]

    def copy(self) -> "FlowNetwork":
        out = FlowNetwork(self.n)
        out.cap = [dict(d) for d in self.cap]
        out.res = [dict(d) for d in self.res]
        return out

    def _augmenting_path(self, source: int, sink: int) -> list[int] | None:
        parent = [-1] * self.n
        parent[source] = source
        queue = deque([source])
        res = self.res
        while queue:
            u = queue.popleft()
            for v, r in res[u].items():
                if r > 0 and parent[v] < 0:
                    parent[v] = u
                    if v == sink:
                        path = [v]
                        while v != source:
                            v = parent[v]
                            path.append(v)
                        path.reverse()
                        return path
                    queue.append(v)
        return None

    def max_flow(self, source: int, sink: int, limit: int | None = None) -> int:
        """Augment from the current residual state; return the flow added.

        With ``limit`` the search stops as soon as ``limit`` units flow.
        """
        if source == sink:
            raise ValueError("source and sink coincide")
        total = 0
        res = self.res
        while limit is None or total < limit:
            path = self._augmenting_path(source, sink)
            if path is None:
                break
            push = min(res[a][b] for a, b in zip(path, path[1:]))
            if limit is not None:
                push = min(push, limit - total)
            for a, b in zip(path, path[1:]):
                res[a][b] -= push
                res[b][a] += push
            total += push
        return total

    def reachable(self, source: int) -> set[int]:
        """Nodes reachable from ``source`` in the residual graph."""
        seen = {source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, r in self.res[u].items():
                if r > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def net_flow(self, u: int, v: int) -> int:
        return self.cap[u].get(v, 0) - self.res[u].get(v, 0)

    def flow_paths(self, source: int, sink: int) -> list[list[int]]:
        """Decompose the current flow into simple source-sink node paths.

        Circulations picked up along the way are cancelled, so each returned
        path is simple.  Consumes a private copy of the flow values.
        """
        flow: list[dict[int, int]] = [dict() for _ in range(self.n)]
        for u in range(self.n):
            for v in self.cap[u]:
                f = self.net_flow(u, v)
                if f > 0:
                    flow[u][v] = f
        paths: list[list[int]] = []
        while True:
            if not any(f > 0 for f in flow[source].values()):
                break
            path = [source]
            pos = {source: 0}
            u = source
            while u != sink:
                v = next((w for w, f in flow[u].items() if f > 0), None)
                if v is None:
                    # dead end cannot happen with a conserved flow
                    raise RuntimeError("flow conservation violated")
                if v in pos:
                    # cancel the cycle v .. u -> v and resume from v
                    cycle = path[pos[v]:] + [v]
                    for a, b in zip(cycle, cycle[1:]):
                        flow[a][b] -= 1
                    for w in path[pos[v] + 1:]:
                        del pos[w]
                    del path[pos[v] + 1:]
                    u = v
                    continue
                pos[v] = len(path)
                path.append(v)
                u = v
            for a, b in zip(path, path[1:]):
                flow[a][b] -= 1
            paths.append(path)
        return paths


class Indexer:
    """Stable bijection between hashable labels and dense node indices."""

    __slots__ = ("labels", "index")

    def __init__(self, labels: Iterable[Hashable] = ()):
        self.labels: list[Hashable] = []
        self.index: dict[Hashable, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label: Hashable) -> int:
        i = self.index.get(label)
        if i is None:
            i = len(self.labels)
            self.index[label] = i
            self.labels.append(label)
        return i

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label: Hashable) -> int:
        return self.index[label]


def undirected_network(
    indexer: Indexer, capacities: dict[tuple[int, int], int]
) -> FlowNetwork:
    """Network with an undirected edge of the given capacity per vertex pair."""
    net = FlowNetwork(len(indexer))
    idx = indexer.index
    for (u, v), c in capacities.items():
        net.add_edge(idx[u], idx[v], c)
    return net


def vertex_disjoint_count(
    adjacency: dict[int, Sequence[int]],
    sources: Iterable[int],
    targets: Iterable[int],
    limit: int | None = None,
) -> int:
    """Maximum number of vertex-disjoint paths from ``sources`` to ``targets``.

    ``adjacency`` is an undirected simple adjacency (parallel edges are
    irrelevant under unit vertex capacities).  A vertex in both sets counts as
    a trivial path.  Uses the split-vertex reduction.
    """
    indexer = Indexer()
    for v in adjacency:
        indexer.add(v)
    n = len(indexer)
    # node 2i = v_in, 2i+1 = v_out, 2n = super source, 2n+1 = super sink
    net = FlowNetwork(2 * n + 2)
    src, snk = 2 * n, 2 * n + 1
    big = n + 1
    for v, nbrs in adjacency.items():
        i = indexer.index[v]
        net.add_arc(2 * i, 2 * i + 1, 1)
        for w in nbrs:
            j = indexer.index.get(w)
            if j is not None and j != i:
                net.cap[2 * i + 1][2 * j] = big
                net.res[2 * i + 1][2 * j] = big
                net.cap[2 * j].setdefault(2 * i + 1, 0)
                net.res[2 * j].setdefault(2 * i + 1, 0)
    for v in sources:
        i = indexer.index.get(v)
        if i is not None:
            net.add_arc(src, 2 * i, 1)
    for v in targets:
        i = indexer.index.get(v)
        if i is not None:
            net.add_arc(2 * i + 1, snk, 1)
    return net.max_flow(src, snk, limit)
