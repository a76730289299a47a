import itertools

from liftorient.multigraph import MultiGraph


def complete(n, mult=1):
    return MultiGraph.from_pairs([(a, b) for a, b in itertools.combinations(range(n), 2) for _ in range(mult)])


def cycle(n, mult=1):
    return MultiGraph.from_pairs([(i, (i + 1) % n) for i in range(n) for _ in range(mult)])


def brute_min_cut(g, x, y):
    """min |delta(X)| over X containing x and not y, by enumeration."""
    rest = [v for v in g.vertices if v not in (x, y)]
    best = None
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            side = {x, *extra}
            size = sum(1 for _, u, v in g.edge_triples() if (u in side) != (v in side))
            best = size if best is None else min(best, size)
    return best


def brute_min_dicut(g, heads, x, y):
    """min number of arcs leaving X over X containing x and not y."""
    rest = [v for v in g.vertices if v not in (x, y)]
    best = None
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            side = {x, *extra}
            out = sum(1 for e, h in heads.items() if g.other(e, h) in side and h not in side)
            best = out if best is None else min(best, out)
    return best


def brute_arc_connectivity(g, heads):
    return min(brute_min_dicut(g, heads, x, y) for x in g.vertices for y in g.vertices if x != y)


def arc_disjoint_paths(g, heads, x, y, limit):
    """Unit-capacity augmenting paths on the digraph given by heads (DFS, residual arcs)."""
    out = {}
    for e, h in heads.items():
        t = g.other(e, h)
        if t != h:
            out.setdefault(t, []).append((h, e, 1))
            out.setdefault(h, []).append((t, e, -1))
    used = set()
    flow = 0
    while flow < limit:
        stack, prev, seen = [x], {}, {x}
        while stack and y not in seen:
            v = stack.pop()
            for w, e, d in out.get(v, ()):
                ok = (e not in used) if d == 1 else (e in used)
                if ok and w not in seen:
                    seen.add(w)
                    prev[w] = (v, e, d)
                    stack.append(w)
        if y not in seen:
            break
        v = y
        while v != x:
            u, e, d = prev[v]
            used.add(e) if d == 1 else used.discard(e)
            v = u
        flow += 1
    return flow
