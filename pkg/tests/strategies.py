from hypothesis import strategies as st

from liftorient.multigraph import MultiGraph


@st.composite
def multigraphs(draw, min_vertices=2, max_vertices=6, max_edges=14, connected=False):
    n = draw(st.integers(min_vertices, max_vertices))
    pairs = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1]),
            max_size=max_edges,
        )
    )
    if connected:
        pairs = [(i, i + 1) for i in range(n - 1)] + pairs
    return MultiGraph.from_pairs(pairs, range(n))
