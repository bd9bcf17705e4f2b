import io
import sys
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from slpa.graph import Cover, Graph, load_edge_list  # noqa: E402


@pytest.fixture(scope="session")
def karate_path():
    return resources.files("slpa") / "data" / "karate.txt"


@pytest.fixture(scope="session")
def karate(karate_path):
    with karate_path.open() as fh:
        return load_edge_list(fh)


@pytest.fixture
def two_triangles():
    return Graph.from_edges([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], n=6)


def text(s):
    return io.StringIO(s)


@st.composite
def small_graphs(draw, max_n=12, min_n=1):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(edges, n=n)


@st.composite
def bipartite_graphs(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    side = draw(st.lists(st.sampled_from([1, 2]), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if side[i] != side[j]]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(edges, n=n, side=side)


@st.composite
def covers(draw, n, max_communities=5, full=True):
    """A random cover of range(n); with ``full`` every node lands somewhere."""
    k = draw(st.integers(1, max_communities))
    comms = [set(draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n))) for _ in range(k)]
    if full:
        for v in range(n):
            if not any(v in c for c in comms):
                comms[draw(st.integers(0, k - 1))].add(v)
    return Cover.from_sets(comms)
