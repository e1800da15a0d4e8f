import pytest
from hypothesis import given, settings, strategies as st

from stitchwalk.graph import (Graph, GraphError, bfs_distances, bfs_tree, components, diameter, generate,
                              load_graph, parse_graph_spec, read_graph)


def brute_distances(g, s):
    # Bellman-Ford style relaxation, independent of the BFS queue
    n = g.n
    d = [n + 1] * n
    d[s] = 0
    for _ in range(n):
        for u, v in g.edges():
            d[v] = min(d[v], d[u] + 1)
            d[u] = min(d[u], d[v] + 1)
    return d


def test_load_small_path():
    g = load_graph("0 1\n1 2")
    assert (g.n, g.m) == (3, 2)
    assert g.adjacency == ((1,), (0, 2), (1,))


def test_load_rejects_duplicate():
    with pytest.raises(GraphError, match="duplicate"):
        load_graph("0 1\n0 1")


def test_load_rejects_disconnected_naming_nodes():
    with pytest.raises(GraphError, match="nodes 0 and 2"):
        load_graph("0 1\n2 3")


def test_load_reports_line_number():
    with pytest.raises(GraphError, match="line 3"):
        load_graph("0 1\n# fine\n1 x\n")


def test_load_rejects_self_loop_and_empty():
    with pytest.raises(GraphError, match="self-loop"):
        load_graph("0 0\n0 1")
    with pytest.raises(GraphError):
        load_graph("# nothing\n")


def test_comments_and_file_roundtrip(tmp_path):
    g = generate("grid", 9)
    path = tmp_path / "g.txt"
    path.write_text("# grid\n" + g.to_edge_list())
    assert read_graph(str(path)) == g
    assert parse_graph_spec(f"file:{path}") == g
    assert parse_graph_spec(str(path)) == g


def test_star_degrees():
    g = generate("star", 5)
    assert g.degree(0) == 4
    assert all(g.degree(v) == 1 for v in range(1, 5))


def test_cycle_degrees_and_diameter():
    g = generate("cycle", 8)
    assert set(g.degrees()) == {2}
    assert diameter(g) == 4


def test_erdos_renyi_deterministic():
    a = generate("erdos_renyi", 10, seed=7, p=0.5)
    b = generate("erdos_renyi", 10, seed=7, p=0.5)
    assert a == b


def test_random_geometric_connected():
    g = generate("random_geometric", 20, seed=3, r=0.4)
    assert components(g.n, g.edges()) == 1


def test_generator_errors():
    with pytest.raises(GraphError):
        generate("path", 1)
    with pytest.raises(GraphError):
        generate("grid", 10)
    with pytest.raises(GraphError):
        generate("hypercube", 8)
    with pytest.raises(GraphError, match="disconnected"):
        generate("erdos_renyi", 30, seed=1, p=0.001)


def test_bfs_tree_examples():
    t = bfs_tree(generate("star", 6), 0)
    assert t.depth == 1 and all(t.parent[v] == 0 for v in range(1, 6))
    assert bfs_tree(generate("cycle", 8), 0).depth == 4
    assert bfs_tree(generate("grid", 16), 0).depth == 6


def test_bfs_tie_break_lowest_id():
    # node 3 of a 4-cycle has two level-1 neighbours in a grid; in C4 node 2 sees 1 and 3
    t = bfs_tree(generate("cycle", 4), 0)
    assert t.parent[2] == 1


def test_diameter_examples():
    assert diameter(generate("complete", 6)) == 1
    assert diameter(generate("path", 10)) == 9
    assert diameter(generate("grid", 25)) == 8


def test_grid_spec_and_rows():
    g = parse_graph_spec("grid:2x3")
    assert (g.n, g.m) == (6, 7)


@st.composite
def connected_graphs(draw):
    n = draw(st.integers(2, 24))
    # a random spanning tree plus extra edges keeps the graph connected
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=30))
    for u, v in extra:
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, sorted(edges))


@settings(max_examples=60, deadline=None)
@given(connected_graphs())
def test_graph_invariants(g):
    assert sum(g.degrees()) == 2 * g.m
    for v in range(g.n):
        assert list(g.adjacency[v]) == sorted(set(g.adjacency[v]))
        for u in g.adjacency[v]:
            assert v in g.adjacency[u] and u != v


@settings(max_examples=40, deadline=None)
@given(connected_graphs(), st.data())
def test_bfs_levels_match_brute_force(g, data):
    root = data.draw(st.integers(0, g.n - 1))
    t = bfs_tree(g, root)
    assert list(t.level) == brute_distances(g, root)
    for v in range(g.n):
        if v != root:
            assert g.has_edge(v, t.parent[v]) and t.level[v] == t.level[t.parent[v]] + 1
    assert t.depth <= diameter(g)
    assert diameter(g) == max(max(brute_distances(g, s)) for s in range(g.n))
    assert bfs_distances(g, root) == list(t.level)
