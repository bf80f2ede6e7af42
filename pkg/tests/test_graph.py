import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisysis.errors import GraphFormatError
from noisysis.graph import (MultiGraph, all_configs, config_to_index, cycle_graph, empty_graph,
                            index_to_config, infected_neighbors, max_degree, neighbor_degree,
                            parse_graph, path_graph, read_graph, serialize_graph, star_graph,
                            write_graph)


@st.composite
def multigraphs(draw, max_n=8, max_edges=16):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_edges))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                          min_size=m, max_size=m))
    return MultiGraph(n, edges)


def test_neighbor_degree_examples():
    assert neighbor_degree(path_graph(3), 1) == 2
    g = MultiGraph(2, [(0, 1), (0, 1), (0, 0)])
    assert neighbor_degree(g, 0) == 2
    assert neighbor_degree(MultiGraph(3, [(0, 1)]), 2) == 0


def test_neighbor_degree_out_of_range():
    with pytest.raises(IndexError):
        neighbor_degree(path_graph(3), 3)
    with pytest.raises(IndexError):
        neighbor_degree(path_graph(3), -1)


def test_max_degree_examples():
    assert max_degree(star_graph(5)) == 5
    assert max_degree(empty_graph(4)) == 0


def test_max_degree_loop_and_double_edge():
    # v=0 carries a loop and an edge to w=1; w-u (u=2) is doubled.
    # By hand: deg(v)=1, deg(w)=1+2=3, deg(u)=2.
    g = MultiGraph(3, [(0, 0), (0, 1), (1, 2), (1, 2)])
    assert [neighbor_degree(g, x) for x in range(3)] == [1, 3, 2]
    assert max_degree(g) == 3


def test_infected_neighbors_examples():
    assert infected_neighbors(path_graph(3), np.array([1, 0, 1]), 1) == 2
    g = MultiGraph(2, [(0, 1), (0, 1), (0, 0)])
    assert infected_neighbors(g, np.array([1, 1]), 0) == 2
    assert infected_neighbors(cycle_graph(5), np.zeros(5, dtype=np.uint8), 3) == 0


def test_infected_neighbors_length_mismatch():
    with pytest.raises(ValueError):
        infected_neighbors(path_graph(3), np.array([1, 0]), 0)


def test_parse_examples():
    g = parse_graph("nsis-graph v1 n=3\n0 1\n1 2\n")
    assert g == path_graph(3)
    g = parse_graph("nsis-graph v1 n=2\n0 0\n0 1\n0 1\n")
    assert g.loops.tolist() == [1, 0]
    assert g.multiplicity(0, 1) == 2


def test_parse_comments_and_blank_lines():
    text = "# a comment\n\nnsis-graph v1 n=3\n# another\n1 0\n\n2 1\n"
    assert parse_graph(text) == path_graph(3)


@pytest.mark.parametrize("text, line", [
    ("nsis-graph v1 n=2\n0 5\n", 2),
    ("nsis-graph v2 n=2\n", 1),
    ("graph n=2\n", 1),
    ("nsis-graph v1 n=-3\n", 1),
    ("nsis-graph v1 n=3\n0 1\n1 -2\n", 3),
    ("nsis-graph v1 n=3\n0 1 2\n", 2),
    ("nsis-graph v1 n=3\n0 x\n", 2),
])
def test_parse_errors_carry_line_number(text, line):
    with pytest.raises(GraphFormatError) as exc:
        parse_graph(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_serialize_is_canonical():
    g = MultiGraph(3, [(2, 1), (0, 0), (1, 0)])
    assert serialize_graph(g) == "nsis-graph v1 n=3\n0 0\n0 1\n1 2\n"


def test_file_round_trip(tmp_path):
    g = MultiGraph(5, [(0, 4), (4, 0), (2, 2), (1, 3)])
    p = tmp_path / "g.graph"
    write_graph(g, p)
    assert read_graph(p) == g
    assert p.read_bytes() == serialize_graph(g).encode()


@settings(max_examples=200, deadline=None)
@given(multigraphs())
def test_round_trip_property(g):
    text = serialize_graph(g)
    h = parse_graph(text)
    assert h == g
    assert serialize_graph(h) == text


@settings(max_examples=200, deadline=None)
@given(multigraphs())
def test_all_infected_counts_equal_degree(g):
    ones = np.ones(g.n, dtype=np.uint8)
    for x in range(g.n):
        assert infected_neighbors(g, ones, x) == neighbor_degree(g, x)


@settings(max_examples=200, deadline=None)
@given(multigraphs(), st.data())
def test_infected_neighbors_monotone(g, data):
    s = np.array(data.draw(st.lists(st.integers(0, 1), min_size=g.n, max_size=g.n)), dtype=np.uint8)
    bump = np.array(data.draw(st.lists(st.integers(0, 1), min_size=g.n, max_size=g.n)), dtype=np.uint8)
    e = s | bump
    for x in range(g.n):
        assert infected_neighbors(g, s, x) <= infected_neighbors(g, e, x)


def test_loops_excluded_from_degree():
    g = MultiGraph(2, [(0, 0), (0, 0), (1, 1)])
    assert g.degree.tolist() == [0, 0]
    assert g.loops.tolist() == [2, 1]


def test_batch_counts_match_scalar(rng):
    g = MultiGraph(6, [(0, 1), (0, 1), (1, 2), (2, 2), (3, 5), (4, 5), (0, 5)])
    states = rng.integers(0, 2, (50, 6)).astype(np.uint8)
    batch = g.infected_neighbor_counts(states)
    for s, row in zip(states, batch):
        assert row.tolist() == [infected_neighbors(g, s, x) for x in range(6)]


def test_bad_vertex_rejected():
    with pytest.raises(ValueError):
        MultiGraph(2, [(0, 2)])
    with pytest.raises(ValueError):
        MultiGraph(0)


def test_config_index_round_trip():
    for n in (1, 3, 5):
        configs = all_configs(n)
        assert configs.shape == (2**n, n)
        for i, c in enumerate(configs):
            assert config_to_index(c) == i
            assert index_to_config(i, n).tolist() == c.tolist()
