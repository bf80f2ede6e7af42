import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisysis.errors import GenerationError
from noisysis.graph import MultiGraph, empty_graph, max_degree, star_graph
from noisysis.random_graphs import (Binomial, Poisson, check_degree_condition, count_self_loops,
                                    gen_erdos_renyi, gen_galton_watson, gen_regular_multigraph,
                                    tree_child_counts)

from conftest import three_sigma


def _matching_law_two_by_two():
    """Brute force over perfect matchings of stubs (0,0,1,1): P(double edge 0-1)."""
    stubs = [0, 0, 1, 1]
    matchings = set()
    for perm in itertools.permutations(range(4)):
        pairs = frozenset(frozenset((perm[i], perm[i + 1])) for i in (0, 2))
        matchings.add(pairs)
    double = sum(all(stubs[a] != stubs[b] for a, b in (tuple(p) for p in m)) for m in matchings)
    return double / len(matchings)


def test_er_edge_frequency():
    p, r = 0.3, 100_000
    hits = sum(gen_erdos_renyi(2, p, s).num_edges for s in range(r))
    assert abs(hits / r - p) <= three_sigma(p, r)


@pytest.mark.parametrize("n, p", [(1, 0.5), (7, 0.05), (20, 0.3), (30, 0.95)])
def test_er_is_simple(n, p):
    for seed in range(20):
        g = gen_erdos_renyi(n, p, seed)
        assert g.loops.sum() == 0
        assert g.adjacency.toarray().max(initial=0) <= 1


def test_er_near_complete():
    full = sum(gen_erdos_renyi(3, 0.999, s).num_edges == 3 for s in range(1000))
    assert full >= 980


def test_er_degree_moments():
    n, p, reps = 400, 0.05, 20
    degs = [gen_erdos_renyi(n, p, s).degree for s in range(reps)]
    # per-graph mean degree is 2E/n with E ~ Bin(n(n-1)/2, p)
    pairs = n * (n - 1) / 2
    se = 2 * math.sqrt(pairs * p * (1 - p)) / n / math.sqrt(reps)
    assert abs(np.mean([d.mean() for d in degs]) - (n - 1) * p) <= 3 * se
    var = (n - 1) * p * (1 - p)
    assert abs(np.mean([d.var() for d in degs]) / var - 1) < 0.1


def test_er_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_erdos_renyi(0, 0.5, 1)
    for p in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            gen_erdos_renyi(5, p, 1)


def test_er_seed_determinism():
    assert gen_erdos_renyi(50, 0.1, 7) == gen_erdos_renyi(50, 0.1, 7)


def test_regular_small_cases():
    for s in range(50):
        assert gen_regular_multigraph(2, 1, s) == MultiGraph(2, [(0, 1)])
        assert gen_regular_multigraph(1, 2, s) == MultiGraph(1, [(0, 0)])


def test_regular_two_vertices_degree_two():
    q = _matching_law_two_by_two()
    assert q == pytest.approx(2 / 3)
    r = 100_000
    double = sum(gen_regular_multigraph(2, 2, s).multiplicity(0, 1) == 2 for s in range(r))
    assert abs(double / r - q) <= three_sigma(q, r)


def test_regular_odd_stub_count():
    with pytest.raises(ValueError):
        gen_regular_multigraph(3, 3, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(1, 6), st.integers(0, 2**32))
def test_regular_stub_invariant(n, d, seed):
    if n * d % 2:
        return
    g = gen_regular_multigraph(n, d, seed)
    assert g.num_edges == n * d // 2
    # every vertex has d stubs: non-loop degree plus two per loop
    assert (g.degree + 2 * g.loops).tolist() == [d] * n


def test_self_loop_count():
    assert count_self_loops(star_graph(4)) == 0
    assert count_self_loops(MultiGraph(5, [(0, 0), (3, 3), (1, 2)])) == 2


def test_self_loop_mean_small():
    n, d, r = 200, 3, 3000
    s = np.array([count_self_loops(gen_regular_multigraph(n, d, i)) for i in range(r)])
    exact = n * d * (d - 1) / 2 / (n * d - 1)
    assert abs(s.mean() - exact) <= 4 * s.std(ddof=1) / math.sqrt(r)


def test_gw_single_vertex():
    g, meta = gen_galton_watson(Poisson(1.5), 1, seed=3)
    assert g.n == 1 and g.num_edges == 0
    assert meta.generation_sizes[0] == 1


def test_gw_forced_binary_tree():
    g, meta = gen_galton_watson(Binomial(2, 1.0), 7, seed=0)
    expected = MultiGraph(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
    assert g == expected
    assert meta.restarts == 0
    assert list(meta.generation_sizes) == [1, 2, 4]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 300), st.integers(0, 10**6), st.sampled_from(["bin", "poi"]))
def test_gw_is_tree(n, seed, which):
    law = Binomial(3, 0.5) if which == "bin" else Poisson(1.7)
    g, meta = gen_galton_watson(law, n, seed=seed)
    assert g.n == n and g.num_edges == n - 1
    assert g.loops.sum() == 0
    # every non-root vertex has exactly one parent with a smaller label
    parents = np.zeros(n, dtype=int)
    for u, v in g.edges:
        assert u < v
        parents[v] += 1
    assert parents[0] == 0 and (parents[1:] == 1).all()
    assert tree_child_counts(g).sum() == n - 1


def test_gw_restarts_after_extinction():
    g, meta = gen_galton_watson(Poisson(0.6), 40, seed=1)
    assert g.n == 40
    assert meta.restarts > 0


def test_gw_restart_cap():
    # a single vertex with no children can never reach two vertices
    with pytest.raises(GenerationError):
        gen_galton_watson(Binomial(1, 1e-12), 3, seed=0)


def test_offspring_law_validation():
    with pytest.raises(ValueError):
        Binomial(2, 0.0)
    with pytest.raises(ValueError):
        Binomial(0, 0.5)
    with pytest.raises(ValueError):
        Poisson(0.0)


@pytest.mark.slow
def test_poisson_max_degree_growth():
    theta = 1.0
    for n in (1000, 10_000, 100_000):
        ratios = []
        for s in range(100):
            g, _ = gen_galton_watson(Poisson(theta), n, seed=s)
            ratios.append(max_degree(g) / (math.log(n) / math.log(math.log(n))))
        assert 0.3 <= float(np.median(ratios)) <= 3.0


def test_degree_condition_examples():
    assert check_degree_condition(empty_graph(5), 123.0, 4.0).ok
    g = MultiGraph(100, [(0, i) for i in range(1, 11)])
    assert max_degree(g) == 10
    assert check_degree_condition(g, 1e-6, 2.0).ok
    res = check_degree_condition(g, 1e-4, 2.0)
    assert not res.ok and not res
    assert res.lhs == pytest.approx(1e-3) and res.rhs == pytest.approx(1e-4)


def test_er_chernoff_fraction():
    n, p, delta = 1000, 0.01, 0.5
    bound = 2 * math.exp(-delta**2 * n * p / 3)
    fracs = []
    for s in range(100):
        d = gen_erdos_renyi(n, p, s).degree
        fracs.append(np.mean(np.abs(d - n * p) >= delta * n * p))
    fracs = np.array(fracs)
    assert fracs.mean() <= bound + 3 * fracs.std(ddof=1) / 10
