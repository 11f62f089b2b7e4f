import itertools
import math

import networkx as nx
import numpy as np
import pytest
from scipy.stats import binom

from graphtrace.bounds import (
    _component_multiset,
    collision_probability,
    coupled_deletion_sample,
    cycle_pair_instance,
    noisy_cut_samples,
    path_complement_instance,
    sample_noisy_cut,
    single_edge_removal_isomorphic,
    two_cut_special_count,
)
from graphtrace.graph import LabeledGraph, complete, cycle, disjoint_union, small_graph_isomorphic, two_cut_distribution


# ------------------------------------------------------------------ cycle coupling


def test_cycle_pair_instance():
    g1, g2 = cycle_pair_instance(6)
    assert g1 == cycle(6)
    assert g2 == disjoint_union([cycle(3), cycle(3)])
    assert g1.edge_count == g2.edge_count == 6
    for bad in (4, 7):
        with pytest.raises(ValueError):
            cycle_pair_instance(bad)


def test_collision_probability_value():
    assert collision_probability(10) == pytest.approx(0.7627, abs=1e-4)


@pytest.mark.parametrize("n", [6, 8, 10, 12, 14, 20])
def test_collision_implies_isomorphism(n):
    rng = np.random.default_rng(n)
    seen = 0
    for _ in range(2000):
        s = coupled_deletion_sample(n, rng, check=False)
        assert s.collision == bool(s.d.any())
        if s.collision:
            seen += 1
            assert small_graph_isomorphic(s.trace1, s.trace2)
    assert seen > 0


def test_coupling_rates():
    n, samples = 10, 20_000
    rng = np.random.default_rng(3)
    g1, g2 = cycle_pair_instance(n)
    hits = 0
    s1 = np.zeros((n, n))
    s2 = np.zeros((n, n))
    for _ in range(samples):
        s = coupled_deletion_sample(n, rng)
        hits += s.collision
        s1 += s.trace1.adjacency
        s2 += s.trace2.adjacency
        assert not (s.trace1.adjacency & ~g1.adjacency).any()
        assert not (s.trace2.adjacency & ~g2.adjacency).any()
    p = collision_probability(n)
    assert abs(hits / samples - p) <= 3 * math.sqrt(p * (1 - p) / samples)
    se = math.sqrt(0.25 / samples)
    # 20 edges at 3 sigma each; allow 4 sigma to keep the family-wise rate small
    for g, s in ((g1, s1), (g2, s2)):
        for u, v in g.edges():
            assert abs(s[u, v] / samples - 0.5) <= 4 * se


def test_coupling_pairs_are_independent():
    # positions j and n/2 + j of the big cycle must each be a fair coin, jointly uniform
    n, samples = 8, 20_000
    rng = np.random.default_rng(5)
    counts = np.zeros((2, 2))
    for _ in range(samples):
        a = coupled_deletion_sample(n, rng, check=False).trace1.adjacency
        counts[int(a[1, 2]), int(a[5, 6])] += 1
    se = math.sqrt(0.25 * 0.75 / samples)
    assert np.all(np.abs(counts / samples - 0.25) <= 4 * se)


# ------------------------------------------------------------------ path complements


def test_path_complement_shapes():
    inst = path_complement_instance(2)
    assert inst.n == 24 and inst.G2.n == 24
    assert len(inst.E1) == len(inst.E2) == 4
    assert all(inst.G1.has_edge(u, v) for u, v in inst.E1)
    assert all(inst.G2.has_edge(u, v) for u, v in inst.E2)
    assert all(inst.sparse1.degrees[u] == 1 for u in inst.u)
    assert all(inst.sparse1.degrees[v] == 2 for v in inst.v)
    assert all(inst.sparse2.degrees[w] == 1 for w in inst.w)
    assert all(inst.sparse2.degrees[x] == 2 for x in inst.x)
    with pytest.raises(ValueError):
        path_complement_instance(1)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_instances_not_isomorphic(r):
    inst = path_complement_instance(r)
    assert inst.n == 16 * r - 8
    # same degree sequence, different component multisets
    assert sorted(inst.sparse1.degrees) == sorted(inst.sparse2.degrees)
    assert _component_multiset(inst.sparse1) != _component_multiset(inst.sparse2)
    assert not small_graph_isomorphic(inst.sparse1, inst.sparse2)


def test_edge_removal_isomorphic_r2_all():
    assert all(single_edge_removal_isomorphic(2, *idx) for idx in itertools.product(range(2), repeat=4))


def test_edge_removal_isomorphic_r3_random():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert single_edge_removal_isomorphic(3, *(int(x) for x in rng.integers(0, 3, 4)))


def test_edge_removal_index_range():
    with pytest.raises(ValueError):
        single_edge_removal_isomorphic(2, 0, 0, 0, 2)


def test_complement_level_agreement():
    # the sparse check agrees with a direct dense isomorphism test on the complements
    inst = path_complement_instance(2)
    a = inst.G1.adjacency.copy()
    u, v = inst.E1[0]
    a[u, v] = a[v, u] = False
    b = inst.G2.adjacency.copy()
    w, x = inst.E2[3]
    b[w, x] = b[x, w] = False
    ga = nx.from_numpy_array(a.astype(int))
    gb = nx.from_numpy_array(b.astype(int))
    assert nx.is_isomorphic(ga, gb)
    assert not nx.is_isomorphic(nx.from_numpy_array(inst.G1.adjacency.astype(int)), nx.from_numpy_array(inst.G2.adjacency.astype(int)))


# ------------------------------------------------------------------ cut statistics


@pytest.mark.parametrize("r", [2, 3, 4])
def test_special_counts(r):
    inst = path_complement_instance(r)
    assert two_cut_special_count(inst.G1, inst.n) == r
    assert two_cut_special_count(inst.G2, inst.n) == r - 1


def test_special_count_complete_graph():
    assert two_cut_special_count(complete(7), 7) == math.comb(7, 2)
    with pytest.raises(ValueError):
        two_cut_special_count(complete(7), 8)


def test_noisy_cut_empty_graph():
    rng = np.random.default_rng(0)
    assert all(sample_noisy_cut(LabeledGraph.empty(6), rng) == 0 for _ in range(200))


def test_noisy_cut_complete_graph_is_binomial():
    rng = np.random.default_rng(1)
    draws = np.array([sample_noisy_cut(complete(4), rng) for _ in range(20_000)])
    freq = np.bincount(draws, minlength=5) / draws.size
    pmf = np.array([math.comb(4, i) for i in range(5)]) / 16
    assert np.all(np.abs(freq - pmf) <= 3 * np.sqrt(pmf * (1 - pmf) / draws.size))


def test_noisy_cut_mean_matches_half_mean_cut():
    inst = path_complement_instance(2)
    rng = np.random.default_rng(2)
    draws = np.array([sample_noisy_cut(inst.G1, rng) for _ in range(5_000)], dtype=float)
    expected = two_cut_distribution(inst.G1).mean() / 2
    assert abs(draws.mean() - expected) <= 3 * draws.std(ddof=1) / math.sqrt(draws.size)


def test_vectorized_sampler_agrees():
    inst = path_complement_instance(2)
    fast = noisy_cut_samples(inst.G1, 200_000, 3)
    dist = two_cut_distribution(inst.G1)
    # exact mixture pmf
    values, counts = np.unique(dist, return_counts=True)
    pmf = np.zeros(dist.max() + 1)
    for c, w in zip(values, counts / dist.size):
        pmf[: c + 1] += w * binom.pmf(np.arange(c + 1), c, 0.5)
    freq = np.bincount(fast, minlength=pmf.size) / fast.size
    assert np.all(np.abs(freq - pmf) <= 4 * np.sqrt(pmf * (1 - pmf) / fast.size) + 1e-12)
