import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphtrace.graph import GraphSizeError, LabeledGraph, complement, path, random_graph, relabel
from graphtrace.noise import NoiseParams, ParameterError, ProvenanceError, Trace, generate_trace, generate_traces
from graphtrace.pairing import (
    Matching,
    algorithm1_params,
    best_triple_exact,
    best_triple_heuristic,
    constants_for,
    delta,
    greedy_triple,
    hamming_matrix,
    make_triple,
    model_constants,
    oracle_pairing,
    pair_traces,
    pair_vertices,
    pairing_threshold,
    signatures,
)


def brute_force_delta(g1, g2, S, T):
    bad = 0
    for i, j in itertools.combinations(range(len(S)), 2):
        bad += g1.has_edge(S[i], S[j]) != g2.has_edge(T[i], T[j])
    return bad


def brute_force_best(g1, g2, k):
    """Minimum Δ with ties broken on (sorted S, sorted T, image sequence)."""
    best = None
    for S in itertools.combinations(range(g1.n), k):
        for Tset in itertools.combinations(range(g2.n), k):
            for T in itertools.permutations(Tset):
                key = (brute_force_delta(g1, g2, S, T), S, Tset, T)
                if best is None or key < best:
                    best = key
    return best


# ------------------------------------------------------------------ constants


def test_deletion_constants():
    c = model_constants(NoiseParams.deletion(1.0, 0.5))
    assert c.as_tuple() == pytest.approx((0.25, 7 / 24, 1 / 3, 0.375))


def test_flip_constants():
    c = model_constants(NoiseParams.flip(1.0, 0.25))
    assert c.as_tuple() == pytest.approx((0.375, 5 / 12, 11 / 24, 0.5))


@settings(max_examples=100)
@given(st.sampled_from(["deletion", "flip"]), st.floats(0.0, 1.0))
def test_constants_split_in_thirds(model, u):
    q = 1e-3 + u * (0.5 - 1e-3) if model == "deletion" else 0.25 + u * (0.5 - 0.25 - 1e-3)
    c = constants_for(model, q)
    assert c.c1 <= c.c2 <= c.c3 <= c.c4
    assert c.c2 - c.c1 == pytest.approx(c.c3 - c.c2)
    assert c.c3 - c.c2 == pytest.approx(c.c4 - c.c3)


@pytest.mark.parametrize("params", [NoiseParams.deletion(1.0, 0.7), NoiseParams.flip(1.0, 0.1), NoiseParams.flip(1.0, 0.5)])
def test_constants_need_normalized_params(params):
    with pytest.raises(ParameterError):
        model_constants(params)


def test_pairing_threshold_examples():
    assert pairing_threshold(100, model_constants(NoiseParams.deletion(1.0, 0.5))) == pytest.approx(30.25)
    assert pairing_threshold(100, model_constants(NoiseParams.flip(1.0, 0.25))) == pytest.approx(42.75)
    with pytest.raises(ValueError):
        pairing_threshold(0, model_constants(NoiseParams.deletion(1.0, 0.5)))


# ------------------------------------------------------------------ parameters


def test_algorithm1_params_examples():
    assert algorithm1_params(50, 1.0)[1] == 50
    r, k = algorithm1_params(10_000, 0.5)
    assert r == pytest.approx(871.7, abs=0.05)
    assert k == 1629
    with pytest.raises(ParameterError):
        algorithm1_params(100, 0.1)


# ------------------------------------------------------------------ delta


def test_delta_examples():
    tri = LabeledGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    p3 = path(3)
    assert delta(tri, tri, (0, 1, 2), (0, 1, 2)) == 0
    assert delta(tri, p3, (0, 1, 2), (0, 1, 2)) == 1
    g = random_graph(9, 3)
    ident = tuple(range(9))
    assert delta(g, complement(g), ident, ident) == math.comb(9, 2)


def test_delta_restrict():
    tri = LabeledGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert delta(tri, path(3), (0, 1, 2), (0, 1, 2), restrict=[(0, 1)]) == 0
    assert delta(tri, path(3), (0, 1, 2), (0, 1, 2), restrict=[(2, 0)]) == 1
    with pytest.raises(ValueError):
        delta(tri, path(3), (0, 1), (0, 1), restrict=[(0, 2)])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 9), st.randoms(use_true_random=False))
def test_delta_properties(seed, k, rnd):
    rng = np.random.default_rng(seed)
    g1, g2 = random_graph(10, rng), random_graph(11, rng)
    S = tuple(int(x) for x in rng.choice(10, k, replace=False))
    T = tuple(int(x) for x in rng.choice(11, k, replace=False))
    d = delta(g1, g2, S, T)
    assert d == brute_force_delta(g1, g2, S, T)
    assert 0 <= d <= math.comb(k, 2)
    order = list(range(k))
    rnd.shuffle(order)
    assert delta(g1, g2, [S[i] for i in order], [T[i] for i in order]) == d


# ------------------------------------------------------------------ exact search


def test_exact_identical_traces():
    g = random_graph(6, 1)
    assert best_triple_exact(g, g, 6).delta == 0


def test_exact_one_edge_removed():
    g = random_graph(6, 2)
    u, v = g.edges()[0]
    adj = g.adjacency.copy()
    adj[u, v] = adj[v, u] = False
    assert best_triple_exact(g, LabeledGraph(adj), 6).delta <= 1


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_graph(6, rng), random_graph(6, rng)
    k = 3 + seed % 3
    best = brute_force_best(g1, g2, k)
    got = best_triple_exact(g1, g2, k)
    assert got.delta == best[0]
    assert (got.S, got.T) == (best[1], best[3])


def test_exact_guard():
    g = random_graph(12, 1)
    with pytest.raises(GraphSizeError):
        best_triple_exact(g, g, 10)


# ------------------------------------------------------------------ heuristic


def test_heuristic_identical_traces():
    g = random_graph(10, 4)
    h = relabel(g, np.random.default_rng(0).permutation(10))
    assert best_triple_heuristic(g, h, 10, 100_000, 1).delta == 0


def test_heuristic_zero_budget_is_greedy():
    g1, g2 = random_graph(12, 1), random_graph(12, 2)
    assert best_triple_heuristic(g1, g2, 7, 0, 3) == greedy_triple(g1, g2, 7).canonical()


def test_heuristic_is_reproducible():
    g1, g2 = random_graph(15, 1), random_graph(15, 2)
    assert best_triple_heuristic(g1, g2, 9, 5000, 8) == best_triple_heuristic(g1, g2, 9, 5000, 8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_heuristic_never_beats_exact(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = (int(x) for x in rng.integers(3, 7, size=2))
    k = int(rng.integers(1, min(n1, n2) + 1))
    g1, g2 = random_graph(n1, rng), random_graph(n2, rng)
    exact = best_triple_exact(g1, g2, k)
    heur = best_triple_heuristic(g1, g2, k, 20_000, rng)
    assert heur.delta >= exact.delta
    assert heur.delta == delta(g1, g2, heur.S, heur.T)
    assert len(set(heur.S)) == len(set(heur.T)) == k


# ------------------------------------------------------------------ signatures and matching


def test_signature_examples():
    star = LabeledGraph.from_edges(5, [(0, i) for i in range(1, 5)])
    assert signatures(star, [1, 2, 3, 4])[0].tolist() == [1, 1, 1, 1]
    iso = LabeledGraph.from_edges(4, [(0, 1)])
    assert signatures(iso, [0, 1, 2])[3].tolist() == [0, 0, 0]
    assert signatures(path(3), [0, 2])[1].tolist() == [1, 1]
    assert signatures(path(3), [0, 1])[0].tolist() == [0, 1]


def test_hamming_matrix_is_exact():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, size=(7, 13)).astype(np.uint8)
    b = rng.integers(0, 2, size=(5, 13)).astype(np.uint8)
    ref = np.array([[int((x != y).sum()) for y in b] for x in a])
    assert (hamming_matrix(a, b) == ref).all()


def test_identity_triple_gives_perfect_matching():
    g = random_graph(200, 5)
    ident = tuple(range(200))
    m = pair_vertices(g, g, make_triple(g, g, ident, ident), model_constants(NoiseParams.deletion(1.0, 0.5)))
    assert m.pairs == {v: v for v in range(200)}


def test_complemented_trace_is_nearly_unmatched():
    rng = np.random.default_rng(2)
    c = model_constants(NoiseParams.flip(1.0, 0.49))
    matched = []
    for _ in range(5):
        g = random_graph(60, rng)
        h = complement(g)
        ident = tuple(range(60))
        m = pair_vertices(g, h, make_triple(g, h, ident, ident), c)
        assert all(m.pairs.get(v) != v for v in range(60))
        matched.append(len(m))
    assert np.mean(matched) <= 0.1 * 60


def test_vertex_only_in_one_trace_is_unmatched():
    g = random_graph(120, 3)
    t1 = generate_trace(g, NoiseParams.deletion(0.9, 1.0), 1)
    t2 = generate_trace(g, NoiseParams.deletion(0.9, 1.0), 2)
    truth = oracle_pairing(t1, t2).pairs
    S = tuple(sorted(truth))
    T = tuple(truth[s] for s in S)
    m = pair_vertices(t1.observed, t2.observed, make_triple(t1.observed, t2.observed, S, T), model_constants(NoiseParams.deletion(1.0, 0.5)))
    only1 = set(range(t1.n)) - set(truth)
    assert not only1 & set(m.pairs)
    assert all(truth[a] == b for a, b in m.items())


def test_matching_must_be_injective():
    with pytest.raises(ValueError):
        Matching({0: 1, 2: 1})


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_pair_traces_matching_is_injective(seed):
    g = random_graph(40, seed)
    params = NoiseParams.deletion(1.0, 0.5)
    t1, t2 = generate_traces(g, params, 2, seed)
    triple, m = pair_traces(t1.observed, t2.observed, params, 40, 2000, seed)
    assert len(set(m.pairs.values())) == len(m.pairs)
    assert not set(m.pairs) & set(m.ambiguous1)
    assert not set(m.pairs.values()) & set(m.ambiguous2)
    assert triple.k == 40


def test_pair_traces_works_without_provenance():
    g = random_graph(30, 1)
    params = NoiseParams.deletion(1.0, 1.0)
    t1, t2 = (t.withhold() for t in generate_traces(g, params, 2, 5))
    pair_traces(t1.observed, t2.observed, NoiseParams.deletion(1.0, 0.5), 30, 1000, 1)


# ------------------------------------------------------------------ oracle


def test_oracle_examples():
    g = random_graph(20, 1)
    full = generate_traces(g, NoiseParams.deletion(1.0, 0.5), 2, 3)
    assert len(oracle_pairing(*full)) == 20

    a = Trace(LabeledGraph.empty(3), np.array([0, 1, 2]))
    b = Trace(LabeledGraph.empty(2), np.array([5, 7]))
    assert len(oracle_pairing(a, b)) == 0
    t1, t2 = generate_traces(g, NoiseParams.deletion(0.6, 0.5), 2, 4)
    m = oracle_pairing(t1, t2)
    assert len(m) == np.intersect1d(t1.provenance, t2.provenance).size
    assert all(t1.provenance[a] == t2.provenance[b] for a, b in m.items())


def test_oracle_needs_provenance():
    t1, t2 = generate_traces(random_graph(5, 1), NoiseParams.deletion(1.0, 0.5), 2, 0)
    with pytest.raises(ProvenanceError):
        oracle_pairing(t1.withhold(), t2)
