"""Aligning two traces without provenance.

The pairing step looks for two ordered anchor sets, one per trace, whose
induced subgraphs agree on as many pairs as possible. Every other vertex is
then described by its adjacency to the anchors, and vertices are paired when
those signatures are close in Hamming distance.

Small graphs allow an exhaustive search for the best anchors, which makes the
behaviour of the local search easy to audit.
"""

import numpy as np

from graphtrace.graph import random_graph
from graphtrace.noise import NoiseParams, generate_traces
from graphtrace.pairing import (
    best_triple_exact,
    best_triple_heuristic,
    make_triple,
    model_constants,
    oracle_pairing,
    pair_vertices,
    pairing_threshold,
)

rng = np.random.default_rng(3)

print("exhaustive vs local search on small traces")
for i in range(5):
    G = random_graph(7, rng)
    t1, t2 = generate_traces(G, NoiseParams.deletion(0.9, 0.5), 2, rng)
    k = min(4, t1.n, t2.n)
    exact = best_triple_exact(t1.observed, t2.observed, k)
    heur = best_triple_heuristic(t1.observed, t2.observed, k, 10_000, rng)
    print(f"  instance {i}: k={k} exact delta={exact.delta} heuristic delta={heur.delta}")

# signatures against correct anchors on a larger instance
params = NoiseParams.deletion(1.0, 0.5)
constants = model_constants(params)
G = random_graph(400, rng)
t1, t2 = generate_traces(G, params, 2, rng)
truth = oracle_pairing(t1, t2)
for k in (12, 60, 200):
    S = list(truth.pairs)[:k]
    T = [truth.pairs[a] for a in S]
    triple = make_triple(t1.observed, t2.observed, S, T)
    m = pair_vertices(t1.observed, t2.observed, triple, constants)
    correct = sum(truth.pairs.get(a) == b for a, b in m.items())
    print(f"\ntrue anchors k={k}: threshold {pairing_threshold(k, constants):.2f}, "
          f"{len(m)} matched, {correct} correct, {len(m.ambiguous1)} ambiguous")

print("\nsignatures only separate vertices once k is large; at small k the")
print("same-vertex and distinct-vertex distance distributions overlap.")
