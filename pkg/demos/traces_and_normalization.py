"""Noisy traces of a hidden graph, and how they are brought to a common noise level.

A trace keeps each vertex with probability p_v, corrupts the induced edges,
and hands the survivors over under fresh random ids. The provenance map back
to the hidden ids travels with the trace but is only read by evaluation code.
"""

import math

import numpy as np

from graphtrace.graph import random_graph
from graphtrace.noise import NoiseParams, generate_traces, normalize


def edge_density(traces):
    shown = sum(t.observed.edge_count for t in traces)
    pairs = sum(math.comb(t.n, 2) for t in traces)
    return shown / pairs


rng = np.random.default_rng(7)
G = random_graph(60, rng)
print(f"hidden graph: {G.n} vertices, {G.edge_count} edges, density {G.edge_count / math.comb(60, 2):.3f}")

# deletion model: each surviving edge is kept with probability p_e
params = NoiseParams.deletion(p_v=0.8, p_e=0.9)
traces = generate_traces(G, params, 20, rng)
print("\n20 deletion traces at p_v=0.8, p_e=0.9")
print(f"  mean trace size {np.mean([t.n for t in traces]):.1f} (expect 48)")
print(f"  edge density    {edge_density(traces):.3f} (expect about {0.5 * 0.9:.3f})")

# the pairing analysis wants p_e <= 1/2, so extra deletions are applied
norm, eff = normalize(traces, params, rng)
print(f"  after normalization p_e = {eff.p_e}, density {edge_density(norm):.3f}")

# flip model: every induced pair flips with probability f_e
for f_e in (0.1, 0.35, 0.8):
    params = NoiseParams.flip(p_v=1.0, f_e=f_e)
    traces = generate_traces(G, params, 10, rng)
    norm, eff = normalize(traces, params, rng)
    print(f"\nflip f_e={f_e}: raw density {edge_density(traces):.3f}, normalized f_e={eff.f_e:.3f}")

# the ids are shuffled, so trace vertex 0 is a random hidden vertex
t = traces[0]
print(f"\nfirst five ids of a trace map back to hidden vertices {t.provenance[:5].tolist()}")
