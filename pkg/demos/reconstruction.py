"""End-to-end reconstruction, with the pairing replaced by the ground truth and without.

With oracle pairing the only source of error is an edge that never shows up
(deletion) or loses its majority vote (flip), so success climbs with the
number of traces. The self-contained pipeline has to find the alignment
itself, which at this scale is the bottleneck.
"""

import numpy as np

from graphtrace.graph import random_graph
from graphtrace.noise import NoiseParams
from graphtrace.reconstruct import evaluate_reconstruction, reconstruct_end_to_end, required_traces

n = 30
params = NoiseParams.deletion(p_v=1.0, p_e=0.5)
print(f"suggested trace count for n={n}: {required_traces(params, n)}")

print("\noracle pairing, deletion model")
for t in (2, 5, 10, 20):
    wins = 0
    for trial in range(10):
        rng = np.random.default_rng([t, trial])
        G = random_graph(n, rng)
        report = reconstruct_end_to_end(G, params, t, rng=rng, pairing="oracle")
        wins += evaluate_reconstruction(report, G)
    print(f"  t={t:2d}: {wins}/10 exact")

print("\noracle pairing, flip model f_e=0.3")
flip = NoiseParams.flip(1.0, 0.3)
for t in (5, 25, 75):
    wins = 0
    for trial in range(5):
        rng = np.random.default_rng([t, trial, 1])
        G = random_graph(n, rng)
        report = reconstruct_end_to_end(G, flip, t, rng=rng, pairing="oracle")
        wins += evaluate_reconstruction(report, G)
    print(f"  t={t:2d}: {wins}/5 exact")

print("\nself-contained pipeline (anchor search plus signatures)")
rng = np.random.default_rng(11)
G = random_graph(n, rng)
report = reconstruct_end_to_end(G, params, 10, budget=2_000, rng=rng)
print(f"  {report.summary()}")
print(f"  exact: {evaluate_reconstruction(report, G)}")
