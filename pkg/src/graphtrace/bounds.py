"""Lower-bound constructions: the cycle coupling and the path-complement pair.

All traces here use ``p_v = 1`` and ``p_e = 1/2``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .graph import (
    LabeledGraph,
    _as_graph,
    complement,
    component_key,
    connected_components,
    cut_size,
    cycle,
    disjoint_union,
    path,
    small_graph_isomorphic,
    two_cut_matrix,
)
from .noise import NoiseParams, generate_trace

HALF_DELETION = NoiseParams.deletion(1.0, 0.5)


# ---------------------------------------------------------------- cycle coupling


def cycle_pair_instance(n: int) -> tuple[LabeledGraph, LabeledGraph]:
    """``(C_n, C_{n/2} + C_{n/2})``."""
    if n % 2 or n < 6:
        raise ValueError(f"n must be even and at least 6, got {n}")
    return cycle(n), disjoint_union([cycle(n // 2), cycle(n // 2)])


@dataclass(frozen=True)
class CoupledSample:
    trace1: LabeledGraph
    trace2: LabeledGraph
    d: np.ndarray
    collision: bool


def _cycle_edges(start: int, length: int) -> np.ndarray:
    a = start + np.arange(length)
    return np.stack([a, start + (np.arange(length) + 1) % length], axis=1)


def coupled_deletion_sample(n: int, rng=None, check: bool = True) -> CoupledSample:
    """One draw of the coupled deletion traces of ``C_n`` and ``C_{n/2} + C_{n/2}``.

    The edge at position ``j`` of ``C_n`` joins ``j`` and ``j+1 mod n``. The
    second graph has cycles on ``0..h-1`` and ``h..n-1`` (``h = n/2``) with
    edges at positions ``j`` of each cycle.

    For each ``j < h`` the cycle positions ``j`` and ``h + j`` are coupled:
    with probability 1/4 (``d_j = 1``) both are deleted, otherwise neither,
    only the first or only the second, each with probability 1/3. So each
    position alone is deleted with probability 1/2 and the two positions of
    a pair are independent. The two small cycles
    copy these states, position ``j`` of the first cycle from ``j`` and of
    the second from ``h + j``, except that for every ``j`` up to the first
    index with ``d_j = 1`` the two copies are exchanged. The exchange keeps
    each pair's law (it is symmetric given the conditioning that defines the
    first index) and makes the traces isomorphic whenever some ``d_j = 1``.

    With ``check`` the isomorphism is asserted on every colliding sample.
    """
    cycle_pair_instance(n)
    rng = as_generator(rng)
    h = n // 2
    d = rng.random(h) < 0.25
    choice = rng.random(h)
    first = d | ((choice >= 1 / 3) & (choice < 2 / 3))
    second = d | (choice >= 2 / 3)
    deleted = np.concatenate([first, second])

    collision = bool(d.any())
    small_a, small_b = deleted[:h].copy(), deleted[h:].copy()
    if collision:
        stop = int(np.argmax(d)) + 1
        small_a[:stop], small_b[:stop] = deleted[h:h + stop], deleted[:stop]

    big = _cycle_edges(0, n)[~deleted]
    adj1 = np.zeros((n, n), dtype=bool)
    adj1[big[:, 0], big[:, 1]] = adj1[big[:, 1], big[:, 0]] = True
    e2 = np.concatenate([_cycle_edges(0, h)[~small_a], _cycle_edges(h, h)[~small_b]])
    adj2 = np.zeros((n, n), dtype=bool)
    adj2[e2[:, 0], e2[:, 1]] = adj2[e2[:, 1], e2[:, 0]] = True

    sample = CoupledSample(_as_graph(adj1), _as_graph(adj2), d, collision)
    if check and collision and not small_graph_isomorphic(sample.trace1, sample.trace2):
        raise AssertionError("coupled traces collided but are not isomorphic")
    return sample


def collision_probability(n: int) -> float:
    return 1 - 0.75 ** (n // 2)


# ---------------------------------------------------------------- path complements


@dataclass(frozen=True)
class PathComplementInstance:
    """The pair of dense graphs plus their sparse complements and special vertices.

    ``u[i]`` is a leaf of the i-th P2 and ``v[j]`` a middle vertex of the j-th
    P6 in the first sparse graph; ``w[k]`` is a leaf of the k-th P3 and
    ``x[l]`` the middle vertex of the l-th P5 in the second.
    """

    r: int
    G1: LabeledGraph
    G2: LabeledGraph
    sparse1: LabeledGraph
    sparse2: LabeledGraph
    u: tuple[int, ...]
    v: tuple[int, ...]
    w: tuple[int, ...]
    x: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.G1.n

    @property
    def E1(self) -> list[tuple[int, int]]:
        return [tuple(sorted((a, b))) for a in self.u for b in self.v]

    @property
    def E2(self) -> list[tuple[int, int]]:
        return [tuple(sorted((a, b))) for a in self.w for b in self.x]


def _path_forest(counts):
    """Union of paths with the given ``(length, copies)``; returns graph and starts."""
    pieces, starts, offset = [], {}, 0
    for length, copies in counts:
        starts[length] = []
        for _ in range(copies):
            pieces.append(path(length))
            starts[length].append(offset)
            offset += length
    return disjoint_union(pieces), starts


def path_complement_instance(r: int) -> PathComplementInstance:
    """Complements of two path forests on ``16 r - 8`` vertices.

    First forest: ``r`` P2, ``r-1`` P3, ``r-1`` P5, ``r`` P6. Second:
    ``r-1`` P2, ``r`` P3, ``r`` P5, ``r-1`` P6.
    """
    if r < 2:
        raise ValueError(f"r must be at least 2, got {r}")
    sparse1, s1 = _path_forest([(2, r), (3, r - 1), (5, r - 1), (6, r)])
    sparse2, s2 = _path_forest([(2, r - 1), (3, r), (5, r), (6, r - 1)])
    return PathComplementInstance(
        r=r,
        G1=complement(sparse1),
        G2=complement(sparse2),
        sparse1=sparse1,
        sparse2=sparse2,
        u=tuple(s1[2]),
        v=tuple(s + 2 for s in s1[6]),
        w=tuple(s2[3]),
        x=tuple(s + 2 for s in s2[5]),
    )


def _with_edge(g: LabeledGraph, a: int, b: int) -> LabeledGraph:
    adj = g.adjacency.copy()
    adj[a, b] = adj[b, a] = True
    return _as_graph(adj)


def _component_multiset(g: LabeledGraph) -> Counter:
    keys = Counter()
    for members in connected_components(g):
        key = component_key(g, members)
        if key is None:
            raise RuntimeError("component is neither a tree nor a cycle")
        keys[key] += 1
    return keys


def single_edge_removal_isomorphic(r: int, i: int, j: int, k: int, l: int) -> bool:
    """Is ``G1 - (u_i, v_j)`` isomorphic to ``G2 - (w_k, x_l)``?

    Decided on the sparse complements, where removing an edge from the
    dense graph adds it to the forest; components are compared by canonical
    tree codes. Indices are 0-based.
    """
    inst = path_complement_instance(r)
    for name, idx in (("i", i), ("j", j), ("k", k), ("l", l)):
        if not 0 <= idx < r:
            raise ValueError(f"index {name}={idx} out of range for r={r}")
    h1 = _with_edge(inst.sparse1, inst.u[i], inst.v[j])
    h2 = _with_edge(inst.sparse2, inst.w[k], inst.x[l])
    return _component_multiset(h1) == _component_multiset(h2)


# ---------------------------------------------------------------- cut statistics


def two_cut_special_count(g: LabeledGraph, n: int | None = None) -> int:
    """Number of vertex pairs whose cut has the maximum size ``2(n-2)``."""
    if n is None:
        n = g.n
    if n != g.n:
        raise ValueError(f"n={n} does not match the graph's {g.n} vertices")
    iu, iv = np.triu_indices(n, 1)
    return int((two_cut_matrix(g)[iu, iv] == 2 * (n - 2)).sum())


def sample_noisy_cut(g: LabeledGraph, rng=None) -> int:
    """Cut size of a uniform vertex pair in one fresh trace (``p_v=1``, ``p_e=1/2``)."""
    if g.n < 2:
        raise ValueError("need at least two vertices")
    rng = as_generator(rng)
    tr = generate_trace(g, HALF_DELETION, rng).observed
    pair = rng.choice(tr.n, size=2, replace=False)
    return cut_size(tr, pair.tolist())


def noisy_cut_samples(g: LabeledGraph, samples: int, rng=None) -> np.ndarray:
    """Many draws of the same law, sampling only the edges that touch the pair."""
    if g.n < 2:
        raise ValueError("need at least two vertices")
    rng = as_generator(rng)
    cuts = two_cut_matrix(g)
    a = rng.integers(g.n, size=samples)
    b = (a + rng.integers(1, g.n, size=samples)) % g.n
    return rng.binomial(cuts[a, b], 0.5)


def pair_count(n: int) -> int:
    return math.comb(n, 2)
