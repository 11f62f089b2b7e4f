"""Executable versions of the probabilistic facts behind the pairing step.

Everything here is a checker: it counts, partitions or simulates and hands
back numbers that tests compare against closed forms. The event checks read
trace provenance and are kept apart from the reconstruction code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binom

from ._rng import as_generator
from .noise import DELETION, NoiseParams, ParameterError, Trace
from .pairing import ModelConstants, constants_for, hamming_matrix

Pair = tuple[int, int]


# ---------------------------------------------------------------- fixed points


def _pair(a, b) -> Pair:
    return (a, b) if a < b else (b, a)


def count_nonfixed(image_labels: Sequence[int], domain_labels: Optional[Sequence[int]] = None):
    """Count non-fixed points and non-fixed pairs of a labeled bijection.

    Position ``i`` carries label ``domain_labels[i]`` (default ``i``) and is
    sent to a vertex labeled ``image_labels[i]``.

    Returns
    -------
    b : int
        Positions whose label changes.
    m : int
        Pairs ``{i, j}`` whose label set changes.
    """
    img = np.asarray(image_labels)
    dom = np.arange(img.size) if domain_labels is None else np.asarray(domain_labels)
    if dom.shape != img.shape:
        raise ValueError("domain and image must have the same length")
    b = int((dom != img).sum())
    iu, ju = np.triu_indices(img.size, 1)
    same = ((dom[iu] == img[iu]) & (dom[ju] == img[ju])) | (
        (dom[iu] == img[ju]) & (dom[ju] == img[iu])
    )
    return b, int((~same).sum())


def nonfixed_lower_bound(n_prime: int, b: int) -> float:
    """``b (n' - 1 - b/2)``, the guaranteed number of non-fixed pairs."""
    return b * (n_prime - 1 - b / 2)


class PairBijection:
    """A vertex permutation together with the map it induces on vertex pairs."""

    def __init__(self, perm: Sequence[int]):
        perm = [int(x) for x in perm]
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("perm must be a permutation of range(n)")
        self.perm = perm

    @property
    def n(self) -> int:
        return len(self.perm)

    def __call__(self, pair: Pair) -> Pair:
        u, v = pair
        return _pair(self.perm[u], self.perm[v])

    def pairs(self) -> list[Pair]:
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n)]

    def nonfixed_pairs(self) -> list[Pair]:
        return [p for p in self.pairs() if self(p) != p]


@dataclass(frozen=True)
class PairPartition:
    """Three disjoint pair sets covering the non-fixed pairs."""

    parts: tuple[tuple[Pair, ...], tuple[Pair, ...], tuple[Pair, ...]]

    @property
    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(p) for p in self.parts)


def pair_functional_graph(sigma: PairBijection, nodes) -> dict[Pair, Pair]:
    """Arcs ``p -> sigma(p)`` restricted to images that are themselves nodes."""
    nodes = set(nodes)
    return {p: sigma(p) for p in nodes if sigma(p) in nodes}


def _components(nodes: list[Pair], succ: dict[Pair, Pair]):
    """Yield ``(kind, ordered nodes)`` for each path and cycle of the graph."""
    has_pred = set(succ.values())
    seen = set()
    for head in sorted(nodes):
        if head in has_pred:
            continue
        walk = [head]
        while walk[-1] in succ:
            walk.append(succ[walk[-1]])
        seen.update(walk)
        yield "path", walk
    for start in sorted(nodes):
        if start in seen:
            continue
        walk = [start]
        nxt = succ[start]
        while nxt != start:
            walk.append(nxt)
            nxt = succ[nxt]
        seen.update(walk)
        yield "cycle", walk


def partition_nonfixed_pairs(sigma: PairBijection, nonfixed=None) -> PairPartition:
    """Split the non-fixed pairs into three balanced independent sets.

    Nodes are the non-fixed pairs; an arc joins ``p`` to ``sigma(p)``. Every
    node has in- and out-degree at most one, so components are directed
    paths and cycles. Each component is 3-coloured with the colour order
    chosen by its length modulo 3, and after every component the parts are
    re-sorted by decreasing size, which keeps their sizes within one.

    Raises
    ------
    ValueError
        If ``nonfixed`` is given and is not exactly the non-fixed pair set.
    """
    if not isinstance(sigma, PairBijection):
        sigma = PairBijection(sigma)
    expected = sigma.nonfixed_pairs()
    if nonfixed is None:
        nodes = expected
    else:
        nodes = [_pair(*p) for p in nonfixed]
        if len(set(nodes)) != len(nodes) or set(nodes) != set(expected):
            raise ValueError("pair set is not the non-fixed pair set of the bijection")
    succ = pair_functional_graph(sigma, nodes)
    return colour_walks(_components(nodes, succ))


def colour_walks(walks) -> PairPartition:
    """Colour ``(kind, nodes)`` paths and cycles into three balanced parts.

    Paths are swept through the parts in the order 3, 2, 1. Cycles whose
    length is 1 or 2 modulo 3 start with a short prefix that keeps the two
    ends of the cycle apart.
    """
    parts: list[list[Pair]] = [[], [], []]
    for kind, walk in walks:
        L = len(walk)
        if kind == "path" or L % 3 == 0:
            colours = [2, 1, 0] * (L // 3 + 1)
        elif L % 3 == 1:
            colours = [2] + [1, 2, 0] * (L // 3)
        else:
            colours = [1, 2] + [1, 2, 0] * (L // 3)
        for node, c in zip(walk, colours):
            parts[c].append(node)
        parts.sort(key=len, reverse=True)
    return PairPartition(tuple(tuple(p) for p in parts))


def is_independent(part, succ: dict[Pair, Pair]) -> bool:
    members = set(part)
    return not any(p in members and q in members for p, q in succ.items())


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    expected: float
    stderr: float
    samples: int

    def within(self, nsigma: float = 3.0) -> bool:
        return abs(self.estimate - self.expected) <= nsigma * self.stderr


def flip_probability(params: NoiseParams, conditioned: bool) -> float:
    """Closed-form chance that two noisy copies of a pair's state disagree."""
    if params.model == DELETION:
        p = params.p_e
        return p * (1 - p) if conditioned else p * (1 - p / 2)
    f = params.f_e
    return 2 * f * (1 - f) if conditioned else 0.5


def mc_flip_probabilities(params: NoiseParams, conditioned: bool, samples: int, rng=None) -> MCEstimate:
    """Simulate the two-copy disagreement probability directly.

    Deletion: ``X_i ~ Bern(1/2)`` (is the pair an edge), ``Y_i ~ Bern(p_e)``
    (does it survive), disagreement is ``X1 Y1 != X2 Y2``. Flip: ``Z_i``
    uniform on ``{-1, 1}``, ``W_i = -1`` with probability ``f_e``,
    disagreement is ``Z1 W1 != Z2 W2``. ``conditioned`` keeps only draws
    with ``X1 == X2`` (resp. ``Z1 == Z2``), i.e. both copies see the same
    underlying pair.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = as_generator(rng)
    hits = kept = 0
    chunk = 1 << 20
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        if params.model == DELETION:
            x1, x2 = rng.random(m) < 0.5, rng.random(m) < 0.5
            y1, y2 = rng.random(m) < params.p_e, rng.random(m) < params.p_e
            differ = (x1 & y1) != (x2 & y2)
        else:
            x1, x2 = rng.random(m) < 0.5, rng.random(m) < 0.5
            w1, w2 = rng.random(m) < params.f_e, rng.random(m) < params.f_e
            differ = (x1 ^ w1) != (x2 ^ w2)
        if conditioned:
            keep = x1 == x2
            differ = differ[keep]
        hits += int(differ.sum())
        kept += differ.size
    expected = flip_probability(params, conditioned)
    est = hits / kept if kept else float("nan")
    stderr = math.sqrt(expected * (1 - expected) / kept) if kept else float("inf")
    return MCEstimate(est, expected, stderr, kept)


@dataclass(frozen=True)
class TailCheck:
    event: str
    N: int
    empirical: float
    bound: float
    exact: float
    sigma: float
    passed: bool


def tail_bound(params: NoiseParams, N: int) -> float:
    if params.model == DELETION:
        return math.exp(-params.p_e ** 3 * N / 108)
    return math.exp(-(0.5 - params.f_e) ** 4 * N / 4)


def mc_tail_bounds(params: NoiseParams, N: int, samples: int, rng=None, nsigma: float = 3.0):
    """Empirical frequencies of the two binomial tail events of a model.

    Upper tail of ``Bin(N, c1)`` past ``c2 N`` and lower tail of
    ``Bin(N, c4)`` below ``c3 N``, each compared with the exponential bound.
    A check fails when the frequency exceeds the bound by more than
    ``nsigma`` standard errors. The exact binomial tail is reported too.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if samples < 1:
        raise ValueError("samples must be positive")
    if params.model == DELETION and not 0 < params.p_e <= 0.5:
        raise ParameterError("tail bounds need 0 < p_e <= 1/2")
    if params.model != DELETION and not 0.25 <= params.f_e <= 0.5:
        raise ParameterError("tail bounds need 1/4 <= f_e <= 1/2")
    rng = as_generator(rng)
    c = constants_for(params.model, params.edge_param)
    bound = tail_bound(params, N)
    b = min(bound, 1.0)
    sigma = math.sqrt(b * (1 - b) / samples)
    name = "gamma" if params.model == DELETION else "rho"

    upper_cut = math.ceil(c.c2 * N - 1e-9)
    lower_cut = math.floor(c.c3 * N + 1e-9)
    up = rng.binomial(N, c.c1, size=samples)
    low = rng.binomial(N, c.c4, size=samples)
    checks = []
    for event, freq, exact in (
        (f"Bin(N,{name}1)>={name}2*N", float((up >= upper_cut).mean()), float(binom.sf(upper_cut - 1, N, c.c1))),
        (f"Bin(N,{name}4)<={name}3*N", float((low <= lower_cut).mean()), float(binom.cdf(lower_cut, N, c.c4))),
    ):
        checks.append(TailCheck(event, N, freq, bound, exact, sigma, freq <= bound + nsigma * sigma))
    return checks


# ---------------------------------------------------------------- events


def intersection_window(n: int, p_v: float) -> tuple[float, float]:
    """``p_v^2 n -+ r`` with ``r = sqrt(33 p_v^2 n ln n)``."""
    r = math.sqrt(33 * p_v * p_v * n * math.log(n))
    return p_v * p_v * n - r, p_v * p_v * n + r


def check_event_A1(trace1: Trace, trace2: Trace, n: int, p_v: float) -> bool:
    """Does the true overlap of two traces lie within ``p_v^2 n +- r``?"""
    p1 = trace1.require_provenance()
    p2 = trace2.require_provenance()
    lo, hi = intersection_window(n, p_v)
    return lo <= np.intersect1d(p1, p2).size <= hi


@dataclass(frozen=True)
class A3Report:
    m: int
    same_pairs: int
    same_violations: int
    distinct_pairs: int
    distinct_violations: int

    @property
    def insufficient(self) -> bool:
        return self.m < 3

    @property
    def violations(self) -> int:
        return self.same_violations + self.distinct_violations

    @property
    def holds(self) -> bool:
        return not self.insufficient and self.violations == 0


def check_event_A3(trace1: Trace, trace2: Trace, constants: ModelConstants) -> A3Report:
    """Signature separation over the true common vertices.

    Signatures are taken against every common vertex (ordered by original
    id). Same-vertex pairs must have Hamming distance at most ``c2 m``;
    pairs of different vertices at least ``c3 (m - 2)``.
    """
    p1 = trace1.require_provenance()
    p2 = trace2.require_provenance()
    common = np.intersect1d(p1, p2)
    m = common.size
    if m < 3:
        return A3Report(m, 0, 0, 0, 0)
    pos1 = {int(o): i for i, o in enumerate(p1)}
    pos2 = {int(o): i for i, o in enumerate(p2)}
    u1 = np.array([pos1[int(o)] for o in common])
    u2 = np.array([pos2[int(o)] for o in common])
    h = hamming_matrix(
        trace1.observed.adjacency[:, u1].astype(np.uint8),
        trace2.observed.adjacency[:, u2].astype(np.uint8),
    )
    same = p1[:, None] == p2[None, :]
    same_bad = int((h[same] > constants.c2 * m).sum())
    distinct_bad = int((h[~same] < constants.c3 * (m - 2)).sum())
    return A3Report(m, int(same.sum()), same_bad, int((~same).sum()), distinct_bad)
