"""Pairing the common vertices of two unlabeled traces.

The procedure has three stages:

1. pick ``k`` vertices in each trace and a bijection between them that
   minimizes the number of disagreeing pairs (``delta``);
2. describe every vertex by its adjacency to the chosen anchors;
3. pair vertices whose descriptions are within a Hamming threshold.

Stage 1 is exact only for tiny traces (:func:`best_triple_exact`); everything
larger goes through the local search in :func:`best_triple_heuristic`.

Nothing here reads trace provenance except :func:`oracle_pairing`, which
exists for evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._rng import as_generator
from .graph import GraphSizeError, LabeledGraph
from .noise import DELETION, NoiseParams, ParameterError, Trace

EXACT_GUARD = 10**8


@dataclass(frozen=True)
class ModelConstants:
    """Four increasing thresholds; the middle two split ``[c1, c4]`` in thirds."""

    c1: float
    c2: float
    c3: float
    c4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)


def constants_for(model: str, edge_param: float) -> ModelConstants:
    """Constants without any range check; see :func:`model_constants`."""
    if model == DELETION:
        p = edge_param
        c1, c4 = p * (1 - p), p * (1 - p / 2)
    else:
        f = edge_param
        c1, c4 = 2 * f * (1 - f), 0.5
    return ModelConstants(c1, (2 * c1 + c4) / 3, (c1 + 2 * c4) / 3, c4)


def model_constants(params: NoiseParams) -> ModelConstants:
    """Disagreement-rate constants for normalized parameters.

    Deletion: ``c1 = p_e(1-p_e)`` (same vertex) and ``c4 = p_e(1-p_e/2)``
    (different vertices). Flip: ``c1 = 2 f_e(1-f_e)`` and ``c4 = 1/2``.

    Raises
    ------
    ParameterError
        If ``p_e`` is outside ``(0, 1/2]`` or ``f_e`` outside ``[1/4, 1/2)``.
    """
    if not params.is_normalized:
        raise ParameterError(
            f"{params.model} parameter {params.edge_param} is outside the normalized "
            "range; normalize the traces first"
        )
    return constants_for(params.model, params.edge_param)


def algorithm1_params(n: int, p_v: float) -> tuple[float, int]:
    """Intersection slack ``r`` and anchor-set size ``k`` for ``n`` vertices.

    ``r = sqrt(33 p_v^2 n ln n)``; ``k = n`` when ``p_v = 1`` and
    ``ceil(p_v^2 n - r)`` otherwise.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    r = math.sqrt(33 * p_v * p_v * n * math.log(n))
    if p_v == 1:
        return r, n
    k = math.ceil(p_v * p_v * n - r)
    if k <= 0:
        raise ParameterError(
            f"parameters outside reconstructible regime: p_v^2 n = {p_v * p_v * n:.1f} "
            f"does not exceed r = {r:.1f}"
        )
    return r, k


def pairing_threshold(k: int, constants: ModelConstants) -> float:
    """Largest signature Hamming distance at which two vertices are paired."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return k * (constants.c1 + constants.c4) / 2 - 1


# ---------------------------------------------------------------- triples


@dataclass(frozen=True)
class PairingTriple:
    """Anchor sets ``S`` (trace 1) and ``T`` (trace 2); ``S[i]`` maps to ``T[i]``."""

    S: tuple[int, ...]
    T: tuple[int, ...]
    delta: int

    @property
    def k(self) -> int:
        return len(self.S)

    def sort_key(self):
        return (tuple(sorted(self.S)), tuple(sorted(self.T)), _images(self.S, self.T))

    def canonical(self) -> "PairingTriple":
        """Same set map with ``S`` listed in increasing order."""
        order = sorted(range(self.k), key=lambda i: self.S[i])
        return PairingTriple(
            tuple(self.S[i] for i in order), tuple(self.T[i] for i in order), self.delta
        )


def _images(S, T):
    return tuple(t for _, t in sorted(zip(S, T)))


def make_triple(g1: LabeledGraph, g2: LabeledGraph, S: Sequence[int], T: Sequence[int]) -> PairingTriple:
    S = tuple(int(s) for s in S)
    T = tuple(int(t) for t in T)
    if len(S) != len(T):
        raise ValueError("S and T must have the same size")
    if len(set(S)) != len(S) or len(set(T)) != len(T):
        raise ValueError("S and T must not contain repeated vertices")
    return PairingTriple(S, T, delta(g1, g2, S, T))


def delta(
    g1: LabeledGraph,
    g2: LabeledGraph,
    S: Sequence[int],
    T: Sequence[int],
    restrict: Optional[Iterable[tuple[int, int]]] = None,
) -> int:
    """Number of pairs of ``S`` whose edge state disagrees with their image.

    ``S[i]`` is mapped to ``T[i]``. With ``restrict`` only the listed pairs
    ``(u, v)`` of trace-1 vertices are counted; each must lie inside ``S``.
    """
    S = np.asarray(S, dtype=np.intp)
    T = np.asarray(T, dtype=np.intp)
    if S.shape != T.shape:
        raise ValueError("S and T must have the same size")
    mis = g1.adjacency[np.ix_(S, S)] != g2.adjacency[np.ix_(T, T)]
    if restrict is None:
        return int(mis.sum()) // 2
    pos = {int(s): i for i, s in enumerate(S)}
    seen = set()
    total = 0
    for u, v in restrict:
        if u == v or u not in pos or v not in pos:
            raise ValueError(f"pair ({u}, {v}) is not a pair of S")
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        total += int(mis[pos[u], pos[v]])
    return total


def _check_k(g1, g2, k):
    if k < 0 or k > min(g1.n, g2.n):
        raise ValueError(f"k={k} must lie in [0, min(|V1|, |V2|)] = [0, {min(g1.n, g2.n)}]")


def best_triple_exact(g1: LabeledGraph, g2: LabeledGraph, k: int, guard: int = EXACT_GUARD) -> PairingTriple:
    """Global minimizer of ``delta`` over all size-``k`` triples.

    Ties are broken by the smallest ``(sorted S, sorted T, images of sorted S)``.

    Raises
    ------
    GraphSizeError
        If ``C(|V1|,k) C(|V2|,k) k!`` exceeds ``guard``.
    """
    _check_k(g1, g2, k)
    n1, n2 = g1.n, g2.n
    work = math.comb(n1, k) * math.comb(n2, k) * math.factorial(k)
    if work > guard:
        raise GraphSizeError(
            f"exact triple search needs {work} evaluations (guard {guard}); "
            "use best_triple_heuristic"
        )
    if k == 0:
        return PairingTriple((), (), 0)
    iu, ju = np.triu_indices(k, 1)
    A1, A2 = g1.adjacency, g2.adjacency
    sub1 = {S: A1[np.ix_(S, S)][iu, ju] for S in itertools.combinations(range(n1), k)}

    # Image sequences of a sorted S, streamed in chunks to bound memory.
    stream = itertools.permutations(range(n2), k)
    best_delta, best_key = None, None
    while True:
        chunk = list(itertools.islice(stream, 1 << 18))
        if not chunk:
            break
        images = np.array(chunk, dtype=np.intp)
        image_pairs = A2[images[:, iu], images[:, ju]]
        image_keys = np.sort(images, axis=1)
        for S, a in sub1.items():
            d = (image_pairs != a).sum(axis=1)
            low = int(d.min())
            if best_delta is not None and low > best_delta:
                continue
            cand = np.flatnonzero(d == low)
            # lexsort: last key is primary -> order by (sorted T, images)
            cols = [images[cand, c] for c in range(k - 1, -1, -1)] + [
                image_keys[cand, c] for c in range(k - 1, -1, -1)
            ]
            first = cand[np.lexsort(cols)[0]]
            key = (S, tuple(image_keys[first].tolist()), tuple(images[first].tolist()))
            if best_delta is None or low < best_delta or (low == best_delta and key < best_key):
                best_delta, best_key = low, key
    S, _, T = best_key
    return PairingTriple(tuple(S), tuple(T), best_delta)


def _profile(g: LabeledGraph, bins: int = 8) -> np.ndarray:
    """Degree plus the quantiles of each vertex's neighbour degrees."""
    deg = g.degrees.astype(float)
    qs = np.linspace(0, 1, bins)
    prof = np.zeros((g.n, bins + 1))
    prof[:, 0] = deg
    for v in range(g.n):
        nb = deg[g.adjacency[v]]
        if nb.size:
            prof[v, 1:] = np.quantile(nb, qs)
    return prof


def greedy_triple(g1: LabeledGraph, g2: LabeledGraph, k: int) -> PairingTriple:
    """Deterministic starting triple from degree profiles.

    ``S`` and ``T`` are the ``k`` highest-degree vertices of each trace
    (ties to the smaller id) and the bijection solves a linear assignment
    on the distance between degree profiles.
    """
    _check_k(g1, g2, k)
    if k == 0:
        return PairingTriple((), (), 0)
    S = np.sort(np.lexsort((np.arange(g1.n), -g1.degrees))[:k])
    T = np.sort(np.lexsort((np.arange(g2.n), -g2.degrees))[:k])
    p1, p2 = _profile(g1)[S], _profile(g2)[T]
    cost = np.abs(p1[:, None, :] - p2[None, :, :]).sum(axis=2)
    rows, cols = linear_sum_assignment(cost)
    T = T[cols[np.argsort(rows)]]
    return make_triple(g1, g2, S, T)


class _SearchState:
    """Incremental bookkeeping for one (S, T) assignment."""

    def __init__(self, A1, A2, S, T):
        self.A1, self.A2 = A1, A2
        self.S = np.array(S, dtype=np.intp)
        self.T = np.array(T, dtype=np.intp)
        self.refresh()

    def refresh(self):
        A1, A2, S, T = self.A1, self.A2, self.S, self.T
        self.inS = np.zeros(A1.shape[0], dtype=bool)
        self.inS[S] = True
        self.inT = np.zeros(A2.shape[0], dtype=bool)
        self.inT[T] = True
        self.cols1 = A1[:, S]
        self.cols2 = A2[:, T]
        self.ss = self.cols1[S]
        self.tt = self.cols2[T]
        self.mis = self.ss != self.tt
        self.rows = self.mis.sum(axis=1)
        self.delta = int(self.rows.sum()) // 2

    # Each method returns (candidate ids, change in delta per candidate).

    def swap_moves(self, i):
        k = len(self.S)
        q = self.ss[i][None, :] != self.tt          # row j: S_i against T_j's row
        p = self.ss != self.tt[i][None, :]          # row j: S_j against T_i's row
        idx = np.arange(k)
        qsum = q.sum(axis=1) - q[:, i] - q[idx, idx]
        psum = p.sum(axis=1) - p[:, i] - p[idx, idx]
        old = self.rows[i] - self.mis[i] + self.rows - self.mis[:, i]
        change = qsum + psum - old
        keep = idx != i
        return idx[keep], change[keep]

    def replace_s_moves(self, i):
        c = self.cols1 != self.tt[i][None, :]
        change = c.sum(axis=1) - c[:, i] - self.rows[i]
        cand = np.flatnonzero(~self.inS)
        return cand, change[cand]

    def replace_t_moves(self, i):
        c = self.cols2 != self.ss[i][None, :]
        change = c.sum(axis=1) - c[:, i] - self.rows[i]
        cand = np.flatnonzero(~self.inT)
        return cand, change[cand]

    def apply(self, kind, i, x):
        if kind == 0:
            self.T[i], self.T[x] = self.T[x], self.T[i]
        elif kind == 1:
            self.S[i] = x
        else:
            self.T[i] = x
        self.refresh()

    def triple(self):
        return PairingTriple(tuple(self.S.tolist()), tuple(self.T.tolist()), self.delta)


def best_triple_heuristic(
    g1: LabeledGraph,
    g2: LabeledGraph,
    k: int,
    budget: int = 100_000,
    rng=None,
) -> PairingTriple:
    """Local-search approximation of :func:`best_triple_exact`.

    Starts from :func:`greedy_triple` and hill-climbs with three move
    types (swap two images, replace a member of ``S``, replace a member of
    ``T``), accepting only strict decreases of ``delta``. Every candidate
    move whose effect is computed counts against ``budget``. At a local
    optimum the search restarts, either from a perturbation of the best
    triple so far or from a random triple. Stops early at ``delta == 0``.
    """
    _check_k(g1, g2, k)
    rng = as_generator(rng)
    start = greedy_triple(g1, g2, k)
    if budget <= 0 or k == 0 or start.delta == 0:
        return start
    A1, A2 = g1.adjacency, g2.adjacency
    n1, n2 = g1.n, g2.n
    state = _SearchState(A1, A2, start.S, start.T)
    best = state.triple()
    used = 0

    kinds = [0] if k >= 2 else []
    if n1 > k:
        kinds.append(1)
    if n2 > k:
        kinds.append(2)
    if not kinds:
        return best
    evaluators = (state.swap_moves, state.replace_s_moves, state.replace_t_moves)

    while used < budget:
        improved = False
        neighbourhoods = [(kind, i) for kind in kinds for i in range(k)]
        for j in rng.permutation(len(neighbourhoods)):
            kind, i = neighbourhoods[j]
            cand, change = evaluators[kind](i)
            if cand.size == 0:
                continue
            room = budget - used
            if cand.size > room:
                pick = rng.choice(cand.size, size=room, replace=False)
                cand, change = cand[pick], change[pick]
            used += cand.size
            m = int(np.argmin(change))
            if change[m] < 0:
                state.apply(kind, i, int(cand[m]))
                improved = True
                if state.delta < best.delta:
                    best = state.triple()
                    if best.delta == 0:
                        return best.canonical()
            if used >= budget:
                break
        if improved:
            continue
        # Local optimum: keep the canonically smallest of equal-delta optima.
        here = state.triple()
        if here.delta == best.delta and here.sort_key() < best.sort_key():
            best = here
        _restart(state, best, rng, n1, n2)
    here = state.triple()
    if here.delta < best.delta:
        best = here
    return best.canonical()


def _restart(state, best, rng, n1, n2):
    k = len(best.S)
    if rng.random() < 0.25:
        S = rng.choice(n1, size=k, replace=False)
        T = rng.choice(n2, size=k, replace=False)
    else:
        S, T = np.array(best.S), np.array(best.T)
        for _ in range(int(rng.integers(1, max(2, k // 4) + 1))):
            move = int(rng.integers(3))
            i = int(rng.integers(k))
            if move == 0 and k >= 2:
                j = int(rng.integers(k))
                T[i], T[j] = T[j], T[i]
            elif move == 1 and n1 > k:
                outside = np.setdiff1d(np.arange(n1), S)
                S[i] = rng.choice(outside)
            elif move == 2 and n2 > k:
                outside = np.setdiff1d(np.arange(n2), T)
                T[i] = rng.choice(outside)
    state.S, state.T = np.asarray(S, dtype=np.intp), np.asarray(T, dtype=np.intp)
    state.refresh()


# ---------------------------------------------------------------- signatures


def signatures(g: LabeledGraph, anchors: Sequence[int]) -> np.ndarray:
    """Row ``v`` is the 0/1 adjacency of ``v`` to each anchor, in anchor order."""
    anchors = np.asarray(anchors, dtype=np.intp)
    if anchors.size and (anchors.min() < 0 or anchors.max() >= g.n):
        raise ValueError("anchors must be vertices of the trace")
    return g.adjacency[:, anchors].astype(np.uint8)


def hamming_matrix(sig1: np.ndarray, sig2: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between the rows of two 0/1 matrices."""
    a = sig1.astype(np.float64)
    b = sig2.astype(np.float64)
    h = a @ (1.0 - b).T + (1.0 - a) @ b.T
    return np.rint(h).astype(np.int64)


@dataclass(frozen=True)
class Matching:
    """Partial bijection from trace-1 vertices to trace-2 vertices.

    ``ambiguous1`` / ``ambiguous2`` list vertices that qualified against more
    than one partner and were therefore left unmatched.
    """

    pairs: dict = field(default_factory=dict)
    ambiguous1: tuple = ()
    ambiguous2: tuple = ()

    def __post_init__(self):
        if len(set(self.pairs.values())) != len(self.pairs):
            raise ValueError("matching must be injective")

    def __len__(self):
        return len(self.pairs)

    def items(self):
        return sorted(self.pairs.items())


def pair_vertices(
    g1: LabeledGraph, g2: LabeledGraph, triple: PairingTriple, constants: ModelConstants
) -> Matching:
    """Pair vertices whose anchor signatures are within the threshold.

    A vertex that qualifies against several partners is reported as
    ambiguous and left unmatched, as is its would-be partner.
    """
    if triple.k == 0:
        return Matching()
    thr = pairing_threshold(triple.k, constants)
    h = hamming_matrix(signatures(g1, triple.S), signatures(g2, triple.T))
    ok = h <= thr
    row_hits = ok.sum(axis=1)
    col_hits = ok.sum(axis=0)
    unique = ok & (row_hits == 1)[:, None] & (col_hits == 1)[None, :]
    vs, ws = np.nonzero(unique)
    return Matching(
        pairs=dict(zip(vs.tolist(), ws.tolist())),
        ambiguous1=tuple(np.flatnonzero(row_hits > 1).tolist()),
        ambiguous2=tuple(np.flatnonzero(col_hits > 1).tolist()),
    )


def pair_traces(
    g1: LabeledGraph,
    g2: LabeledGraph,
    params: NoiseParams,
    n: int,
    budget: int = 100_000,
    rng=None,
    exact: bool = False,
) -> tuple[PairingTriple, Matching]:
    """The full pairing procedure for two observed traces.

    ``k`` comes from :func:`algorithm1_params`, clipped to the smaller trace
    when the traces are too small to hold ``k`` vertices.
    """
    _, k = algorithm1_params(n, params.p_v)
    k = min(k, g1.n, g2.n)
    constants = model_constants(params)
    if exact:
        triple = best_triple_exact(g1, g2, k)
    else:
        triple = best_triple_heuristic(g1, g2, k, budget, rng)
    return triple, pair_vertices(g1, g2, triple, constants)


def oracle_pairing(trace1: Trace, trace2: Trace) -> Matching:
    """Ground-truth matching of vertices with equal provenance. Evaluation only."""
    p1 = trace1.require_provenance()
    p2 = trace2.require_provenance()
    where2 = {int(o): i for i, o in enumerate(p2)}
    return Matching({i: where2[int(o)] for i, o in enumerate(p1) if int(o) in where2})
