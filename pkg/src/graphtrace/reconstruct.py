"""Reconstruct a graph from many traces.

Pairwise matchings between traces are closed into equivalence classes; each
class stands for one vertex of the hidden graph, and the model's edge rule
decides which classes are adjacent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import sparse

from ._rng import as_generator
from .graph import GraphSizeError, LabeledGraph, _as_graph, small_graph_isomorphic
from .noise import (
    DELETION,
    NoiseParams,
    ParameterError,
    ProvenanceError,
    Trace,
    generate_traces,
    normalize,
)
from .pairing import Matching, oracle_pairing, pair_traces

REFERENCE = "reference"
ALL_PAIRS = "all"
PLANS = (REFERENCE, ALL_PAIRS)
DEFAULT_BUDGET = 20_000
MAX_FALLBACK_PAIRINGS = 2_000
# larger class counts are reported without a dense adjacency matrix
MAX_DENSE_CLASSES = 10_000


def required_traces(params: NoiseParams, n: float) -> int:
    """Number of traces that suffices for reconstruction with high probability.

    ``ceil(4 ln n / (p_v^2 p_e))`` for deletion and
    ``ceil(12 ln n / (p_v^2 (1/2 - f_e)^2))`` for flip.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if params.p_v == 0:
        raise ParameterError("p_v = 0 leaves nothing to observe")
    if params.model == DELETION:
        if params.p_e == 0:
            raise ParameterError("p_e = 0 leaves no edges to observe")
        value = 4 * math.log(n) / (params.p_v**2 * params.p_e)
    else:
        if params.f_e == 0.5:
            raise ParameterError("f_e = 1/2 makes traces independent of the graph")
        value = 12 * math.log(n) / (params.p_v**2 * (0.5 - params.f_e) ** 2)
    # guard against values like 4.000000000000001 from ln(e) rounding
    return math.ceil(round(value, 9))


# ---------------------------------------------------------------- classes


@dataclass(frozen=True)
class LabelAssignment:
    """Class id of every vertex of every trace.

    ``labels[i][v]`` is the class of vertex ``v`` of trace ``i``; class ids
    are dense, numbered in order of first appearance.
    """

    labels: tuple[np.ndarray, ...]
    class_count: int
    conflicts: int = 0

    def __post_init__(self):
        for lab in self.labels:
            if np.unique(lab).size != lab.size:
                raise ValueError("two vertices of one trace share a class")

    def members(self) -> list[list[tuple[int, int]]]:
        """``(trace, vertex)`` members of each class."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.class_count)]
        for i, lab in enumerate(self.labels):
            for v, c in enumerate(lab):
                out[c].append((i, v))
        return out


class _Classes:
    """Union-find over ``(trace, vertex)`` nodes that tracks each root's traces."""

    def __init__(self, sizes: Sequence[int]):
        self.offset = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        total = int(self.offset[-1])
        self.parent = list(range(total))
        self.traces = [{i} for i, s in enumerate(sizes) for _ in range(s)]

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def merge(self, a: int, b: int) -> bool:
        """Union unless the classes share a trace; False means refused."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        if self.traces[ra] & self.traces[rb]:
            return False
        if len(self.traces[ra]) < len(self.traces[rb]):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.traces[ra] |= self.traces[rb]
        self.traces[rb] = set()
        return True


def build_equivalence_classes(trace_sizes: Sequence[int], matchings) -> LabelAssignment:
    """Close pairwise matchings into classes.

    ``matchings`` maps ``(i, j)`` to a matching from vertices of trace ``i``
    to vertices of trace ``j``, or is a sequence of ``((i, j), matching)``
    items. A mapping is applied in sorted key order, a sequence in its own
    order; pairs within a matching go in sorted order. A merge that would put
    two vertices of one trace in the same class is refused and counted as a
    conflict, so the earlier merge wins. Unmatched vertices are singletons.
    """
    if isinstance(matchings, Mapping):
        items = sorted(matchings.items(), key=lambda kv: kv[0])
    else:
        items = list(matchings)
    uf = _Classes(trace_sizes)
    conflicts = 0
    for (i, j), matching in items:
        if not (0 <= i < len(trace_sizes) and 0 <= j < len(trace_sizes)) or i == j:
            raise ValueError(f"invalid trace pair {(i, j)}")
        for a, b in sorted(matching.items()):
            if not uf.merge(int(uf.offset[i] + a), int(uf.offset[j] + b)):
                conflicts += 1

    ids: dict[int, int] = {}
    labels = []
    for i, size in enumerate(trace_sizes):
        lab = np.empty(size, dtype=np.intp)
        for v in range(size):
            lab[v] = ids.setdefault(uf.find(int(uf.offset[i] + v)), len(ids))
        labels.append(lab)
    return LabelAssignment(tuple(labels), len(ids), conflicts)


# ---------------------------------------------------------------- edge rules


@dataclass
class ReconstructionReport:
    """Output of a reconstruction run.

    ``votes`` and ``cooccurrence`` (flip model) are sparse symmetric counts,
    for each class pair, of the traces showing the edge and the traces
    containing both classes. ``reconstructed`` is ``None`` when there were
    too many classes to build a dense graph; such a run is a structural
    failure.
    ``traces`` keeps the generated traces with provenance for a later,
    separate evaluation step; reconstruction itself never reads it.
    """

    reconstructed: Optional[LabeledGraph]
    labels: LabelAssignment
    ambiguous: int = 0
    ties: int = 0
    unseen: int = 0
    votes: Optional[sparse.csr_matrix] = None
    cooccurrence: Optional[sparse.csr_matrix] = None
    edge_count: int = 0
    expected_n: Optional[int] = None
    pairings: int = 0
    used_fallback: bool = False
    traces: list = field(default_factory=list, repr=False)

    @property
    def class_count(self) -> int:
        return self.labels.class_count

    @property
    def conflicts(self) -> int:
        return self.labels.conflicts

    @property
    def structural_failure(self) -> bool:
        return self.expected_n is not None and self.class_count != self.expected_n

    def summary(self) -> dict:
        return {
            "class_count": self.class_count,
            "expected_n": self.expected_n,
            "structural_failure": self.structural_failure,
            "conflicts": self.conflicts,
            "ambiguous": self.ambiguous,
            "ties": self.ties,
            "unseen_pairs": self.unseen,
            "pairings": self.pairings,
            "used_fallback": self.used_fallback,
            "edges": self.edge_count,
        }


def _tally(observed: Sequence[LabeledGraph], labels: LabelAssignment):
    """Per co-occurring class pair ``a < b``: traces showing the edge and traces holding both.

    Returns ``(a, b, shown, both)`` as flat arrays; pairs that never
    co-occur are absent.
    """
    if len(observed) != len(labels.labels):
        raise ValueError("one label array is needed per trace")
    c = labels.class_count
    keys, hits = [], []
    for g, lab in zip(observed, labels.labels):
        if lab.size != g.n:
            raise ValueError("label array does not match trace size")
        iu = np.triu_indices(g.n, 1)
        a, b = lab[iu[0]], lab[iu[1]]
        keys.append(np.minimum(a, b).astype(np.int64) * c + np.maximum(a, b))
        hits.append(g.adjacency[iu])
    if not keys:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    pairs, inv = np.unique(np.concatenate(keys), return_inverse=True)
    both = np.bincount(inv)
    shown = np.bincount(inv, weights=np.concatenate(hits)).astype(np.int64)
    return pairs // c, pairs % c, shown, both


def _counts(a, b, values, c: int) -> sparse.csr_matrix:
    return sparse.coo_matrix((np.concatenate([values, values]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                             shape=(c, c)).tocsr()


def _edges_to_graph(a, b, c: int, dense_limit: int) -> Optional[LabeledGraph]:
    if c > dense_limit:
        return None
    adj = np.zeros((c, c), dtype=bool)
    adj[a, b] = adj[b, a] = True
    return _as_graph(adj)


def _graphs(traces) -> list[LabeledGraph]:
    return [t.observed if isinstance(t, Trace) else t for t in traces]


def reconstruct_deletion(traces, labels: LabelAssignment, dense_limit: int = MAX_DENSE_CLASSES) -> ReconstructionReport:
    """Place an edge between two classes if any trace shows it.

    With more than ``dense_limit`` classes the graph is not materialized
    and ``reconstructed`` is ``None``.
    """
    a, b, shown, _ = _tally(_graphs(traces), labels)
    keep = shown > 0
    return ReconstructionReport(
        _edges_to_graph(a[keep], b[keep], labels.class_count, dense_limit), labels, edge_count=int(keep.sum())
    )


def reconstruct_flip(traces, labels: LabelAssignment, dense_limit: int = MAX_DENSE_CLASSES) -> ReconstructionReport:
    """Strict-majority rule over traces containing both classes.

    Ties and pairs seen together in no trace become non-edges; both are
    counted in the report. ``votes`` and ``cooccurrence`` are sparse.
    """
    c = labels.class_count
    a, b, shown, both = _tally(_graphs(traces), labels)
    keep = 2 * shown > both
    return ReconstructionReport(
        _edges_to_graph(a[keep], b[keep], c, dense_limit),
        labels,
        ties=int((2 * shown == both).sum()),
        unseen=c * (c - 1) // 2 - len(both),
        votes=_counts(a, b, shown, c),
        cooccurrence=_counts(a, b, both, c),
        edge_count=int(keep.sum()),
    )


# ---------------------------------------------------------------- plans


def pairing_plan(t: int, plan: str = REFERENCE) -> list[tuple[int, int]]:
    """Trace pairs to match.

    ``reference`` pairs every trace with the first ``ceil(log2 t) + 1``
    traces; ``all`` uses every pair.
    """
    if plan == ALL_PAIRS:
        return [(i, j) for i in range(t) for j in range(i + 1, t)]
    if plan != REFERENCE:
        raise ValueError(f"unknown pairing plan {plan!r}; choose from {PLANS}")
    if t < 2:
        return []
    refs = min(t, math.ceil(math.log2(t)) + 1)
    return sorted({(min(i, r), max(i, r)) for r in range(refs) for i in range(t) if i != r})


def _edge_rule_traces(traces: Sequence[Trace], params: NoiseParams) -> list[LabeledGraph]:
    """Traces the edge rule votes on: raw, except flip traces above 1/2 are inverted."""
    graphs = [t.observed for t in traces]
    if params.model == DELETION or params.f_e <= 0.5:
        return graphs
    out = []
    for g in graphs:
        adj = ~g.adjacency
        np.fill_diagonal(adj, False)
        out.append(_as_graph(adj))
    return out


def reconstruct_end_to_end(
    G: LabeledGraph,
    params: NoiseParams,
    t: int,
    budget: int = DEFAULT_BUDGET,
    rng=None,
    plan: str = REFERENCE,
    pairing: str = "algorithm1",
    fallback: bool = True,
    max_fallback_pairings: int = MAX_FALLBACK_PAIRINGS,
) -> ReconstructionReport:
    """Generate ``t`` traces of ``G`` and reconstruct from them.

    Pairing runs on normalized traces; the edge rule votes on the raw ones
    (inverted when ``f_e > 1/2``). If the chosen plan leaves the class count
    different from ``n``, the remaining trace pairs are matched as well as
    long as the total stays within ``max_fallback_pairings``.

    ``pairing="oracle"`` replaces the pairing procedure with provenance and
    is meant for testing the later stages in isolation.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if pairing not in ("algorithm1", "oracle"):
        raise ValueError(f"unknown pairing {pairing!r}")
    pairing_plan(0, plan)
    rng = as_generator(rng)
    gen_rng, norm_rng, pair_rng = rng.spawn(3)
    traces = generate_traces(G, params, t, gen_rng)
    if params.model == DELETION and params.p_e == 0:
        pair_side, pair_params = list(traces), params
    else:
        pair_side, pair_params = normalize(traces, params, norm_rng)
    votes_on = _edge_rule_traces(traces, params)
    sizes = [tr.n for tr in traces]

    ambiguous = 0
    matchings: dict[tuple[int, int], Matching] = {}

    def run(pairs):
        nonlocal ambiguous
        for (i, j), child in zip(pairs, pair_rng.spawn(len(pairs))):
            if pairing == "oracle":
                m = oracle_pairing(traces[i], traces[j])
            else:
                _, m = pair_traces(
                    pair_side[i].observed, pair_side[j].observed, pair_params, G.n, budget, child
                )
            ambiguous += len(m.ambiguous1) + len(m.ambiguous2)
            matchings[(i, j)] = m

    run(pairing_plan(t, plan))
    labels = build_equivalence_classes(sizes, matchings)
    used_fallback = False
    if fallback and plan != ALL_PAIRS and t > 0 and labels.class_count != G.n:
        rest = [p for p in pairing_plan(t, ALL_PAIRS) if p not in matchings]
        if rest and len(matchings) + len(rest) <= max_fallback_pairings:
            run(rest)
            labels = build_equivalence_classes(sizes, matchings)
            used_fallback = True

    rule = reconstruct_deletion if params.model == DELETION else reconstruct_flip
    report = rule(votes_on, labels, max(MAX_DENSE_CLASSES, G.n))
    report.ambiguous = ambiguous
    report.expected_n = G.n
    report.pairings = len(matchings)
    report.used_fallback = used_fallback
    report.traces = traces
    return report


# ---------------------------------------------------------------- evaluation


def class_origins(report: ReconstructionReport) -> Optional[np.ndarray]:
    """Original vertex of each class via provenance, or ``None`` if classes mix vertices.

    Evaluation only.
    """
    origin = np.full(report.class_count, -1, dtype=np.intp)
    for tr, lab in zip(report.traces, report.labels.labels):
        prov = tr.require_provenance()
        for c, o in zip(lab, prov):
            if origin[c] == -1:
                origin[c] = o
            elif origin[c] != o:
                return None
    return origin


def evaluate_reconstruction(report: ReconstructionReport, G: LabeledGraph) -> bool:
    """Does the output equal ``G`` under the provenance-induced class labeling?

    Falls back to :func:`small_graph_isomorphic` when provenance is missing.
    """
    if report.class_count != G.n or report.reconstructed is None:
        return False
    try:
        origin = class_origins(report)
    except ProvenanceError:
        try:
            return small_graph_isomorphic(report.reconstructed, G)
        except GraphSizeError:
            return False
    if origin is None or np.unique(origin).size != G.n or (origin < 0).any():
        return False
    return bool(
        np.array_equal(report.reconstructed.adjacency, G.adjacency[np.ix_(origin, origin)])
    )
