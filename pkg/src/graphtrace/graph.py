"""Labeled graphs on dense integer vertex ids.

A :class:`LabeledGraph` wraps a symmetric boolean adjacency matrix with a zero
diagonal. Graphs are immutable once built; every builder returns a new graph.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from ._rng import as_generator


class GraphSizeError(ValueError):
    """Raised when an exact search is asked to handle an instance beyond its guard."""


class LabeledGraph:
    """Undirected simple graph on vertices ``0..n-1``.

    Parameters
    ----------
    adjacency : array_like of bool, shape (n, n)
        Symmetric adjacency matrix with a zero diagonal. It is copied and
        frozen, so the caller may keep mutating its own array.
    """

    __slots__ = ("_adj", "_degrees")

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj.setflags(write=False)
        self._adj = adj
        self._degrees = None

    @classmethod
    def empty(cls, n: int) -> "LabeledGraph":
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabeledGraph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._adj

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            deg = self._adj.sum(axis=1)
            deg.setflags(write=False)
            self._degrees = deg
        return self._degrees

    @property
    def edge_count(self) -> int:
        return int(self._adj.sum()) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self._adj[v])

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` pairs with ``u < v``, in lexicographic order."""
        iu, iv = np.nonzero(np.triu(self._adj, 1))
        return list(zip(iu.tolist(), iv.tolist()))

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.n, np.packbits(self._adj).tobytes()))

    def __repr__(self):
        return f"LabeledGraph(n={self.n}, edges={self.edge_count})"


def _as_graph(adj: np.ndarray) -> LabeledGraph:
    # Internal fast path: caller guarantees a fresh, valid matrix.
    g = LabeledGraph.__new__(LabeledGraph)
    adj.setflags(write=False)
    g._adj = adj
    g._degrees = None
    return g


# ---------------------------------------------------------------- generators


def random_graph(n: int, seed=None) -> LabeledGraph:
    """Sample from G(n, 1/2).

    Each unordered pair is an edge independently with probability 1/2. The
    result depends only on ``seed`` (an int, a ``SeedSequence`` or a
    ``numpy.random.Generator``).
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = as_generator(seed)
    upper = np.triu(rng.random((n, n)) < 0.5, 1)
    return _as_graph(upper | upper.T)


def complete(n: int) -> LabeledGraph:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return _as_graph(adj)


def path(n: int) -> LabeledGraph:
    """Path ``0 - 1 - ... - n-1``."""
    if n < 1:
        raise ValueError(f"path needs n >= 1, got {n}")
    return LabeledGraph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle(n: int) -> LabeledGraph:
    """Cycle ``0 - 1 - ... - n-1 - 0``."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return LabeledGraph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def complement(g: LabeledGraph) -> LabeledGraph:
    adj = ~g.adjacency
    np.fill_diagonal(adj, False)
    return _as_graph(adj)


def disjoint_union(graphs: Sequence[LabeledGraph]) -> LabeledGraph:
    """Vertex-disjoint union; the i-th graph's vertices follow those of graph i-1."""
    total = sum(g.n for g in graphs)
    adj = np.zeros((total, total), dtype=bool)
    offset = 0
    for g in graphs:
        adj[offset:offset + g.n, offset:offset + g.n] = g.adjacency
        offset += g.n
    return _as_graph(adj)


def induced_subgraph(g: LabeledGraph, vertices: Sequence[int]) -> LabeledGraph:
    """Subgraph induced on ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
    idx = np.asarray(vertices, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise ValueError("vertex set is not a subset of the graph's vertices")
    if np.unique(idx).size != idx.size:
        raise ValueError("vertex set contains duplicates")
    return _as_graph(g.adjacency[np.ix_(idx, idx)].copy())


def relabel(g: LabeledGraph, perm: Sequence[int]) -> LabeledGraph:
    """Return the graph in which old vertex ``v`` is called ``perm[v]``."""
    perm = np.asarray(perm, dtype=np.intp)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise ValueError("perm must be a permutation of range(n)")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(g.n)
    return _as_graph(g.adjacency[np.ix_(inv, inv)].copy())


# ---------------------------------------------------------------- cut statistics


def cut_size(g: LabeledGraph, subset: Iterable[int]) -> int:
    """Number of edges with exactly one endpoint in ``subset``."""
    members = np.zeros(g.n, dtype=bool)
    idx = np.fromiter(subset, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise ValueError("subset is not contained in the vertex set")
    members[idx] = True
    return int(g.adjacency[np.ix_(members, ~members)].sum())


def two_cut_matrix(g: LabeledGraph) -> np.ndarray:
    """``M[u, v] = cut_size(g, {u, v})`` for ``u != v`` (diagonal is meaningless)."""
    deg = g.degrees.astype(np.int64)
    return deg[:, None] + deg[None, :] - 2 * g.adjacency.astype(np.int64)


def two_cut_distribution(g: LabeledGraph) -> np.ndarray:
    """Sorted multiset of cut sizes over all C(n, 2) vertex pairs."""
    if g.n < 2:
        raise ValueError("the 2-cut distribution needs at least two vertices")
    iu, iv = np.triu_indices(g.n, 1)
    return np.sort(two_cut_matrix(g)[iu, iv])


# ---------------------------------------------------------------- isomorphism

MAX_GENERAL_COMPONENT = 12


def connected_components(g: LabeledGraph) -> list[np.ndarray]:
    """Vertex arrays of the connected components, ordered by smallest vertex."""
    seen = np.zeros(g.n, dtype=bool)
    comps = []
    adj = g.adjacency
    for start in range(g.n):
        if seen[start]:
            continue
        frontier = [start]
        seen[start] = True
        members = [start]
        while frontier:
            v = frontier.pop()
            for w in np.flatnonzero(adj[v] & ~seen):
                seen[w] = True
                frontier.append(int(w))
                members.append(int(w))
        comps.append(np.sort(np.array(members, dtype=np.intp)))
    return comps


def _tree_code(adj: np.ndarray) -> str:
    """AHU canonical string of a tree given as a small adjacency matrix."""
    n = adj.shape[0]
    if n == 1:
        return "()"
    nbrs = [np.flatnonzero(adj[v]).tolist() for v in range(n)]
    # Peel leaves to find the center(s).
    deg = [len(x) for x in nbrs]
    layer = [v for v in range(n) if deg[v] <= 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for leaf in layer:
            for w in nbrs[leaf]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    centers = layer

    def encode(v, parent):
        kids = sorted(encode(w, v) for w in nbrs[v] if w != parent)
        return "(" + "".join(kids) + ")"

    return min(encode(c, -1) for c in centers)


def component_key(g: LabeledGraph, members: np.ndarray):
    """Canonical key for trees and cycles, ``None`` for anything else."""
    sub = g.adjacency[np.ix_(members, members)]
    k = len(members)
    edges = int(sub.sum()) // 2
    if edges == k - 1:
        return ("tree", _tree_code(sub))
    if edges == k and (sub.sum(axis=1) == 2).all():
        return ("cycle", k)
    return None


def _backtrack_isomorphic(a: np.ndarray, b: np.ndarray) -> bool:
    n = a.shape[0]
    if n != b.shape[0] or a.sum() != b.sum():
        return False
    da, db = a.sum(axis=1), b.sum(axis=1)
    if sorted(da.tolist()) != sorted(db.tolist()):
        return False
    # Refine each vertex by (degree, sorted neighbour degrees).
    fa = [(int(da[v]), tuple(sorted(da[a[v]].tolist()))) for v in range(n)]
    fb = [(int(db[v]), tuple(sorted(db[b[v]].tolist()))) for v in range(n)]
    classes = Counter(fa)
    if classes != Counter(fb):
        return False
    # Rarest refinement class first keeps the branching factor low.
    order = sorted(range(n), key=lambda v: (classes[fa[v]], -da[v]))
    mapping = [-1] * n
    used = [False] * n

    def extend(depth):
        if depth == n:
            return True
        v = order[depth]
        for w in range(n):
            if used[w] or fb[w] != fa[v]:
                continue
            ok = True
            for d in range(depth):
                u = order[d]
                if a[v, u] != b[w, mapping[u]]:
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used[w] = True
                if extend(depth + 1):
                    return True
                used[w] = False
        mapping[v] = -1
        return False

    return extend(0)


def small_graph_isomorphic(g1: LabeledGraph, g2: LabeledGraph) -> bool:
    """Exact isomorphism test for graphs made of small pieces.

    Components that are trees or cycles are compared by canonical form, so
    forests and unions of cycles of any size are fine. Any other component
    must have at most ``MAX_GENERAL_COMPONENT`` vertices; those are matched
    by backtracking with degree refinement.

    Raises
    ------
    GraphSizeError
        If a component is neither a tree nor a cycle and is too large.
    """
    if g1.n != g2.n or g1.edge_count != g2.edge_count:
        return False
    if sorted(g1.degrees.tolist()) != sorted(g2.degrees.tolist()):
        return False

    def split(g):
        keyed, general = Counter(), []
        for members in connected_components(g):
            key = component_key(g, members)
            if key is not None:
                keyed[key] += 1
                continue
            if len(members) > MAX_GENERAL_COMPONENT:
                raise GraphSizeError(
                    f"component with {len(members)} vertices exceeds the exact "
                    f"isomorphism guard of {MAX_GENERAL_COMPONENT}"
                )
            general.append(g.adjacency[np.ix_(members, members)])
        return keyed, general

    keyed1, general1 = split(g1)
    keyed2, general2 = split(g2)
    if keyed1 != keyed2 or len(general1) != len(general2):
        return False
    # Isomorphism is an equivalence relation, so greedy pairing is exact.
    unmatched = list(general2)
    for a in general1:
        for i, b in enumerate(unmatched):
            if _backtrack_isomorphic(a, b):
                del unmatched[i]
                break
        else:
            return False
    return True
