"""Trace generation under the edge-deletion and edge-flip noise models."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Optional, Sequence

import numpy as np

from ._rng import as_generator
from .graph import LabeledGraph, _as_graph

DELETION = "deletion"
FLIP = "flip"


class ParameterError(ValueError):
    """Noise parameters are invalid or outside the range an operation supports."""


class ProvenanceError(RuntimeError):
    """Ground-truth provenance was requested from a trace that withholds it."""


def _check_prob(name, value):
    if value is None or not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParameterError(f"{name} must be a probability in [0, 1], got {value!r}")


@dataclass(frozen=True)
class NoiseParams:
    """Noise model and its probabilities.

    ``p_e`` is the edge survival probability of the deletion model and
    ``f_e`` the per-pair flip probability of the flip model; only the one
    matching ``model`` is used.
    """

    model: Literal["deletion", "flip"]
    p_v: float
    p_e: Optional[float] = None
    f_e: Optional[float] = None

    def __post_init__(self):
        if self.model not in (DELETION, FLIP):
            raise ParameterError(f"unknown noise model {self.model!r}")
        _check_prob("p_v", self.p_v)
        if self.model == DELETION:
            _check_prob("p_e", self.p_e)
        else:
            _check_prob("f_e", self.f_e)

    @classmethod
    def deletion(cls, p_v: float, p_e: float) -> "NoiseParams":
        return cls(DELETION, p_v, p_e=p_e)

    @classmethod
    def flip(cls, p_v: float, f_e: float) -> "NoiseParams":
        return cls(FLIP, p_v, f_e=f_e)

    @property
    def edge_param(self) -> float:
        return self.p_e if self.model == DELETION else self.f_e

    @property
    def is_normalized(self) -> bool:
        if self.model == DELETION:
            return 0.0 < self.p_e <= 0.5
        return 0.25 <= self.f_e < 0.5


@dataclass(frozen=True)
class Trace:
    """An observed trace plus the hidden map from trace ids to original ids.

    Reconstruction code only ever receives ``trace.observed``; evaluation code
    may read ``provenance`` through :meth:`require_provenance`.
    """

    observed: LabeledGraph
    provenance: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.provenance is not None:
            prov = np.asarray(self.provenance, dtype=np.intp)
            if prov.shape != (self.observed.n,):
                raise ValueError("provenance must have one entry per trace vertex")
            if np.unique(prov).size != prov.size:
                raise ValueError("provenance must be injective")
            prov.setflags(write=False)
            object.__setattr__(self, "provenance", prov)

    @property
    def n(self) -> int:
        return self.observed.n

    def withhold(self) -> "Trace":
        """Copy of this trace with provenance removed."""
        return Trace(self.observed, None)

    def require_provenance(self) -> np.ndarray:
        if self.provenance is None:
            raise ProvenanceError("trace provenance has been withheld")
        return self.provenance


def _sym(upper: np.ndarray) -> np.ndarray:
    upper = np.triu(upper, 1)
    return upper | upper.T


def generate_trace(g: LabeledGraph, params: NoiseParams, rng=None) -> Trace:
    """Draw one trace of ``g``.

    Vertices survive independently with probability ``p_v``. The induced
    subgraph is then thinned (deletion model) or has every pair's state
    flipped independently (flip model). Surviving vertices receive fresh ids
    in uniformly random order.
    """
    rng = as_generator(rng)
    kept = np.flatnonzero(rng.random(g.n) < params.p_v)
    m = kept.size
    sub = g.adjacency[np.ix_(kept, kept)]
    coins = _sym(rng.random((m, m)) < params.edge_param)
    if params.model == DELETION:
        obs = sub & coins
    else:
        obs = sub ^ coins
    order = rng.permutation(m)
    observed = _as_graph(obs[np.ix_(order, order)])
    return Trace(observed, kept[order])


def generate_traces(g: LabeledGraph, params: NoiseParams, t: int, rng=None) -> list[Trace]:
    """``t`` independent traces, each drawn from its own spawned generator."""
    rng = as_generator(rng)
    return [generate_trace(g, params, child) for child in rng.spawn(t)]


# ---------------------------------------------------------------- normalization


def normalize_deletion(traces: Sequence[Trace], p_e: float, rng=None):
    """Thin observed edges so the effective survival probability is at most 1/2.

    Returns ``(traces, effective_p_e)``. For ``p_e > 1/2`` every observed edge
    is removed independently with probability ``(p_e - 1/2) / p_e``; otherwise
    the traces are returned unchanged.
    """
    if p_e == 0:
        raise ParameterError("p_e = 0 leaves no edges to normalize")
    _check_prob("p_e", p_e)
    if p_e <= 0.5:
        return list(traces), p_e
    rng = as_generator(rng)
    drop = (p_e - 0.5) / p_e
    out = []
    for tr in traces:
        keep = _sym(rng.random((tr.n, tr.n)) >= drop)
        out.append(replace(tr, observed=_as_graph(tr.observed.adjacency & keep)))
    return out, 0.5


def normalize_flip(traces: Sequence[Trace], f_e: float, rng=None):
    """Map flip traces into the range ``1/4 <= f_e < 1/2``.

    Below 1/4 every pair is flipped with probability
    ``(1/4 - f_e) / (1 - 2 f_e)``; above 1/2 every pair is flipped outright
    (followed by the randomized step if ``1 - f_e`` is still below 1/4).
    Returns ``(traces, effective_f_e)``.
    """
    _check_prob("f_e", f_e)
    if f_e == 0.5:
        raise ParameterError("f_e = 1/2 makes traces independent of the graph")
    if 0.25 <= f_e < 0.5:
        return list(traces), f_e
    rng = as_generator(rng)
    out = []
    if f_e > 0.5:
        for tr in traces:
            adj = ~tr.observed.adjacency
            np.fill_diagonal(adj, False)
            out.append(replace(tr, observed=_as_graph(adj)))
        if 1.0 - f_e < 0.25:
            return normalize_flip(out, 1.0 - f_e, rng)
        return out, 1.0 - f_e
    q = (0.25 - f_e) / (1.0 - 2.0 * f_e)
    for tr in traces:
        flips = _sym(rng.random((tr.n, tr.n)) < q)
        out.append(replace(tr, observed=_as_graph(tr.observed.adjacency ^ flips)))
    return out, 0.25


def normalize(traces: Sequence[Trace], params: NoiseParams, rng=None):
    """Post-process traces into the normalized range; returns ``(traces, params)``."""
    if params.model == DELETION:
        out, p = normalize_deletion(traces, params.p_e, rng)
        return out, replace(params, p_e=p)
    out, f = normalize_flip(traces, params.f_e, rng)
    return out, replace(params, f_e=f)


def normalized_params(params: NoiseParams) -> NoiseParams:
    """Parameters whose traces have the same law as normalized traces of ``params``.

    This is the generation-side twin of :func:`normalize`: drawing traces
    with the returned parameters is equivalent in distribution to drawing
    with ``params`` and post-processing.
    """
    if params.model == DELETION:
        if params.p_e == 0:
            raise ParameterError("p_e = 0 leaves no edges to normalize")
        return replace(params, p_e=min(params.p_e, 0.5))
    f = params.f_e
    if f == 0.5:
        raise ParameterError("f_e = 1/2 makes traces independent of the graph")
    if f > 0.5:
        f = 1.0 - f
    return replace(params, f_e=max(f, 0.25))
