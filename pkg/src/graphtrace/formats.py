"""Plain-text graph and trace files.

Edge list::

    n 4
    0 1
    1 3

Trace batch: edge-list blocks, each preceded by a ``trace <i>`` line.
Provenance lives in a JSON sidecar (``{"provenance": [[...], ...]}``) so a
batch can be handed to reconstruction with the ground truth left behind.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .graph import LabeledGraph, _as_graph
from .noise import Trace


class FormatError(ValueError):
    """A graph or trace file is malformed."""


def _edge_lines(g: LabeledGraph) -> list[str]:
    return [f"n {g.n}"] + [f"{u} {v}" for u, v in g.edges()]


def format_edge_list(g: LabeledGraph) -> str:
    return "\n".join(_edge_lines(g)) + "\n"


def _parse_block(lines: Sequence[tuple[int, str]]) -> LabeledGraph:
    if not lines:
        raise FormatError("missing 'n <count>' line")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "n" or not parts[1].isdigit():
        raise FormatError(f"line {lineno}: expected 'n <count>', got {head!r}")
    n = int(parts[1])
    adj = np.zeros((n, n), dtype=bool)
    for lineno, text in lines[1:]:
        fields = text.split()
        try:
            u, v = (int(x) for x in fields)
        except ValueError:
            raise FormatError(f"line {lineno}: expected 'u v', got {text!r}") from None
        if not 0 <= u < v < n:
            raise FormatError(f"line {lineno}: need 0 <= u < v < {n}, got {u} {v}")
        if adj[u, v]:
            raise FormatError(f"line {lineno}: duplicate edge {u} {v}")
        adj[u, v] = adj[v, u] = True
    return _as_graph(adj)


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append((i, line))
    return out


def parse_edge_list(text: str) -> LabeledGraph:
    return _parse_block(_content_lines(text))


def write_edge_list(g: LabeledGraph, path: str | os.PathLike) -> None:
    Path(path).write_text(format_edge_list(g))


def read_edge_list(path: str | os.PathLike) -> LabeledGraph:
    return parse_edge_list(Path(path).read_text())


def sidecar_path(path: str | os.PathLike) -> Path:
    """Default provenance location next to a trace batch file."""
    path = Path(path)
    return path.with_name(path.name + ".prov.json")


def format_trace_batch(graphs: Iterable[LabeledGraph]) -> str:
    lines = []
    for i, g in enumerate(graphs):
        lines.append(f"trace {i}")
        lines.extend(_edge_lines(g))
    return "\n".join(lines) + "\n" if lines else ""


def parse_trace_batch(text: str) -> list[LabeledGraph]:
    blocks: list[list[tuple[int, str]]] = []
    for lineno, line in _content_lines(text):
        fields = line.split()
        if fields[0] == "trace":
            if len(fields) != 2 or fields[1] != str(len(blocks)):
                raise FormatError(f"line {lineno}: expected 'trace {len(blocks)}', got {line!r}")
            blocks.append([])
        elif not blocks:
            raise FormatError(f"line {lineno}: content before the first 'trace' header")
        else:
            blocks[-1].append((lineno, line))
    return [_parse_block(b) for b in blocks]


def write_traces(traces: Sequence[Trace], path, provenance_path=None) -> Path | None:
    """Write a batch; provenance goes to a sidecar when every trace carries it.

    Returns the sidecar path, or ``None`` when nothing was written there.
    """
    Path(path).write_text(format_trace_batch(t.observed for t in traces))
    if not traces or any(t.provenance is None for t in traces):
        return None
    side = Path(provenance_path) if provenance_path else sidecar_path(path)
    side.write_text(json.dumps({"provenance": [t.provenance.tolist() for t in traces]}) + "\n")
    return side


def read_traces(path, provenance_path=None, with_provenance: bool = False) -> list[Trace]:
    """Read a batch, attaching provenance only when asked to."""
    graphs = parse_trace_batch(Path(path).read_text())
    if not with_provenance:
        return [Trace(g) for g in graphs]
    side = Path(provenance_path) if provenance_path else sidecar_path(path)
    prov = json.loads(side.read_text())["provenance"]
    if len(prov) != len(graphs):
        raise FormatError(f"sidecar has {len(prov)} entries for {len(graphs)} traces")
    return [Trace(g, np.asarray(p, dtype=np.intp)) for g, p in zip(graphs, prov)]


def write_rows(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with ``\\n`` line endings and repr-stable float formatting."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x
