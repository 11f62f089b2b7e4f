import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphtrace.formats import (
    FormatError,
    format_edge_list,
    format_trace_batch,
    parse_edge_list,
    parse_trace_batch,
    read_edge_list,
    read_traces,
    sidecar_path,
    write_edge_list,
    write_rows,
    write_traces,
)
from graphtrace.graph import LabeledGraph, random_graph
from graphtrace.noise import NoiseParams, ProvenanceError, generate_traces


def test_edge_list_text():
    g = LabeledGraph.from_edges(4, [(1, 3), (0, 1)])
    assert format_edge_list(g) == "n 4\n0 1\n1 3\n"
    assert parse_edge_list("# comment\nn 4\n\n0 1\n1 3\n") == g


def test_empty_graph_round_trip():
    assert parse_edge_list(format_edge_list(LabeledGraph.empty(0))).n == 0
    assert parse_edge_list("n 3\n") == LabeledGraph.empty(3)


@pytest.mark.parametrize(
    "text",
    ["", "0 1\n", "n x\n", "n 3\n1 0\n", "n 3\n0 3\n", "n 3\n0 1\n0 1\n", "n 3\n0 1 2\n", "n 3\n1 1\n"],
)
def test_malformed_edge_lists(text):
    with pytest.raises(FormatError):
        parse_edge_list(text)


@settings(max_examples=50)
@given(st.integers(1, 25), st.integers(0, 2**31))
def test_edge_list_round_trip(n, seed):
    g = random_graph(n, seed)
    assert parse_edge_list(format_edge_list(g)) == g


def test_edge_list_files(tmp_path):
    g = random_graph(12, 1)
    write_edge_list(g, tmp_path / "g.edges")
    assert read_edge_list(tmp_path / "g.edges") == g


def test_trace_batch_text():
    a = LabeledGraph.from_edges(2, [(0, 1)])
    b = LabeledGraph.empty(1)
    text = format_trace_batch([a, b])
    assert text == "trace 0\nn 2\n0 1\ntrace 1\nn 1\n"
    assert parse_trace_batch(text) == [a, b]
    assert parse_trace_batch(format_trace_batch([])) == []


@pytest.mark.parametrize("text", ["n 2\n", "trace 1\nn 2\n", "trace 0\n", "trace 0\nn 2\ntrace 0\nn 2\n"])
def test_malformed_batches(text):
    with pytest.raises(FormatError):
        parse_trace_batch(text)


def test_batch_files_keep_provenance_apart(tmp_path):
    traces = generate_traces(random_graph(15, 2), NoiseParams.deletion(0.7, 0.5), 4, 3)
    path = tmp_path / "t.txt"
    side = write_traces(traces, path)
    assert side == sidecar_path(path) == tmp_path / "t.txt.prov.json"
    blind = read_traces(path)
    with pytest.raises(ProvenanceError):
        blind[0].require_provenance()
    full = read_traces(path, with_provenance=True)
    for a, b in zip(traces, full):
        assert a.observed == b.observed
        assert np.array_equal(a.provenance, b.provenance)


def test_withheld_traces_write_no_sidecar(tmp_path):
    traces = [t.withhold() for t in generate_traces(random_graph(5, 1), NoiseParams.deletion(1, 0.5), 2, 1)]
    assert write_traces(traces, tmp_path / "t.txt") is None
    assert not sidecar_path(tmp_path / "t.txt").exists()


def test_sidecar_length_mismatch(tmp_path):
    traces = generate_traces(random_graph(5, 1), NoiseParams.deletion(1, 0.5), 2, 1)
    write_traces(traces, tmp_path / "a.txt")
    write_traces(traces[:1], tmp_path / "b.txt", provenance_path=tmp_path / "b.json")
    with pytest.raises(FormatError):
        read_traces(tmp_path / "a.txt", tmp_path / "b.json", with_provenance=True)


def test_csv_rows():
    buf = io.StringIO()
    write_rows(buf, ("a", "b", "c"), [(True, 0.1, np.int64(3)), (False, 1.0, "")])
    assert buf.getvalue() == "a,b,c\n1,0.1,3\n0,1.0,\n"
