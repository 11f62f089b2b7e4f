"""Command-line entry point.

Subcommands::

    graphtrace reconstruct   sweep of seeded reconstruction trials (CSV)
    graphtrace verify        probability and bound checks (CSV, exit 1 on failure)
    graphtrace bounds coupling|cutstats
    graphtrace gen           write traces of a random graph to files
    graphtrace pair          pair two traces from a batch file

Settings can come from ``--config file.json``; flags given on the command
line win. Relative output paths are placed under ``$GRAPHTRACE_OUTPUT_DIR``
when it is set.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    CHECKS,
    ConfigError,
    ExperimentConfig,
    coupling_table,
    cutstats_table,
    parse_t,
    run_reconstruction_sweep,
    run_verify_suite,
)
from .formats import read_traces, write_edge_list, write_rows, write_traces
from .graph import random_graph
from .noise import NoiseParams, ParameterError, generate_traces, normalize
from .pairing import oracle_pairing, pair_traces

OUTPUT_ENV = "GRAPHTRACE_OUTPUT_DIR"


def output_path(name: str | None) -> Path | None:
    if name is None:
        return None
    path = Path(name)
    base = os.environ.get(OUTPUT_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def emit(text: str, name: str | None) -> None:
    path = output_path(name)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("deletion", "flip"))
    p.add_argument("--p-v", dest="p_v", type=float)
    p.add_argument("--p-e", dest="p_e", type=float)
    p.add_argument("--f-e", dest="f_e", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphtrace", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    rec = sub.add_parser("reconstruct", help="seeded reconstruction sweep")
    _model_flags(rec)
    rec.add_argument("--config", help="JSON file with defaults for these flags")
    rec.add_argument("--t", type=parse_t, help="'auto', a count, or a comma list")
    rec.add_argument("--trials", type=int)
    rec.add_argument("--budget", type=int, help="local search budget per trace pair")
    rec.add_argument("--plan", choices=("reference", "all"))
    rec.add_argument("--pairing", choices=("algorithm1", "oracle"))
    rec.add_argument("--timing", action="store_true", default=None, help="fill the wall_time column")
    rec.add_argument("--output", help="CSV path (default: stdout)")
    rec.add_argument("--artifacts", help="directory for per-trial report JSON and edge lists")

    ver = sub.add_parser("verify", help="run probability and bound checks")
    ver.add_argument("--config")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--checks", type=lambda s: s.split(","), help=f"comma list from: {', '.join(CHECKS)}")
    ver.add_argument("--samples", type=int, help="override the Monte-Carlo sample count")
    ver.add_argument("--output")

    bnd = sub.add_parser("bounds", help="lower-bound constructions")
    bsub = bnd.add_subparsers(dest="which", required=True)
    cp = bsub.add_parser("coupling")
    cp.add_argument("--n", type=int, default=10)
    cp.add_argument("--samples", type=int, default=10**5)
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--output")
    cs = bsub.add_parser("cutstats")
    cs.add_argument("--r", type=lambda s: [int(x) for x in s.split(",")], default=[2, 3, 4])
    cs.add_argument("--output")

    gen = sub.add_parser("gen", help="write traces of a random graph")
    _model_flags(gen)
    gen.add_argument("--t", type=int, required=True)
    gen.add_argument("--traces", required=True, help="trace batch output file")
    gen.add_argument("--graph", help="also write the hidden graph as an edge list")

    pr = sub.add_parser("pair", help="pair two traces of a batch file")
    _model_flags(pr)
    pr.add_argument("traces", help="trace batch file")
    pr.add_argument("--i", type=int, default=0)
    pr.add_argument("--j", type=int, default=1)
    pr.add_argument("--budget", type=int, default=20_000)
    pr.add_argument("--provenance", action="store_true", help="score the matching with the sidecar")
    pr.add_argument("--output")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
    for key in ("seed", "model", "p_v", "p_e", "f_e", "n", "t", "trials", "budget",
                "plan", "pairing", "timing", "output", "checks", "samples"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    data["subcommand"] = args.subcommand
    return ExperimentConfig.from_dict(data)


def _params(args) -> NoiseParams:
    model = args.model or "deletion"
    if model == "deletion":
        return NoiseParams.deletion(1.0 if args.p_v is None else args.p_v, 0.5 if args.p_e is None else args.p_e)
    return NoiseParams.flip(1.0 if args.p_v is None else args.p_v, 0.25 if args.f_e is None else args.f_e)


def cmd_reconstruct(args) -> int:
    cfg = config_from_args(args)
    artifacts = output_path(args.artifacts + "/x") if args.artifacts else None

    def save(row, report, G):
        if artifacts is None:
            return
        stem = artifacts.parent / f"t{row[4]}_trial{row[6]}"
        summary = dict(report.summary(), success=bool(row[7]), t=row[4], trial=row[6], seed=cfg.seed)
        stem.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if report.reconstructed is not None:
            write_edge_list(report.reconstructed, stem.with_suffix(".edges"))

    emit(run_reconstruction_sweep(cfg, save).to_csv(), cfg.output)
    return 0


def cmd_verify(args) -> int:
    if args.samples is not None and args.samples < 1:
        raise ConfigError(f"samples: must be positive, got {args.samples}")
    cfg = config_from_args(args)
    table = run_verify_suite(cfg)
    emit(table.to_csv(), cfg.output)
    return 0 if table.passed else 1


def cmd_bounds(args) -> int:
    if args.which == "coupling":
        if args.samples < 1:
            raise ConfigError(f"samples: must be positive, got {args.samples}")
        table = coupling_table(args.n, args.samples, args.seed)
    else:
        table = cutstats_table(args.r)
    emit(table.to_csv(), args.output)
    return 0


def cmd_gen(args) -> int:
    if args.seed is None:
        raise ConfigError("seed: a seed is required")
    if args.n is None:
        raise ConfigError("n: the number of vertices is required")
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    graph_rng, trace_rng = rng.spawn(2)
    G = random_graph(args.n, graph_rng)
    traces = generate_traces(G, params, args.t, trace_rng)
    side = write_traces(traces, output_path(args.traces))
    if args.graph:
        write_edge_list(G, output_path(args.graph))
    print(f"wrote {len(traces)} traces; provenance in {side}", file=sys.stderr)
    return 0


def cmd_pair(args) -> int:
    if args.n is None:
        raise ConfigError("n: the original vertex count is required")
    params = _params(args)
    traces = read_traces(args.traces, with_provenance=args.provenance)
    norm_rng, pair_rng = np.random.default_rng(args.seed or 0).spawn(2)
    (t1, t2), params = normalize([traces[args.i], traces[args.j]], params, norm_rng)
    triple, matching = pair_traces(t1.observed, t2.observed, params, args.n, args.budget, pair_rng)
    buf = io.StringIO()
    write_rows(buf, ("u", "v"), sorted(matching.items()))
    emit(buf.getvalue(), args.output)
    info = {
        "k": triple.k,
        "delta": triple.delta,
        "matched": len(matching),
        "ambiguous1": len(matching.ambiguous1),
        "ambiguous2": len(matching.ambiguous2),
    }
    if args.provenance:
        truth = oracle_pairing(traces[args.i], traces[args.j]).pairs
        correct = sum(truth.get(a) == b for a, b in matching.items())
        info["precision"] = correct / len(matching) if len(matching) else None
        info["recall"] = correct / len(truth) if truth else None
    print(json.dumps(info, sort_keys=True), file=sys.stderr)
    return 0


COMMANDS = {
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "gen": cmd_gen,
    "pair": cmd_pair,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.subcommand](args)
    except (ConfigError, ParameterError) as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
