import json

import pytest

from graphtrace.cli import OUTPUT_ENV, main
from graphtrace.experiments import (
    CHECKS,
    SWEEP_HEADER,
    VERIFY_HEADER,
    ConfigError,
    ExperimentConfig,
    run_reconstruction_sweep,
    run_verify_suite,
    success_rates,
)
from graphtrace.formats import read_edge_list, read_traces


def sweep(**kw):
    base = dict(seed=1, subcommand="reconstruct", n=10, t=[3], trials=2, budget=200)
    base.update(kw)
    return run_reconstruction_sweep(ExperimentConfig.from_dict(base))


# ------------------------------------------------------------------ config


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="seed"):
        ExperimentConfig.from_dict({"subcommand": "reconstruct"}).validate()


def test_unknown_field_is_named():
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict({"seed": 1, "colour": "red"})


def test_auto_t_resolves():
    cfg = ExperimentConfig.from_dict({"seed": 1, "n": 100, "t": ["auto"]})
    assert cfg.resolved_t() == [37]


def test_anchor_count_must_be_positive():
    with pytest.raises(ConfigError, match="p_v"):
        sweep(n=200, p_v=0.8, t=[2], trials=1)


# ------------------------------------------------------------------ sweep


def test_zero_trials_header_only():
    assert sweep(trials=0).to_csv() == ",".join(SWEEP_HEADER) + "\n"


def test_sweep_rows_and_determinism():
    a = sweep(t=[4, 2], trials=3)
    assert [(r[4], r[6]) for r in a.rows] == [(2, 0), (2, 1), (2, 2), (4, 0), (4, 1), (4, 2)]
    assert a.to_csv() == sweep(t=[4, 2], trials=3).to_csv()
    assert all(r[-1] == "" for r in a.rows)
    assert all(r[-1] != "" for r in sweep(timing=True).rows)


def test_oracle_sweep_success_non_decreasing():
    # with oracle pairing success only depends on edge coverage
    table = sweep(n=12, t=[1, 4, 12], trials=10, pairing="oracle")
    rates = success_rates(table)
    assert rates[1] <= rates[4] <= rates[12]
    assert rates[12] == 1.0


def test_verify_unknown_check_lists_available():
    cfg = ExperimentConfig.from_dict({"seed": 1, "subcommand": "verify", "checks": ["nope"]})
    with pytest.raises(ConfigError) as err:
        run_verify_suite(cfg)
    assert all(name in str(err.value) for name in CHECKS)


def test_verify_small_grid():
    cfg = ExperimentConfig.from_dict(
        {"seed": 2, "subcommand": "verify", "checks": ["nonfixed_pairs", "partition", "cutstats"], "samples": 50}
    )
    table = run_verify_suite(cfg)
    assert table.header == VERIFY_HEADER
    assert table.rows and table.passed


# ------------------------------------------------------------------ command line


def test_cli_reconstruct_stdout(capsys):
    assert main(["reconstruct", "--seed", "3", "--n", "8", "--t", "2", "--trials", "2", "--budget", "100"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(SWEEP_HEADER)
    assert len(out.splitlines()) == 3


def test_cli_config_and_flags(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 3, "n": 8, "t": [2], "trials": 1, "budget": 100}))
    main(["reconstruct", "--config", str(conf), "--trials", "2"])
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_cli_byte_identical(tmp_path):
    args = ["reconstruct", "--seed", "5", "--n", "9", "--t", "2,3", "--trials", "2", "--budget", "50"]
    main(args + ["--output", str(tmp_path / "a.csv")])
    main(args + ["--output", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_cli_output_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    main(["bounds", "cutstats", "--r", "2", "--output", "sub/cuts.csv"])
    text = (tmp_path / "sub" / "cuts.csv").read_text()
    assert text.startswith("r,n,graph,special_count,expected,passed\n")


def test_cli_artifacts(tmp_path):
    main(["reconstruct", "--seed", "1", "--n", "6", "--t", "1", "--trials", "1",
          "--p-e", "1.0", "--artifacts", str(tmp_path / "art"), "--output", str(tmp_path / "o.csv")])
    summary = json.loads((tmp_path / "art" / "t1_trial0.json").read_text())
    assert summary["success"] is True
    assert read_edge_list(tmp_path / "art" / "t1_trial0.edges").n == 6


def test_cli_rejects_missing_seed():
    with pytest.raises(SystemExit) as err:
        main(["reconstruct", "--n", "8", "--t", "2"])
    assert err.value.code == 2


def test_cli_verify_samples_zero():
    with pytest.raises(SystemExit) as err:
        main(["verify", "--seed", "1", "--samples", "0"])
    assert err.value.code == 2


def test_cli_verify_exit_code(tmp_path):
    code = main(["verify", "--seed", "1", "--checks", "nonfixed_pairs,cutstats", "--samples", "20",
                 "--output", str(tmp_path / "v.csv")])
    assert code == 0


def test_cli_bounds_coupling(capsys):
    assert main(["bounds", "coupling", "--n", "6", "--samples", "500", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,samples,seed,statistic,estimate,reference,stderr,passed"
    assert any(",collision_rate," in l for l in lines)


def test_cli_gen_and_pair(tmp_path, capsys):
    batch = tmp_path / "t.txt"
    main(["gen", "--seed", "4", "--n", "30", "--t", "2", "--p-e", "1.0",
          "--traces", str(batch), "--graph", str(tmp_path / "g.edges")])
    assert len(read_traces(batch, with_provenance=True)) == 2
    assert read_edge_list(tmp_path / "g.edges").n == 30
    capsys.readouterr()
    main(["pair", str(batch), "--n", "30", "--p-e", "1.0", "--budget", "0", "--provenance",
          "--output", str(tmp_path / "m.csv")])
    info = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert info["k"] == 30 and info["matched"] <= 30
    assert (tmp_path / "m.csv").read_text().startswith("u,v\n")
