"""Configuration, report serialization, CLI exit codes, determinism."""

import csv
import io
import json

import numpy as np
import pytest

from anharmonic.harness import cli, experiments
from anharmonic.harness.config import (ConfigError, DEFAULTS, ExperimentConfig,
                                       load_config)
from anharmonic.harness.report import COLUMNS, RunReport, emit, to_csv


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_defaults_exist_for_every_experiment():
    for name in DEFAULTS:
        cfg = load_config(name, None, {})
        assert cfg.experiment == name
        cfg.validate()


def test_gamma_n_scales_with_system_size():
    cfg = ExperimentConfig(experiment="theorem3", n=128, gamma=1.0, b=0.5)
    assert cfg.gamma_n == pytest.approx(128.0 ** -0.5)


def test_config_rejects_non_power_of_two_n():
    cfg = ExperimentConfig(experiment="simulate", n=100)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_config_rejects_tiny_replica_count_for_theorem_runs():
    cfg = ExperimentConfig(experiment="theorem1", replicas=50)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_config_rejects_bad_format():
    cfg = ExperimentConfig(experiment="simulate", fmt="xml")
    with pytest.raises(ConfigError):
        cfg.validate()


def test_config_file_overrides_and_unknown_key(tmp_path):
    good = tmp_path / "good.ini"
    good.write_text("[theorem1]\nn = 64\nreplicas = 128\nt_grid = 0.05, 0.1\n")
    cfg = load_config("theorem1", str(good), {})
    assert cfg.n == 64
    assert cfg.replicas == 128
    assert cfg.t_grid == (0.05, 0.1)

    bad = tmp_path / "bad.ini"
    bad.write_text("[theorem1]\nnn = 64\n")
    with pytest.raises(ConfigError):
        load_config("theorem1", str(bad), {})


def test_cli_overrides_beat_config_file(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[simulate]\nseed = 7\n")
    cfg = load_config("simulate", str(path), {"seed": 11, "threads": 2})
    assert cfg.seed == 11
    assert cfg.threads == 2


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

def _tiny_report():
    cfg = ExperimentConfig(experiment="simulate", n=64, replicas=100, seed=3)
    rep = RunReport(experiment="simulate")
    rep.add_row(cfg, t=0.125, f_center=-0.25, estimate=1.0 / 3.0,
                stderr=0.01, reference=0.3333, zscore=0.1)
    return rep


def test_csv_schema_and_trailing_newline():
    text = to_csv(_tiny_report())
    assert text.endswith("\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(COLUMNS)
    assert len(rows) == 2


def test_csv_floats_round_trip_exactly():
    text = to_csv(_tiny_report())
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["estimate"]) == 1.0 / 3.0
    assert float(row["t"]) == 0.125
    assert int(row["n"]) == 64
    assert int(row["seed"]) == 3


def test_empty_report_is_header_only():
    rep = RunReport(experiment="simulate")
    text = to_csv(rep)
    assert text == ",".join(COLUMNS) + "\n"


def test_json_round_trip(tmp_path):
    rep = _tiny_report()
    path = emit(rep, str(tmp_path), "json")
    data = json.loads(open(path).read())
    assert data["experiment"] == "simulate"
    assert data["rows"][0]["estimate"] == 1.0 / 3.0


def test_emit_csv_file(tmp_path):
    path = emit(_tiny_report(), str(tmp_path), "csv")
    assert path.endswith("simulate.csv")
    assert open(path).read() == to_csv(_tiny_report())


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_exit_zero_on_passing_run(tmp_path, capsys):
    rc = cli.main(["identity-suite", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out
    assert (tmp_path / "identity-suite.csv").exists()


def test_cli_exit_two_on_bad_config(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[theorem1]\nreplicas = 10\n")
    rc = cli.main(["theorem1", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_cli_rejects_unknown_experiment():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["no-such-experiment"])


# ---------------------------------------------------------------------------
# determinism across thread counts
# ---------------------------------------------------------------------------

def _small_theorem1(threads, out):
    cfg = ExperimentConfig(
        experiment="theorem1", n=64, a=1.0, gamma=1e-2, t_grid=(0.05,),
        replicas=100, seed=42, threads=threads, centers=5, width=0.25,
        translation_average=False, out=str(out))
    cfg.validate()
    return experiments.run(cfg)


def test_csv_byte_identical_across_thread_counts(tmp_path):
    r1 = _small_theorem1(1, tmp_path)
    r2 = _small_theorem1(2, tmp_path)
    assert to_csv(r1) == to_csv(r2)
