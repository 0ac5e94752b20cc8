"""Command-line interface."""

import pytest

from stitchlab.cli import build_arg_parser, config_overrides, main


def test_flags_become_nested_overrides():
    args = build_arg_parser().parse_args(["search", "--algo", "gomea", "--pop", "32", "--deterministic"])
    overrides = config_overrides(args)
    assert overrides["search"]["algorithm"] == "gomea"
    assert overrides["search"]["population_size"] == 32
    assert overrides["search"]["deterministic"] is True
    assert overrides["search"]["budget"] is None


def test_sizes_must_be_integers():
    with pytest.raises(SystemExit):
        build_arg_parser().parse_args(["sweep", "--sizes", "16,big"])


def test_stitch_prints_the_genotype_length(prepared_experiment, capsys):
    assert main(["--config", str(prepared_experiment), "stitch"]) == 0
    out = capsys.readouterr().out
    assert "matches: 2" in out and "genotype length: 5" in out


def test_search_prints_the_run_summary(prepared_experiment, capsys):
    code = main(["--config", str(prepared_experiment), "--log-level", "WARNING",
                 "search", "--algo", "random", "--budget", "30", "--pop", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "evaluations: 30" in out and "termination: budget" in out


def test_stats_with_a_single_group_fails(prepared_experiment, tmp_path, capsys):
    assert main(["--config", str(prepared_experiment), "search", "--algo", "ga", "--budget", "20",
                 "--pop", "4", "--run-dir", str(tmp_path / "ga" / "seed0")]) == 0
    assert main(["--config", str(prepared_experiment), "search", "--algo", "ga", "--budget", "20",
                 "--pop", "4", "--seed", "1", "--run-dir", str(tmp_path / "ga" / "seed1")]) == 0
    capsys.readouterr()
    assert main(["--config", str(prepared_experiment), "stats", "--runs", str(tmp_path / "ga")]) == 1
    assert "need ≥2 groups" in capsys.readouterr().err


def test_missing_config_file_exits_with_error(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.yaml"), "prepare"]) == 1
    assert "does not exist" in capsys.readouterr().err


def test_invalid_budget_is_a_configuration_error(prepared_experiment, capsys):
    assert main(["--config", str(prepared_experiment), "search", "--budget", "2", "--pop", "4"]) == 1
    assert "error:" in capsys.readouterr().err
