"""Tests for the configuration layer and the click commands."""

import csv
import json
import unittest

import numpy as np
import pytest
from click.testing import CliRunner

from vexp_solver import cli
from vexp_solver.__main__ import main
from vexp_solver.shared_libraries.errors import ConfigError

SMALL_GRID = """
[grid]
half_width = 5.0
nodes = 41
"""


def _write_config(tmp_path, body, name="run.toml"):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return str(path)


def _rows(path):
    with path.open(encoding="utf-8", newline="") as handle:
        return {row["name"]: row for row in csv.DictReader(handle)}


@pytest.fixture
def runner():
    return CliRunner()


class TestValidateConfig(unittest.TestCase):
    def test_defaults(self):
        config = cli.validate_config({})
        self.assertEqual(config.experiment, "solve")
        self.assertEqual(config.instance.name, "cubic-constant-exponent")
        self.assertEqual(config.solver.tol, 1e-6)
        self.assertEqual(config.solver.path_points, 41)

    def test_unknown_key_is_named(self):
        with self.assertRaises(ConfigError) as ctx:
            cli.validate_config({"grid": {"bogus": 1}})
        self.assertEqual(ctx.exception.key, "grid.bogus")

    def test_wrong_type_is_named(self):
        with self.assertRaises(ConfigError) as ctx:
            cli.validate_config({"solver": {"tol": -1.0}})
        self.assertEqual(ctx.exception.key, "solver.tol")

    def test_unknown_instance(self):
        with self.assertRaises(ConfigError) as ctx:
            cli.validate_config({"instance": {"name": "nope"}})
        self.assertEqual(ctx.exception.key, "instance.name")

    def test_k_beyond_interior(self):
        with self.assertRaises(ConfigError) as ctx:
            cli.validate_config({"grid": {"nodes": 11}, "multiplicity": {"ks": [1, 10]}})
        self.assertEqual(ctx.exception.key, "multiplicity.ks")

    def test_inline_instance(self):
        config = cli.validate_config(
            {"instance": {"name": "mine", "inline": {"p": {"kind": "constant", "value": 2.5}, "f": {"kind": "zero"}}}}
        )
        instance = cli.resolve_instance(config)
        self.assertEqual(instance.name, "mine")
        self.assertEqual(float(instance.p(np.zeros((1, 1)))[0]), 2.5)


def test_load_config_reports_missing_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        cli.load_config(tmp_path / "absent.toml")
    assert info.value.key == "config"


def test_load_config_reports_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="malformed TOML"):
        cli.load_config(_write_config(tmp_path, "[grid\nnodes = 3"))


def test_write_csv_uses_full_precision(tmp_path):
    path = tmp_path / "out.csv"
    cli.write_csv(path, ["a", "b", "c"], [[0.1, None, True]])
    assert path.read_bytes() == b"a,b,c\n0.10000000000000001,,true\n"


def test_malformed_config_exits_with_one(runner, tmp_path):
    config = _write_config(tmp_path, '[grid]\nnodes = "many"\n')
    result = runner.invoke(main, ["check-hypotheses", "--config", config, "--out", str(tmp_path / "run")])
    assert result.exit_code == 1
    assert "grid.nodes" in result.output


def test_check_hypotheses_on_the_power_log_example(runner, tmp_path):
    config = _write_config(tmp_path, '[instance]\nname = "paper-example"\n' + SMALL_GRID)
    out = tmp_path / "run"
    result = runner.invoke(main, ["check-hypotheses", "--config", config, "--out", str(out)])
    assert result.exit_code == 0, result.output
    rows = _rows(out / "hypotheses.csv")
    assert list(rows) == ["V", "H0", "H1", "H2", "H3", "AR"]
    assert all(rows[name]["verdict"] == "certified-on-samples" for name in ("V", "H0", "H1", "H2", "H3"))
    assert rows["AR"]["verdict"] == "violated"
    assert "theta" in rows["AR"]["witness"]


def test_check_hypotheses_fails_for_the_pure_power(runner, tmp_path):
    config = _write_config(tmp_path, '[instance]\nname = "pure-power"\n' + SMALL_GRID)
    out = tmp_path / "run"
    result = runner.invoke(main, ["check-hypotheses", "--config", config, "--out", str(out)])
    assert result.exit_code == 2
    assert _rows(out / "hypotheses.csv")["H1"]["verdict"] == "violated"


def test_aborted_experiment_exits_with_one(runner, tmp_path):
    body = (
        '[instance]\nname = "free"\n\n[instance.inline]\np = { kind = "constant", value = 2.0 }\nf = { kind = "zero" }\n'
        + SMALL_GRID
    )
    config = _write_config(tmp_path, body)
    out = tmp_path / "run"
    result = runner.invoke(main, ["solve", "--config", config, "--out", str(out)])
    assert result.exit_code == 1
    assert (out / "manifest.json").exists()
    assert not (out / "profiles.csv").exists()


def test_run_returns_one_when_the_far_point_is_missing(tmp_path):
    config = cli.validate_config(
        {"instance": {"name": "free", "inline": {"p": {"kind": "constant", "value": 2.0}, "f": {"kind": "zero"}}}}
    )
    assert cli.run(config, output_dir=tmp_path / "run") == 1


def test_manifest_records_overrides(runner, tmp_path):
    config = _write_config(tmp_path, '[instance]\nname = "paper-example"\n' + SMALL_GRID)
    out = tmp_path / "run"
    runner.invoke(main, ["check-hypotheses", "--config", config, "--out", str(out), "--seed", "7"])
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["experiment"] == "check-hypotheses"
    assert manifest["solver"]["seed"] == 7
    assert manifest["output_dir"] == str(out)
    assert manifest["grid"]["nodes"] == 41


def test_repeated_runs_are_byte_identical(runner, tmp_path):
    body = (
        '[instance]\nname = "cubic-constant-exponent"\n'
        + SMALL_GRID
        + "\n[multiplicity]\nks = [1, 4]\ncones = 2\nrestarts = 2\nsamples = 4\n"
    )
    config = _write_config(tmp_path, body)
    outputs = []
    for label in ("first", "second"):
        out = tmp_path / label
        result = runner.invoke(main, ["multiplicity", "--config", config, "--out", str(out), "--seed", "3"])
        assert result.exit_code in (0, 2), result.output
        outputs.append(out)
    for name in ("beta.csv", "conditions.csv"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()


@pytest.mark.slow
def test_solve_recovers_the_sech_ground_state(runner, tmp_path):
    config = _write_config(tmp_path, '[instance]\nname = "cubic-constant-exponent"\n')
    out = tmp_path / "run"
    result = runner.invoke(main, ["solve", "--config", config, "--out", str(out)])
    assert result.exit_code == 0, result.output
    with (out / "profiles.csv").open(encoding="utf-8", newline="") as handle:
        profile = np.array([float(row["u"]) for row in csv.DictReader(handle)])
    assert profile.max() == pytest.approx(np.sqrt(2.0), rel=1e-2)
    assert (out / "telemetry.csv").read_text(encoding="utf-8").startswith("iter,phi,s_n,norm\n")


@pytest.mark.slow
def test_power_log_example_solve_is_deterministic(runner, tmp_path):
    body = '[instance]\nname = "paper-example"\n\n[grid]\nhalf_width = 15.0\nnodes = 301\n'
    config = _write_config(tmp_path, body)
    for label in ("first", "second"):
        result = runner.invoke(main, ["solve", "--config", config, "--out", str(tmp_path / label), "--seed", "11"])
        assert result.exit_code == 0, result.output
    for name in ("profiles.csv", "telemetry.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
