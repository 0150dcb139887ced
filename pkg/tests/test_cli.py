"""
Test Suite for the Command Line Interface

Subcommand dispatch, overrides and the exit-code mapping.
"""

from pathlib import Path

import pytest
import structlog

from src.core.errors import SingularFIMError
from src.runner import cli

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"

SMALL_MONTECARLO = """
experiment: montecarlo_verify
seed: 3
trials: 40
grids: {n: [64], k: [4], m: [2], snr_db: [0.0]}
"""


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    structlog.reset_defaults()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yml"
    path.write_text(SMALL_MONTECARLO)
    return path


class TestExitCodes:

    def test_success(self, tmp_path):
        out = tmp_path / "tradeoff.csv"
        code = cli.main(["tradeoff", "--config", str(CONFIG_DIR / "tradeoff_snr.yml"), "--output", str(out)])
        assert code == cli.EXIT_OK
        assert out.read_text().count("\n") > 205

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.yml"
        path.write_text("system: {k: 0}\ngrids: {e_th: [1.0e-3], snr_db: [10.0]}\n")
        assert cli.main(["tradeoff", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        assert cli.main(["crb", "--config", str(tmp_path / "absent.yml")]) == cli.EXIT_CONFIG

    def test_subcommand_mismatch(self, small_config):
        assert cli.main(["crb", "--config", str(small_config)]) == cli.EXIT_CONFIG

    def test_numerical_failure(self, small_config, monkeypatch):
        def fail(cfg, threads=1):
            raise SingularFIMError("Fisher information is singular")

        monkeypatch.setattr(cli, "run_experiment", fail)
        assert cli.main(["montecarlo", "--config", str(small_config)]) == cli.EXIT_NUMERICAL

    def test_output_failure(self, small_config, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = cli.main(["montecarlo", "--config", str(small_config), "--output", str(blocker / "out.csv")])
        assert code == cli.EXIT_OUTPUT

    def test_invalid_thread_env(self, small_config, monkeypatch):
        monkeypatch.setenv("ISAC_FBL_THREADS", "many")
        assert cli.main(["montecarlo", "--config", str(small_config)]) == cli.EXIT_CONFIG


class TestArguments:

    def test_stdout_output(self, small_config, capsys):
        assert cli.main(["montecarlo", "--config", str(small_config), "--output", "-"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# isac-fbl ")
        assert "n,k,m,snr_db,trials,nmse_analytic,nmse_empirical,rel_err\n64,4,2,0,40," in out

    def test_seed_override(self, small_config, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["montecarlo", "--config", str(small_config), "--output", str(first)])
        cli.main(["montecarlo", "--config", str(small_config), "--output", str(second), "--seed", "99"])
        assert "# config: seed: 3" in first.read_text()
        assert "# config: seed: 99" in second.read_text()
        assert first.read_text().splitlines()[-1] != second.read_text().splitlines()[-1]

    def test_threads_do_not_change_output(self, small_config, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["montecarlo", "--config", str(small_config), "--output", str(first), "--threads", "1"])
        cli.main(["montecarlo", "--config", str(small_config), "--output", str(second), "--threads", "3"])
        assert first.read_bytes() == second.read_bytes()

    def test_seed_must_fit_u64(self, small_config):
        assert cli.main(["montecarlo", "--config", str(small_config), "--seed", str(2**64)]) == cli.EXIT_CONFIG

    def test_threads_must_be_positive(self, small_config):
        assert cli.main(["montecarlo", "--config", str(small_config), "--threads", "0"]) == cli.EXIT_CONFIG

    def test_unknown_subcommand(self):
        assert cli.main(["beamform", "--config", "x.yml"]) == cli.EXIT_CONFIG

    def test_missing_required_option(self):
        assert cli.main(["tradeoff"]) == cli.EXIT_CONFIG

    def test_version(self, capsys):
        assert cli.main(["--version"]) == cli.EXIT_OK
        assert capsys.readouterr().out.startswith("isac-fbl ")
