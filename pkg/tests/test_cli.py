import os

import pytest

from bbacheck import Lts, act, read_aut, write_aut
from bbacheck.aut import write_aut_file
from bbacheck.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL = ("--honest", "2", "--malicious", "0", "--committee", "1")
SMALL_MAL = ("--honest", "1", "--malicious", "1", "--committee", "1")
TWO_MAL = ("--honest", "1", "--malicious", "2", "--committee", "1")


class TestExplore:
    def test_writes_file_and_counts(self, capsys, tmp_path):
        out = tmp_path / "net.aut"
        code, stdout, _ = run_cli(capsys, "explore", *SMALL, "-o", str(out))
        assert code == 0
        assert "states=" in stdout and "transitions=" in stdout
        lts = read_aut(out.read_text())
        assert lts.num_states == int(stdout.split("states=")[1].split()[0])

    def test_stdout_when_no_output_path(self, capsys):
        code, stdout, stderr = run_cli(capsys, "explore", *SMALL)
        assert code == 0
        assert stdout.startswith("des (")
        assert "states=" in stderr

    def test_boycott_present_with_malicious(self, capsys):
        code, stdout, _ = run_cli(capsys, "explore", *TWO_MAL)
        assert code == 0
        assert "BOYCOTT" in stdout

    def test_limit_exceeded_is_an_error(self, capsys):
        code, _, stderr = run_cli(capsys, "explore", *SMALL, "--max-states", "10")
        assert code == 2
        assert "max_states" in stderr

    def test_bad_params_are_an_error(self, capsys):
        code, _, stderr = run_cli(capsys, "explore", "--honest", "2",
                                  "--malicious", "0")
        assert code == 2  # default committee of 3 exceeds the population
        assert "error" in stderr


class TestCompare:
    def make_files(self, tmp_path):
        a = Lts(2, 0, [(0, act("a"), 1)])
        b = Lts(2, 0, [(0, act("b"), 1)])
        pa, pb = tmp_path / "a.aut", tmp_path / "b.aut"
        write_aut_file(a, pa)
        write_aut_file(b, pb)
        return pa, pb

    def test_self_compare_passes(self, capsys, tmp_path):
        pa, _ = self.make_files(tmp_path)
        for kind in ("strong", "weak", "branching"):
            code, stdout, _ = run_cli(capsys, "compare", str(pa), str(pa),
                                      "--kind", kind)
            assert code == 0
            assert stdout.strip() == "PASS"

    def test_inequivalent_fails_with_witness(self, capsys, tmp_path):
        pa, pb = self.make_files(tmp_path)
        code, stdout, _ = run_cli(capsys, "compare", str(pa), str(pb))
        assert code == 1
        assert stdout.startswith("FAIL")
        assert "witness:" in stdout

    def test_malformed_file_is_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.aut"
        bad.write_text("this is not aut\n")
        pa, _ = self.make_files(tmp_path)
        code, _, stderr = run_cli(capsys, "compare", str(bad), str(pa))
        assert code == 2
        assert "error" in stderr


class TestBsnni:
    def test_honest_only_passes(self, capsys):
        code, stdout, _ = run_cli(capsys, "bsnni", *SMALL)
        assert code == 0
        lines = stdout.strip().splitlines()
        assert "WEAK_BSNNI: PASS" in lines
        assert "BRANCHING_BSNNI: PASS" in lines

    def test_verdict_lines_fixed_format(self, capsys):
        code, stdout, _ = run_cli(capsys, "bsnni", *TWO_MAL)
        lines = stdout.strip().splitlines()
        assert len(lines) == 2
        for line in lines:
            name, _, verdict = line.partition(": ")
            assert name in ("WEAK_BSNNI", "BRANCHING_BSNNI")
            assert verdict in ("PASS", "FAIL")

    def test_single_kind_flag(self, capsys):
        code, stdout, _ = run_cli(capsys, "bsnni", *SMALL, "--kind", "branching")
        assert stdout.strip() == "BRANCHING_BSNNI: PASS"
        assert code == 0

    def test_lone_malicious_passes(self, capsys):
        code, stdout, _ = run_cli(capsys, "bsnni", *SMALL_MAL)
        assert code == 0
        assert "FAIL" not in stdout

    def test_exit_one_on_failure(self, capsys):
        # two coordinating malicious nodes flip the outcome
        code, stdout, _ = run_cli(capsys, "bsnni", *TWO_MAL)
        assert code == 1
        assert "FAIL" in stdout

    def test_direct_strategy_small(self, capsys):
        code, stdout, _ = run_cli(capsys, "bsnni", *TWO_MAL, "--strategy", "direct")
        assert code == 1
        assert "FAIL" in stdout


class TestQuery:
    @pytest.fixture()
    def model_file(self, capsys, tmp_path):
        out = tmp_path / "net.aut"
        assert run_cli(capsys, "explore", *TWO_MAL, "-o", str(out))[0] == 0
        return str(out)

    def test_reachable(self, capsys, model_file):
        code, stdout, _ = run_cli(capsys, "query", model_file, "COMMIT_EMPTY_BLOCK")
        assert code == 0 and stdout.strip() == "reachable"

    def test_after_boycott_proposed_unreachable(self, capsys, model_file):
        code, stdout, _ = run_cli(capsys, "query", model_file,
                                  "COMMIT_PROPOSED_BLOCK", "--after", "BOYCOTT")
        assert code == 1 and stdout.strip() == "unreachable"

    def test_after_boycott_empty_reachable(self, capsys, model_file):
        code, stdout, _ = run_cli(capsys, "query", model_file,
                                  "COMMIT_EMPTY_BLOCK", "--after", "BOYCOTT")
        assert code == 0 and stdout.strip() == "reachable"

    def test_unknown_gate_warns_unreachable(self, capsys, model_file):
        code, stdout, stderr = run_cli(capsys, "query", model_file, "NO_SUCH_GATE")
        assert code == 1
        assert stdout.strip() == "unreachable"
        assert "warning" in stderr

    def test_missing_after_gate_warns(self, capsys, model_file):
        code, stdout, stderr = run_cli(capsys, "query", model_file,
                                       "COMMIT_EMPTY_BLOCK", "--after", "GHOST")
        assert code == 1
        assert "warning" in stderr


class TestSimulate:
    def test_reproducible_output(self, capsys):
        args = ("simulate", *SMALL, "--trials", "200", "--seed", "7")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        assert out1.startswith("trials=200 ")

    def test_always_boycott_all_empty(self, capsys):
        code, stdout, _ = run_cli(capsys, "simulate", *SMALL_MAL,
                                  "--trials", "100", "--seed", "3",
                                  "--adversary", "always-boycott")
        assert code == 0
        assert "frac_empty=1.000000" in stdout

    def test_zero_trials_usage_error(self, capsys):
        code, _, stderr = run_cli(capsys, "simulate", *SMALL, "--trials", "0")
        assert code == 2
        assert "trials" in stderr


class TestConfigPrecedence:
    def test_config_file_supplies_params(self, capsys, tmp_path):
        conf = tmp_path / "net.conf"
        conf.write_text("nHonest = 2\nnMalicious = 0\ncommitteeSize = 1\n")
        code, stdout, _ = run_cli(capsys, "simulate", "--config", str(conf),
                                  "--trials", "10", "--seed", "1")
        assert code == 0

    def test_cli_flag_beats_config(self, capsys, tmp_path):
        conf = tmp_path / "net.conf"
        # config alone would be invalid (committee 3 > population 2);
        # the flag must win
        conf.write_text("nHonest = 2\nnMalicious = 0\ncommitteeSize = 3\n")
        code, _, _ = run_cli(capsys, "simulate", "--config", str(conf),
                             "--committee", "1", "--trials", "5", "--seed", "1")
        assert code == 0

    def test_env_var_supplies_config(self, capsys, tmp_path, monkeypatch):
        conf = tmp_path / "net.conf"
        conf.write_text("nHonest = 2\nnMalicious = 0\ncommitteeSize = 1\n")
        monkeypatch.setenv("BBACHECK_CONFIG", str(conf))
        code, _, _ = run_cli(capsys, "simulate", "--trials", "5", "--seed", "1")
        assert code == 0

    def test_bad_config_key_is_usage_error(self, capsys, tmp_path):
        conf = tmp_path / "net.conf"
        conf.write_text("nodes = 4\n")
        code, _, stderr = run_cli(capsys, "simulate", "--config", str(conf),
                                  "--trials", "5")
        assert code == 2
