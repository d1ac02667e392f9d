"""End-to-end CLI runs: dispatch, artifacts, exit codes, reproducibility."""
import csv
import math

import numpy as np
import pytest

from advalloc.cli import MW_HEADER, STRATEGIES_HEADER, run_cli
from advalloc.baselines import RESULTS_HEADER
from advalloc.config import load_config
from advalloc.equilibrium import build_payoff_matrix, solve_acceptance_lp, solve_zero_sum
from advalloc.persist import load_model, load_ring
from advalloc.training import METRICS_HEADER

SMALL_CFG = """
n_users = 4
n_resources = 2
price_set = {1, 2, 3}
budget_set = {1, 2, 3}
sequence = [1, 2, 2, 3]
expert_prices = [1,1,2,3]; [1,2,2,2]; [2,2,3,3]
episodes = 40
batch = 4
hidden = 8
encoder_width = 2
latent_dim = 4
mw_rollouts = 2
seed = 5
"""


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG)
    return path


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return tuple(rows[0]), rows[1:]


class TestDispatch:
    def test_no_arguments_is_usage_error(self, capsys):
        assert run_cli([]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self):
        assert run_cli(["oracle-check", "--frobnicate"]) == 2

    def test_help_exits_cleanly(self, capsys):
        assert run_cli(["--help"]) == 0
        assert "train" in capsys.readouterr().out

    def test_runtime_failure_prints_one_diagnostic_line(self, tmp_path, capsys):
        code = run_cli(["ne", "--config", str(tmp_path / "missing.cfg"),
                        "--out-dir", str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert len(err.strip().splitlines()) == 1


class TestOracleCheck:
    def test_all_cases_match(self, tmp_path, capsys):
        code = run_cli(["oracle-check", "--cases", "40", "--seed", "7",
                        "--out-dir", str(tmp_path)])
        assert code == 0
        assert capsys.readouterr().out.strip() == "40/40 matched"
        assert (tmp_path / "run-manifest.txt").exists()
        assert not (tmp_path / "oracle-counterexample.txt").exists()


class TestTrain:
    def run(self, cfg_path, out, *extra):
        return run_cli(["train", "--config", str(cfg_path),
                        "--out-dir", str(out), *extra])

    def test_joint_writes_all_artifacts(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "joint"
        assert self.run(cfg_path, out, "--mode", "joint") == 0
        assert "episodes=40" in capsys.readouterr().out
        header, rows = read_csv(out / "metrics.csv")
        assert header == METRICS_HEADER
        assert len(rows) == 10
        for name in ("algorithm.model", "adversary.model", "algorithm.ring",
                     "adversary.ring", "run-manifest.txt"):
            assert (out / name).exists()
        assert load_ring(out / "adversary.ring").episodes[-1] == 40
        manifest = (out / "run-manifest.txt").read_text()
        assert "subcommand: train" in manifest
        assert "n_users = 4" in manifest

    def test_episode_flag_overrides_config(self, cfg_path, tmp_path):
        out = tmp_path / "short"
        assert self.run(cfg_path, out, "--episodes", "8") == 0
        _, rows = read_csv(out / "metrics.csv")
        assert len(rows) == 2

    def test_alg_vs_mw_uses_sequence_prefixes(self, cfg_path, tmp_path):
        out = tmp_path / "alg"
        assert self.run(cfg_path, out, "--mode", "alg-vs-mw") == 0
        header, rows = read_csv(out / "mw_mixture.csv")
        assert header == MW_HEADER
        # one expert per prefix of the 4-slot sequence
        assert len(rows) == 4
        assert sum(float(r[2]) for r in rows) == pytest.approx(1.0)

    def test_adv_vs_mw_uses_expert_prices(self, cfg_path, tmp_path):
        out = tmp_path / "adv"
        assert self.run(cfg_path, out, "--mode", "adv-vs-mw") == 0
        _, rows = read_csv(out / "mw_mixture.csv")
        assert len(rows) == 3
        assert (out / "adversary.model").exists()

    def test_alg_vs_mw_without_experts_fails(self, tmp_path, capsys):
        bare = tmp_path / "bare.cfg"
        bare.write_text("n_users = 3\nn_resources = 1\n"
                        "price_set = {1}\nbudget_set = {1, 2}\nepisodes = 8\n")
        code = run_cli(["train", "--config", str(bare), "--mode", "alg-vs-mw",
                        "--out-dir", str(tmp_path / "x")])
        assert code == 1
        assert "expert_budgets" in capsys.readouterr().err


class TestEval:
    @pytest.fixture
    def trained(self, cfg_path, tmp_path):
        out = tmp_path / "trained"
        assert run_cli(["train", "--config", str(cfg_path),
                        "--out-dir", str(out)]) == 0
        return out

    def test_random_mode(self, cfg_path, trained, tmp_path, capsys):
        out = tmp_path / "ev"
        code = run_cli(["eval", "--config", str(cfg_path),
                        "--model", str(trained / "algorithm.model"),
                        "--n-sequences", "30", "--out-dir", str(out)])
        assert code == 0
        assert "mode=random" in capsys.readouterr().out
        header, rows = read_csv(out / "results.csv")
        assert header == RESULTS_HEADER
        assert rows[0][0] == "learned"
        assert rows[0][2] == ""    # no ratio column in expectation mode
        assert float(rows[0][4]) >= 0.0

    def test_snapshot_mode(self, cfg_path, trained, tmp_path, capsys):
        out = tmp_path / "evs"
        code = run_cli(["eval", "--config", str(cfg_path),
                        "--model", str(trained / "algorithm.model"),
                        "--adversary", str(trained / "adversary.model"),
                        "--ring", str(trained / "adversary.ring"),
                        "--n-sequences", "20", "--out-dir", str(out)])
        assert code == 0
        assert "mode=snapshots" in capsys.readouterr().out

    def test_ring_without_adversary_fails(self, cfg_path, trained, tmp_path):
        assert run_cli(["eval", "--config", str(cfg_path),
                        "--model", str(trained / "algorithm.model"),
                        "--ring", str(trained / "adversary.ring"),
                        "--out-dir", str(tmp_path / "x")]) == 1

    def test_adversary_model_is_rejected(self, cfg_path, trained, tmp_path, capsys):
        code = run_cli(["eval", "--config", str(cfg_path),
                        "--model", str(trained / "adversary.model"),
                        "--out-dir", str(tmp_path / "x")])
        assert code == 1
        assert "pricing" in capsys.readouterr().err


class TestNe:
    def test_acceptance_lp_prints_library_value(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "acc"
        code = run_cli(["ne", "--config", str(cfg_path),
                        "--mode", "acceptance-lp", "--out-dir", str(out)])
        assert code == 0
        printed = float(capsys.readouterr().out.strip())
        value, probs = solve_acceptance_lp((1, 2, 2, 3), 2)
        assert printed == pytest.approx(value, abs=1e-9)
        header, rows = read_csv(out / "strategies.csv")
        assert header == STRATEGIES_HEADER
        assert [float(r[2]) for r in rows] == pytest.approx(list(probs), abs=1e-9)

    def test_acceptance_lp_needs_a_sequence(self, tmp_path, capsys):
        bare = tmp_path / "bare.cfg"
        bare.write_text("n_users = 2\nn_resources = 1\n"
                        "price_set = {1}\nbudget_set = {1, 2}\n")
        assert run_cli(["ne", "--config", str(bare), "--mode", "acceptance-lp",
                        "--out-dir", str(tmp_path / "x")]) == 1
        assert "sequence" in capsys.readouterr().err

    def test_lp_matches_library_and_fp_brackets_it(self, cfg_path, tmp_path, capsys):
        game = load_config(cfg_path).game
        expected = solve_zero_sum(build_payoff_matrix(game)).value

        assert run_cli(["ne", "--config", str(cfg_path), "--mode", "lp",
                        "--out-dir", str(tmp_path / "lp")]) == 0
        lp_out = capsys.readouterr().out.strip()
        assert float(lp_out) == pytest.approx(expected, abs=1e-9)

        assert run_cli(["ne", "--config", str(cfg_path), "--mode", "fp",
                        "--iterations", "3000",
                        "--out-dir", str(tmp_path / "fp")]) == 0
        fp_out = capsys.readouterr().out.strip()
        bracket = fp_out.split("bracket=[")[1].split("]")[0]
        lower, upper = (float(v) for v in bracket.split(","))
        assert lower <= expected <= upper

        header, rows = read_csv(tmp_path / "lp" / "strategies.csv")
        assert header == STRATEGIES_HEADER
        for side in ("budget", "price"):
            total = sum(float(r[2]) for r in rows if r[0] == side)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_strategy_files_restrict_one_side(self, cfg_path, tmp_path, capsys):
        prices = tmp_path / "prices.txt"
        prices.write_text("[1,1,2,3]\n{1,2,2,2}\n2,2,3,3\n")
        assert run_cli(["ne", "--config", str(cfg_path), "--mode", "lp",
                        "--strategy-files", "-", str(prices),
                        "--out-dir", str(tmp_path / "r")]) == 0
        restricted = float(capsys.readouterr().out.strip())
        game = load_config(cfg_path).game
        full = solve_zero_sum(build_payoff_matrix(game)).value
        # taking options away from the minimizer cannot lower the value
        assert restricted >= full - 1e-9
        _, rows = read_csv(tmp_path / "r" / "strategies.csv")
        assert {int(r[1]) for r in rows if r[0] == "price"} <= {0, 1, 2}


class TestBench:
    def test_worst_mode_table(self, cfg_path, tmp_path, capsys):
        out = tmp_path / "bench"
        assert run_cli(["bench", "--config", str(cfg_path), "--mode", "worst",
                        "--n-sequences", "20", "--out-dir", str(out)]) == 0
        header, rows = read_csv(out / "results.csv")
        assert header == RESULTS_HEADER
        by_name = {r[0]: r for r in rows}
        assert set(by_name) == {"greedy", "threshold", "randomized"}
        # four users, two units: the drain-then-starve ratio hits U/L
        assert float(by_name["greedy"][2]) == 3.0

    def test_policy_subset_and_learned_model(self, cfg_path, tmp_path):
        trained = tmp_path / "t"
        assert run_cli(["train", "--config", str(cfg_path),
                        "--out-dir", str(trained)]) == 0
        out = tmp_path / "bench"
        assert run_cli(["bench", "--config", str(cfg_path), "--mode", "worst",
                        "--policies", "greedy",
                        "--model", str(trained / "algorithm.model"),
                        "--adversary", str(trained / "adversary.model"),
                        "--ring", str(trained / "adversary.ring"),
                        "--n-sequences", "15", "--out-dir", str(out)]) == 0
        _, rows = read_csv(out / "results.csv")
        assert [r[0] for r in rows] == ["greedy", "learned"]

    def test_unknown_policy_name(self, cfg_path, tmp_path, capsys):
        assert run_cli(["bench", "--config", str(cfg_path),
                        "--policies", "psychic",
                        "--out-dir", str(tmp_path / "x")]) == 1
        assert "psychic" in capsys.readouterr().err


class TestReproducibility:
    @pytest.mark.parametrize("argv_tail", [
        ["train", "--mode", "joint"],
        ["train", "--mode", "alg-vs-mw"],
        ["train", "--mode", "adv-vs-mw"],
        ["bench", "--mode", "random", "--n-sequences", "40", "--seed", "9"],
        ["ne", "--mode", "lp"],
    ])
    def test_same_seed_runs_are_byte_identical(self, cfg_path, tmp_path,
                                               argv_tail, capsys):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            argv = [argv_tail[0], "--config", str(cfg_path),
                    "--out-dir", str(out), *argv_tail[1:]]
            assert run_cli(argv) == 0
            # the manifest records the differing --out-dir flag by design
            blobs = {p.name: p.read_bytes() for p in sorted(out.iterdir())
                     if p.name != "run-manifest.txt"}
            outputs.append(blobs)
        assert outputs[0].keys() == outputs[1].keys()
        for name in outputs[0]:
            assert outputs[0][name] == outputs[1][name], name

    def test_model_files_are_reloadable_and_identical(self, cfg_path, tmp_path):
        models = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(["train", "--config", str(cfg_path),
                            "--out-dir", str(out)]) == 0
            models.append(load_model(out / "algorithm.model"))
        for p, q in zip(models[0].params, models[1].params):
            np.testing.assert_array_equal(p, q)
