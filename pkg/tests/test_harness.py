import json
import math

import numpy as np
import pandas as pd
import pytest

from saginmc.config import ExperimentConfig, load_experiment_config
from saginmc.constants import TRACE_COLUMNS
from saginmc.errors import ConfigError
from saginmc.harness.compare import FAIL, NOT_APPLICABLE, PASS, compare, pairwise_differences, policy_means
from saginmc.harness.experiment import (
    SUMMARY_FILE,
    aggregate_summary,
    read_trace,
    run_experiment,
    summarize_output_dir,
    summarize_records,
    window_size,
)
from saginmc.harness.metrics import EpisodeRecord, moving_average, switching_rate
from saginmc.harness.plotting import render_figures
from saginmc.harness.seeding import derive_seed
from saginmc.harness.verification import physics_anchors
from saginmc.learning.agent import AgentConfig

METRICS = ["return", "capacity_bps", "latency_s", "power_w", "switch_rate"]


def tiny_config(output_dir, policies=("random", "bs_only"), **kwargs):
    return ExperimentConfig(
        policies=list(policies),
        episodes=5,
        steps_per_episode=10,
        seeds=[0, 1, 2],
        output_dir=str(output_dir),
        **kwargs,
    )


def seed_rows(policy, values, seeds=(0, 1, 2), switch_rate_first=0.5):
    """Seed-level summary rows sharing the same metric values on every seed."""
    return [{"policy": policy, "seed": seed, **values, "switch_rate_first": switch_rate_first} for seed in seeds]


def passing_summary():
    rows = []
    rows += seed_rows("proposed", {"return": 10.0, "capacity_bps": 9e8, "latency_s": 1e-3, "power_w": 8.0,
                                   "switch_rate": 0.01})
    rows += seed_rows("dqn", {"return": 5.0, "capacity_bps": 5e8, "latency_s": 3e-3, "power_w": 6.0,
                              "switch_rate": 0.1})
    rows += seed_rows("ppo", {"return": 4.0, "capacity_bps": 4.5e8, "latency_s": 3.5e-3, "power_w": 6.0,
                              "switch_rate": 0.2})
    rows += seed_rows("greedy_snr", {"return": 3.0, "capacity_bps": 4e8, "latency_s": 4e-3, "power_w": 3.5,
                                     "switch_rate": 0.3})
    rows += seed_rows("random", {"return": 1.0, "capacity_bps": 3e8, "latency_s": 5e-3, "power_w": 7.0,
                                 "switch_rate": 0.9})
    rows += seed_rows("round_robin", {"return": 0.5, "capacity_bps": 2e8, "latency_s": 6e-3, "power_w": 3.5,
                                      "switch_rate": 1.0})
    rows += seed_rows("bs_only", {"return": 0.2, "capacity_bps": 1e8, "latency_s": 7e-3, "power_w": 2.0,
                                  "switch_rate": 0.0})
    return pd.DataFrame(rows)


def check(report, name):
    return next(c for c in report.checks if c.name == name)


class TestSwitchingRate:
    def test_constant(self):
        assert switching_rate([3] * 10) == 0.0

    def test_alternating(self):
        assert switching_rate([0, 1] * 5) == 1.0

    def test_example(self):
        assert switching_rate([0, 0, 1, 1, 2]) == 0.5

    def test_too_short(self):
        with pytest.raises(ValueError):
            switching_rate([4])


class TestMovingAverage:
    def test_window_one_is_identity(self):
        assert moving_average([3.0, -1.0, 2.5], 1) == pytest.approx([3.0, -1.0, 2.5])

    def test_constant(self):
        assert moving_average([2.0] * 6, 4) == pytest.approx([2.0] * 6)

    def test_example(self):
        assert moving_average([1, 2, 3, 4], 2) == pytest.approx([1.0, 1.5, 2.5, 3.5])

    def test_bad_window(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)


class TestSeeding:
    def test_deterministic(self):
        assert derive_seed(7, "env", 3) == derive_seed(7, "env", 3)

    def test_labels_are_independent_streams(self):
        seeds = {derive_seed(0, label) for label in ("proposed", "dqn", "ppo", "random", "env")}
        assert len(seeds) == 5
        assert derive_seed(0, "env", 1) != derive_seed(1, "env", 0)

    def test_range(self):
        for master in range(50):
            assert 0 <= derive_seed(master, "actor") < 2 ** 63


class TestSummaries:
    def test_window_size(self):
        assert window_size(2000) == 200
        assert window_size(5) == 1
        assert window_size(11) == 2

    def test_summarize_records(self):
        records = [EpisodeRecord(i, float(i), 10.0 * i, 0.1, 2.0, 1.0 - 0.1 * i) for i in range(10)]
        summary = summarize_records(records)
        assert summary["return"] == 9.0
        assert summary["capacity_bps"] == 90.0
        assert summary["switch_rate"] == pytest.approx(0.1)
        assert summary["switch_rate_first"] == 1.0

    def test_aggregate_uses_population_std(self):
        seed_summary = pd.DataFrame(
            [{"policy": "random", "seed": s, **{m: float(v) for m in METRICS}} for s, v in enumerate((1, 3))]
        )
        row = aggregate_summary(seed_summary).iloc[0]
        assert row["n_seeds"] == 2
        assert row["return_mean"] == 2.0
        assert row["return_std"] == 1.0


class TestRunExperiment:
    def test_files_and_parse_back(self, tmp_path):
        result = run_experiment(tiny_config(tmp_path / "out"))
        root = tmp_path / "out"
        traces = sorted(p.name for p in root.glob("*_seed*.csv"))
        assert traces == [f"{p}_seed{s}.csv" for p in ("bs_only", "random") for s in (0, 1, 2)]
        assert len(list(root.glob("*.csv"))) == 7
        assert (root / SUMMARY_FILE).exists()
        for name in traces:
            frame = pd.read_csv(root / name)
            assert list(frame.columns) == TRACE_COLUMNS
            assert len(frame) == 5
            assert not frame.isna().any().any()
        assert (root / "plot_data" / "curves_random.csv").exists()
        assert (root / "plot_data" / "bars.csv").exists()
        assert len(result.runs) == 6

    def test_rerun_is_byte_identical(self, tmp_path):
        run_experiment(tiny_config(tmp_path / "a", log_steps=True))
        run_experiment(tiny_config(tmp_path / "b", log_steps=True))
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
        assert files
        for relative in files:
            assert (tmp_path / "a" / relative).read_bytes() == (tmp_path / "b" / relative).read_bytes()

    def test_summary_matches_recomputation(self, tmp_path):
        run_experiment(tiny_config(tmp_path / "out"))
        summary = pd.read_csv(tmp_path / "out" / SUMMARY_FILE)
        for policy in ("random", "bs_only"):
            tails = [pd.read_csv(tmp_path / "out" / f"{policy}_seed{s}.csv").iloc[-1:] for s in (0, 1, 2)]
            row = summary[summary["policy"] == policy].iloc[0]
            for metric in METRICS:
                values = np.array([tail[metric].mean() for tail in tails])
                assert row[f"{metric}_mean"] == pytest.approx(values.mean(), rel=1e-12)
                assert row[f"{metric}_std"] == pytest.approx(values.std(), rel=1e-9, abs=1e-15)

    def test_step_traces_sum_to_returns(self, tmp_path):
        run_experiment(tiny_config(tmp_path / "out", policies=("random",), log_steps=True))
        steps = pd.read_csv(tmp_path / "out" / "steps" / "random_seed1.csv", dtype={"flags": str})
        trace = pd.read_csv(tmp_path / "out" / "random_seed1.csv")
        sums = steps.groupby("episode")["reward"].sum()
        np.testing.assert_allclose(sums.to_numpy(), trace["return"].to_numpy(), rtol=1e-12, atol=1e-12)
        assert len(steps) == 5 * 10

    def test_bs_only_trace(self, tmp_path):
        result = run_experiment(tiny_config(tmp_path / "out", log_steps=True))
        bs_only = pd.read_csv(tmp_path / "out" / "steps" / "bs_only_seed0.csv")
        assert (bs_only["action_mask"] == 1).all()
        assert (bs_only["power_w"] == 2.0).all()
        assert result.summary.set_index("policy").at["bs_only", "switch_rate_mean"] == 0.0

    def test_learning_policy_writes_checkpoint(self, tmp_path):
        config = tiny_config(
            tmp_path / "out", policies=("proposed",), agent=AgentConfig(hidden_sizes=(8,), warmup=16, batch_size=8)
        )
        run_experiment(config)
        metadata = json.loads((tmp_path / "out" / "checkpoints" / "proposed_seed2" / "metadata.json").read_text())
        assert metadata["policy"] == "proposed"
        assert metadata["seed"] == 2
        assert metadata["config"]["agent"]["hidden_sizes"] == [8]
        assert metadata["config"]["agent"]["advantage"] == "action"
        assert ExperimentConfig.model_validate(metadata["config"]).model_dump() == config.model_dump()

    def test_summarize_output_dir(self, tmp_path):
        result = run_experiment(tiny_config(tmp_path / "out"))
        seed_summary, summary = summarize_output_dir(tmp_path / "out")
        assert sorted(seed_summary["policy"].unique()) == ["bs_only", "random"]
        merged = summary.set_index("policy").loc[result.summary["policy"]]
        np.testing.assert_allclose(
            merged["return_mean"].to_numpy(), result.summary["return_mean"].to_numpy(), rtol=1e-12
        )

    def test_read_trace_rejects_bad_files(self, tmp_path):
        wrong = tmp_path / "wrong.csv"
        wrong.write_text("episode,return\n0,1.0\n")
        with pytest.raises(ValueError):
            read_trace(wrong)
        holes = tmp_path / "holes.csv"
        holes.write_text(",".join(TRACE_COLUMNS) + "\n0,1.0,,0.001,2.0,0.0\n")
        with pytest.raises(ValueError, match="missing values"):
            read_trace(holes)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ValueError):
            summarize_output_dir(tmp_path)


class TestPlotting:
    def test_render_figures(self, tmp_path):
        run_experiment(tiny_config(tmp_path / "out"))
        written = render_figures(tmp_path / "out" / "plot_data", tmp_path / "figures")
        assert sorted(p.name for p in written) == ["comparison.png", "learning_curves.png"]
        assert all(p.stat().st_size > 0 for p in written)

    def test_curve_length(self, tmp_path):
        run_experiment(tiny_config(tmp_path / "out"))
        curves = pd.read_csv(tmp_path / "out" / "plot_data" / "curves_bs_only.csv")
        assert list(curves["episode"]) == [0, 1, 2, 3, 4]
        assert (curves["power_w"] == 2.0).all()

    def test_no_plot_data(self, tmp_path):
        with pytest.raises(ValueError):
            render_figures(tmp_path, tmp_path / "figures")


class TestCompare:
    def test_all_orderings_pass(self):
        report = compare(passing_summary())
        assert report.passed
        assert all(c.status == PASS for c in report.checks)
        assert report.rankings.at["proposed", "return"] == 1
        assert report.rankings.at["bs_only", "capacity_bps"] == 7

    def test_tie_ranking(self):
        values = {"return": 1.0, "capacity_bps": 1e8, "latency_s": 1e-3, "power_w": 2.0, "switch_rate": 0.0}
        report = compare(pd.DataFrame(seed_rows("random", values) + seed_rows("round_robin", values)))
        assert (report.rankings.to_numpy() == 1).all()

    def test_bs_only_capacity_violation(self):
        summary = passing_summary()
        summary.loc[summary["policy"] == "bs_only", "capacity_bps"] = 2e9
        report = compare(summary)
        assert check(report, "bs_only_lowest_capacity").status == FAIL
        assert check(report, "proposed_highest_capacity").status == FAIL
        assert not report.passed

    def test_missing_policy_is_not_applicable(self):
        summary = passing_summary()
        summary = summary[summary["policy"] != "dqn"]
        report = compare(summary)
        assert check(report, "proposed_return_beats_dqn_ppo").status == NOT_APPLICABLE
        assert report.passed

    def test_majority_rule(self):
        summary = passing_summary()
        mask = (summary["policy"] == "proposed") & (summary["seed"] == 0)
        summary.loc[mask, "return"] = 0.0
        assert check(compare(summary), "proposed_return_beats_dqn_ppo").status == PASS
        summary.loc[(summary["policy"] == "proposed") & (summary["seed"] == 1), "return"] = 0.0
        assert check(compare(summary), "proposed_return_beats_dqn_ppo").status == FAIL

    def test_switching_decay(self):
        summary = passing_summary()
        summary.loc[summary["policy"] == "proposed", "switch_rate"] = 0.2
        assert check(compare(summary), "proposed_switching_decays").status == FAIL

    def test_informational_checks_do_not_fail_the_report(self):
        summary = passing_summary()
        summary.loc[summary["policy"] == "greedy_snr", "capacity_bps"] = 1.5e8
        report = compare(summary)
        assert check(report, "greedy_snr_capacity_above_random_round_robin").status == FAIL
        assert report.passed

    def test_differences_match_recomputation(self):
        summary = passing_summary()
        report = compare(summary)
        means = summary.groupby("policy")[METRICS].mean()
        for _, row in report.differences.iterrows():
            expected = means.at[row["policy_a"], row["metric"]] - means.at[row["policy_b"], row["metric"]]
            assert row["difference"] == pytest.approx(expected)
        assert len(report.differences) == len(METRICS) * 7 * 6
        assert list(pairwise_differences(policy_means(summary)).columns) == [
            "metric", "policy_a", "policy_b", "difference"
        ]

    def test_missing_columns(self):
        summary = passing_summary().drop(columns=["latency_s"])
        with pytest.raises(ValueError, match="latency_s"):
            compare(summary)

    def test_single_policy(self):
        summary = passing_summary()
        with pytest.raises(ValueError):
            compare(summary[summary["policy"] == "proposed"])

    def test_text_report(self):
        text = compare(passing_summary()).to_text()
        assert "bs_only_power_exact" in text
        assert "PASS" in text


class TestPhysicsAnchors:
    def test_all_anchors_hold(self):
        table = physics_anchors()
        assert len(table) == 3
        assert table["ok"].all()


class TestConfig:
    def test_profiles(self):
        assert load_experiment_config(profile="desk").episodes == 2000
        assert load_experiment_config(profile="paper").episodes == 10_000
        assert load_experiment_config().episodes == 10_000

    def test_layering(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"episodes": 40, "seeds": [4, 5], "qos_class": "HRLLC"}))
        config = load_experiment_config(path, profile="desk", overrides={"episodes": 7, "seeds": None})
        assert config.episodes == 7
        assert config.seeds == [4, 5]
        assert config.env_config().qos.max_latency == 2e-3

    def test_policy_names_normalized(self):
        config = ExperimentConfig(policies=["Round-Robin", "round_robin", "proposed"])
        assert config.policies == ["round_robin", "proposed"]

    def test_link_overrides_reach_the_environment(self):
        config = ExperimentConfig(link_overrides={"leo": {"tx_power": 45.0}}, frozen=True)
        env_config = config.env_config()
        assert env_config.link_overrides == {"leo": {"tx_power": 45.0}}
        assert env_config.frozen

    @pytest.mark.parametrize(
        "overrides",
        [
            {"policies": ["oracle"]},
            {"seeds": [1, 1]},
            {"seeds": []},
            {"seeds": [-1]},
            {"episodes": 0},
            {"steps_per_episode": 1},
            {"link_overrides": {"wifi": {"tx_power": 1.0}}},
            {"link_overrides": {"bs": {"bandwidth": -5.0}}},
            {"colour": "blue"},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            load_experiment_config(overrides=overrides)

    def test_unknown_profile(self):
        with pytest.raises(ConfigError, match="Unknown profile"):
            load_experiment_config(profile="huge")

    def test_unreadable_files(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment_config(tmp_path / "missing.json")
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(ConfigError):
            load_experiment_config(broken)
        listing = tmp_path / "list.json"
        listing.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_experiment_config(listing)


@pytest.mark.slow
class TestDeskScaleOrderings:
    def test_expected_orderings(self, tmp_path):
        overrides = {"output_dir": str(tmp_path / "desk"), "agent": {"advantage": "state"}}
        config = load_experiment_config(profile="desk", overrides=overrides)
        result = run_experiment(config)
        report = compare(result.seed_summary)
        assert report.passed, report.to_text()
        assert math.isclose(result.summary.set_index("policy").at["bs_only", "power_w_mean"], 2.0)
