"""
Ordering report over per-seed summaries.

Input is the seed-level summary table (one row per policy and seed, metric
means over the last window of episodes). The report ranks policies per
metric, lists pairwise differences of the across-seed means and evaluates
the qualitative orderings expected of the proposed agent.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from saginmc.learning.baselines import PolicyKind

logger = logging.getLogger(__name__)

# metric -> True when larger is better
METRIC_DIRECTIONS: Dict[str, bool] = {
    "return": True,
    "capacity_bps": True,
    "latency_s": False,
    "power_w": False,
    "switch_rate": False,
}
BS_ONLY_POWER_W = 2.0
SWITCH_DECAY_RATIO = 0.25
MAJORITY_FRACTION = 2.0 / 3.0

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "n/a"

P = PolicyKind


@dataclass
class OrderingCheck:
    name: str
    description: str
    status: str
    detail: str = ""
    informational: bool = False


@dataclass
class CompareReport:
    means: pd.DataFrame
    rankings: pd.DataFrame
    differences: pd.DataFrame
    checks: List[OrderingCheck] = field(default_factory=list)

    @property
    def violations(self) -> List[OrderingCheck]:
        return [check for check in self.checks if check.status == FAIL and not check.informational]

    @property
    def passed(self) -> bool:
        return not self.violations

    def checks_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [vars(check) for check in self.checks],
            columns=["name", "description", "status", "detail", "informational"],
        )

    def to_text(self) -> str:
        lines = ["Mean over seeds (last window of episodes):", self.means.to_string(), ""]
        lines += ["Rankings (1 = best, ties share the lowest rank):", self.rankings.to_string(), ""]
        lines.append("Ordering checks:")
        for check in self.checks:
            tag = " (informational)" if check.informational else ""
            detail = f" [{check.detail}]" if check.detail else ""
            lines.append(f"  {check.status.upper():4s} {check.name}{tag}: {check.description}{detail}")
        return "\n".join(lines)


def _validate(seed_summary: pd.DataFrame) -> None:
    required = ["policy", "seed", *METRIC_DIRECTIONS]
    missing_columns = [col for col in required if col not in seed_summary.columns]
    if missing_columns:
        raise ValueError(f"Missing required columns in summary: {missing_columns}")
    if seed_summary["policy"].nunique() < 2:
        raise ValueError("Comparison needs summaries for at least 2 policies")


def policy_means(seed_summary: pd.DataFrame) -> pd.DataFrame:
    order = list(pd.unique(seed_summary["policy"]))
    means = seed_summary.groupby("policy", sort=False)[list(METRIC_DIRECTIONS)].mean()
    return means.loc[order]


def rank_policies(means: pd.DataFrame) -> pd.DataFrame:
    return pd.DataFrame(
        {metric: means[metric].rank(method="min", ascending=not higher).astype(int)
         for metric, higher in METRIC_DIRECTIONS.items()},
        index=means.index,
    )


def pairwise_differences(means: pd.DataFrame) -> pd.DataFrame:
    """Long table of mean(policy_a) - mean(policy_b) for every ordered pair and metric."""
    rows = []
    for metric in METRIC_DIRECTIONS:
        for a in means.index:
            for b in means.index:
                if a != b:
                    rows.append({"metric": metric, "policy_a": a, "policy_b": b,
                                 "difference": float(means.at[a, metric] - means.at[b, metric])})
    return pd.DataFrame(rows, columns=["metric", "policy_a", "policy_b", "difference"])


def _per_seed(seed_summary: pd.DataFrame, metric: str, policies: Sequence[str]) -> Optional[pd.DataFrame]:
    """Seed x policy table of `metric`, restricted to seeds where every policy is present."""
    table = seed_summary.pivot_table(index="seed", columns="policy", values=metric, aggfunc="mean")
    if any(policy not in table.columns for policy in policies):
        return None
    table = table[list(policies)].dropna()
    return table if len(table) else None


def _seed_rule(
    name: str,
    description: str,
    seed_summary: pd.DataFrame,
    metric: str,
    policies: Sequence[str],
    holds: Callable[[pd.Series], bool],
    majority: bool,
    informational: bool = False,
) -> OrderingCheck:
    table = _per_seed(seed_summary, metric, policies)
    if table is None:
        return OrderingCheck(name, description, NOT_APPLICABLE, "required policy missing", informational)
    hits = sum(bool(holds(row)) for _, row in table.iterrows())
    needed = math.ceil(MAJORITY_FRACTION * len(table) - 1e-9) if majority else len(table)
    status = PASS if hits >= needed else FAIL
    return OrderingCheck(name, description, status, f"{hits}/{len(table)} seeds, need {needed}", informational)


def _strictly_best(policy: str, higher_is_better: bool = False) -> Callable[[pd.Series], bool]:
    """`policy` strictly best (lowest when not higher_is_better) among the row's policies."""
    def holds(row: pd.Series) -> bool:
        others = row.drop(policy)
        if higher_is_better:
            return bool(np.all(row[policy] > others))
        return bool(np.all(row[policy] < others))
    return holds


def ordering_checks(seed_summary: pd.DataFrame) -> List[OrderingCheck]:
    present = list(pd.unique(seed_summary["policy"]))
    proposed, bs_only = P.PROPOSED.value, P.BS_ONLY.value
    checks = [
        _seed_rule(
            "proposed_return_beats_dqn_ppo",
            "proposed return above DQN and PPO on at least 2 of 3 seeds",
            seed_summary, "return", [proposed, P.DQN.value, P.PPO.value],
            lambda row: row[proposed] > row[P.DQN.value] and row[proposed] > row[P.PPO.value],
            majority=True,
        ),
        _switch_decay_check(seed_summary),
        _seed_rule(
            "bs_only_lowest_capacity",
            "BS-only has the lowest capacity of all policies on every seed",
            seed_summary, "capacity_bps", [bs_only, *[p for p in present if p != bs_only]],
            _strictly_best(bs_only), majority=False,
        ),
        _seed_rule(
            "proposed_highest_capacity",
            "proposed has the highest capacity on at least 2 of 3 seeds",
            seed_summary, "capacity_bps", [proposed, *[p for p in present if p != proposed]],
            _strictly_best(proposed, higher_is_better=True), majority=True,
        ),
        _seed_rule(
            "proposed_latency_below_random_round_robin",
            "proposed latency below random and round-robin on every seed",
            seed_summary, "latency_s", [proposed, P.RANDOM.value, P.ROUND_ROBIN.value],
            lambda row: row[proposed] < row[P.RANDOM.value] and row[proposed] < row[P.ROUND_ROBIN.value],
            majority=False,
        ),
        _seed_rule(
            "proposed_lowest_latency",
            "proposed has the lowest latency on at least 2 of 3 seeds",
            seed_summary, "latency_s", [proposed, *[p for p in present if p != proposed]],
            _strictly_best(proposed), majority=True,
        ),
        _seed_rule(
            "bs_only_power_exact",
            f"BS-only mean power equals {BS_ONLY_POWER_W} W on every seed",
            seed_summary, "power_w", [bs_only],
            lambda row: abs(row[bs_only] - BS_ONLY_POWER_W) < 1e-9, majority=False,
        ),
        _seed_rule(
            "proposed_power_above_bs_only",
            "proposed power above BS-only on every seed",
            seed_summary, "power_w", [proposed, bs_only],
            lambda row: row[proposed] > row[bs_only], majority=False,
        ),
        _seed_rule(
            "greedy_snr_capacity_above_random_round_robin",
            "greedy-SNR capacity above random and round-robin on every seed",
            seed_summary, "capacity_bps", [P.GREEDY_SNR.value, P.RANDOM.value, P.ROUND_ROBIN.value],
            lambda row: row[P.GREEDY_SNR.value] > row[P.RANDOM.value]
            and row[P.GREEDY_SNR.value] > row[P.ROUND_ROBIN.value],
            majority=False, informational=True,
        ),
        _seed_rule(
            "dqn_capacity_above_random_round_robin",
            "DQN capacity above random and round-robin on every seed",
            seed_summary, "capacity_bps", [P.DQN.value, P.RANDOM.value, P.ROUND_ROBIN.value],
            lambda row: row[P.DQN.value] > row[P.RANDOM.value] and row[P.DQN.value] > row[P.ROUND_ROBIN.value],
            majority=False, informational=True,
        ),
    ]
    return checks


def _switch_decay_check(seed_summary: pd.DataFrame) -> OrderingCheck:
    name = "proposed_switching_decays"
    description = f"proposed switching rate over the last window below {SWITCH_DECAY_RATIO:.0%} of the first"
    cells = seed_summary[seed_summary["policy"] == P.PROPOSED.value]
    if cells.empty or "switch_rate_first" not in seed_summary.columns:
        return OrderingCheck(name, description, NOT_APPLICABLE, "required policy or column missing")
    last = float(cells["switch_rate"].mean())
    first = float(cells["switch_rate_first"].mean())
    status = PASS if last < SWITCH_DECAY_RATIO * first else FAIL
    return OrderingCheck(name, description, status, f"last {last:.4f} vs first {first:.4f}")


def compare(seed_summary: pd.DataFrame) -> CompareReport:
    """Rankings, pairwise differences and ordering checks for the given summaries."""
    _validate(seed_summary)
    means = policy_means(seed_summary)
    report = CompareReport(
        means=means,
        rankings=rank_policies(means),
        differences=pairwise_differences(means),
        checks=ordering_checks(seed_summary),
    )
    for check in report.violations:
        logger.warning(f"Ordering violated: {check.name} ({check.detail})")
    return report
