"""Multi-seed experiment runners shared by scripts/ and the acceptance suite."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .environment import EpisodeOutcome, optimal_path_reward
from .madrl import AgentSet, greedy_route, train
from .metrics import ComparisonRow, ComparisonSummary, compare_all_pairs, convergence_episode, smooth
from .scenario import Scenario

TAIL_FRACTION = 0.2


@dataclass(frozen=True)
class FixedPairRun:
    seed: int
    optimum: float
    convergence: Optional[int]
    final_smoothed: float
    greedy: EpisodeOutcome
    greedy_path: list[int]
    hop_distance: int
    tail_mean: float
    tail_var: float
    tail_raw_var: float

    @property
    def reached_optimum(self) -> bool:
        return self.convergence is not None

    @property
    def greedy_is_shortest(self) -> bool:
        return self.greedy.arrived and self.greedy.hops == self.hop_distance


def run_fixed_pair(scenario: Scenario, seed: int) -> FixedPairRun:
    """Train on the scenario's fixed pair and summarize the reward curve."""
    scenario = scenario.with_overrides(seed=seed)
    topo, loads = scenario.topology(), scenario.link_loads()
    src, dst = scenario.training.fixed_pair(topo)
    optimum = optimal_path_reward(topo, loads, src, dst, scenario.reward)
    agents, history = train(topo, loads, scenario.training, scenario.reward)
    smoothed = smooth(history.total_reward, scenario.eval.smoothing_window)
    conv = convergence_episode(smoothed, optimum, scenario.tolerance, scenario.eval.convergence_sustain)
    outcome, path = greedy_route(agents, topo, loads, src, dst, scenario.reward)
    k = int((1 - TAIL_FRACTION) * len(smoothed))
    tail, raw_tail = smoothed[k:], history.rewards[k:]
    return FixedPairRun(
        seed=seed,
        optimum=optimum,
        convergence=conv,
        final_smoothed=float(smoothed[-1]) if len(smoothed) else float("nan"),
        greedy=outcome,
        greedy_path=path,
        hop_distance=topo.hop_distance(src, dst),
        tail_mean=float(tail.mean()) if len(tail) else float("nan"),
        tail_var=float(tail.var()) if len(tail) else float("nan"),
        tail_raw_var=float(raw_tail.var()) if len(raw_tail) else float("nan"),
    )


def run_seeds(scenario: Scenario, seeds: Iterable[int]) -> list[FixedPairRun]:
    return [run_fixed_pair(scenario, s) for s in seeds]


def median_convergence(runs: Iterable[FixedPairRun]) -> float:
    """Median convergence episode, counting runs that never converge as infinitely late."""
    return float(np.median([np.inf if r.convergence is None else r.convergence for r in runs]))


def run_comparison(scenario: Scenario, seed: int | None = None
                   ) -> tuple[AgentSet, list[ComparisonRow], ComparisonSummary]:
    """Pair-sampled training followed by the all-pairs comparison."""
    scenario = scenario.with_overrides(seed=seed)
    training = scenario.training
    if training.pair_mode != "random":
        training = dataclasses.replace(training, pair_mode="random")
    topo, loads = scenario.topology(), scenario.link_loads()
    agents, _ = train(topo, loads, training, scenario.reward)
    rows, summary = compare_all_pairs(agents, topo, loads)
    return agents, rows, summary
