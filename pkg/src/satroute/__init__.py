"""Fully decentralized multi-agent DQN routing for satellite clusters."""

from .baseline import PathResult, multi_cost_dijkstra
from .environment import (
    EpisodeOutcome,
    EpisodeTrace,
    RewardConfig,
    RoutingEnv,
    TerminalKind,
    evolve_loads,
    optimal_path_reward,
)
from .madrl import AgentConfig, AgentSet, RewardHistory, TrainingRunConfig, greedy_route, train
from .topology import Direction, LinkLoads, Topology, build_grid, random_loads

__all__ = [
    "AgentConfig",
    "AgentSet",
    "Direction",
    "EpisodeOutcome",
    "EpisodeTrace",
    "LinkLoads",
    "PathResult",
    "RewardConfig",
    "RewardHistory",
    "RoutingEnv",
    "TerminalKind",
    "Topology",
    "TrainingRunConfig",
    "build_grid",
    "evolve_loads",
    "greedy_route",
    "multi_cost_dijkstra",
    "optimal_path_reward",
    "random_loads",
    "train",
]
