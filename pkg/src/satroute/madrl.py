"""Fully decentralized multi-agent DQN routing.

Every satellite owns an online network, a target network and a replay
buffer. A transition is stored only by the satellite that acted; its TD
target bootstraps from the target network of the satellite that received
the packet, since that satellite makes the next decision.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np

from .environment import (
    EpisodeOutcome,
    EpisodeTrace,
    RewardConfig,
    RoutingEnv,
    TerminalKind,
    evolve_loads,
)
from .qnet import (
    N_ACTIONS,
    OBS_DIM,
    CheckpointError,
    QNetwork,
    ReplayBuffer,
    Transition,
    forward,
    init_network,
    load_network,
    save_network,
    sync_target,
    td_targets,
    train_batch,
)
from .topology import Direction, LinkLoads, Topology

log = logging.getLogger(__name__)

PairMode = Literal["fixed", "random"]


@dataclass(frozen=True)
class AgentConfig:
    hidden: tuple[int, ...] = (64, 64)
    gamma: float = 0.95
    learning_rate: float = 1e-3
    batch_size: int = 32
    buffer_capacity: int = 10_000
    warmup: int = 500
    target_interval: int = 200

    @property
    def layout(self) -> tuple[int, ...]:
        return (OBS_DIM, *self.hidden, N_ACTIONS)


@dataclass(frozen=True)
class TrainingRunConfig:
    episodes: int = 2000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    # per-episode decay factor; None picks the factor that brings epsilon to
    # 0.1 at 60% of the episode budget
    epsilon_decay: Optional[float] = None
    pair_mode: PairMode = "fixed"
    source: Optional[int] = None
    dest: Optional[int] = None
    dynamic_evolution: bool = False
    evolution_increment: float = 0.2
    seed: int = 0
    agent: AgentConfig = field(default_factory=AgentConfig)

    def __post_init__(self) -> None:
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if not (0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0):
            raise ValueError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_decay is not None and not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must lie in (0, 1]")
        if self.pair_mode not in ("fixed", "random"):
            raise ValueError(f"unknown pair_mode {self.pair_mode!r}")

    def decay_factor(self) -> float:
        if self.epsilon_decay is not None:
            return self.epsilon_decay
        if self.episodes == 0 or self.epsilon_start <= 0.1:
            return 1.0
        return (0.1 / self.epsilon_start) ** (1.0 / (0.6 * self.episodes))

    def epsilon(self, episode: int) -> float:
        return max(self.epsilon_end, self.epsilon_start * self.decay_factor() ** episode)

    def fixed_pair(self, topo: Topology) -> tuple[int, int]:
        src = 0 if self.source is None else self.source
        dst = topo.n_nodes - 1 if self.dest is None else self.dest
        return src, dst


@dataclass
class Agent:
    node: int
    online: QNetwork
    target: QNetwork
    buffer: ReplayBuffer
    updates: int = 0


class AgentSet:
    """One independent DQN agent per satellite."""

    def __init__(self, topo: Topology, config: AgentConfig | None = None, seed: int = 0,
                 agents: list[Agent] | None = None) -> None:
        self.topo = topo
        self.config = config or AgentConfig()
        if agents is None:
            seeds = np.random.SeedSequence(seed).spawn(topo.n_nodes)
            agents = []
            for node, ss in enumerate(seeds):
                net = init_network(self.config.layout, np.random.default_rng(ss))
                agents.append(Agent(node, net, sync_target(net), ReplayBuffer(self.config.buffer_capacity)))
        if len(agents) != topo.n_nodes:
            raise ValueError(f"need exactly one agent per node ({topo.n_nodes}), got {len(agents)}")
        self.agents = agents

    def __len__(self) -> int:
        return len(self.agents)

    def __getitem__(self, node: int) -> Agent:
        return self.agents[node]

    def q_values(self, node: int, obs: np.ndarray) -> np.ndarray:
        return forward(self.agents[node].online, obs)

    def learn_step(self, node: int, rng: np.random.Generator) -> Optional[float]:
        """One SGD step for ``node`` if its buffer is past warm-up."""
        cfg = self.config
        agent = self.agents[node]
        if len(agent.buffer) < max(cfg.warmup, cfg.batch_size):
            return None
        batch = agent.buffer.sample(cfg.batch_size, rng)
        next_q = np.zeros((len(batch), N_ACTIONS))
        live = ~batch.terminals
        for j in np.unique(batch.next_agents[live]):
            rows = live & (batch.next_agents == j)
            next_q[rows] = forward(self.agents[j].target, batch.next_obs[rows])
        targets = td_targets(batch.rewards, batch.terminals, next_q, batch.next_masks, cfg.gamma)
        loss = train_batch(agent.online, batch.obs, batch.actions, targets, cfg.learning_rate)
        agent.updates += 1
        if agent.updates % cfg.target_interval == 0:
            if not agent.online.is_finite():
                raise FloatingPointError(f"agent {node} has non-finite parameters")
            agent.target = sync_target(agent.online)
        return loss

    def save(self, directory: str | Path) -> None:
        """Write one QNET checkpoint per node plus ``manifest.json``."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for agent in self.agents:
            name = f"agent_{agent.node:03d}.qnet"
            save_network(agent.online, out / name)
            files.append(name)
        manifest = {
            "format": "satroute-agents/1",
            "topology": {"rows": self.topo.rows, "cols": self.topo.cols, "wrap": self.topo.wrap},
            "layout": list(self.config.layout),
            "agent_config": {**asdict(self.config), "hidden": list(self.config.hidden)},
            "files": files,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory: str | Path, topo: Topology | None = None) -> "AgentSet":
        src = Path(directory)
        try:
            manifest = json.loads((src / "manifest.json").read_text())
        except FileNotFoundError as exc:
            raise CheckpointError(f"{src}: no manifest.json") from exc
        t = manifest["topology"]
        stored = Topology(t["rows"], t["cols"], t["wrap"])
        if topo is not None and topo != stored:
            raise CheckpointError(
                f"checkpoint is for a {stored.rows}x{stored.cols} grid (wrap={stored.wrap}), "
                f"scenario is {topo.rows}x{topo.cols} (wrap={topo.wrap})")
        cfg_dict = dict(manifest["agent_config"])
        cfg_dict["hidden"] = tuple(cfg_dict["hidden"])
        config = AgentConfig(**cfg_dict)
        if len(manifest["files"]) != stored.n_nodes:
            raise CheckpointError(f"manifest lists {len(manifest['files'])} agents for {stored.n_nodes} nodes")
        agents = []
        for node, name in enumerate(manifest["files"]):
            net = load_network(src / name, expected_layout=manifest["layout"])
            agents.append(Agent(node, net, sync_target(net), ReplayBuffer(config.buffer_capacity)))
        return cls(stored, config, agents=agents)


def select_action(net: QNetwork, obs: np.ndarray, epsilon: float, mask: np.ndarray,
                  rng: np.random.Generator | None = None) -> Direction:
    """Epsilon-greedy over valid actions; greedy ties go to the lowest index."""
    valid = np.flatnonzero(mask)
    if valid.size == 0:
        raise ValueError("no valid action")
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("exploration needs a random generator")
        if rng.random() < epsilon:
            return Direction(int(valid[rng.integers(valid.size)]))
    q = forward(net, obs)
    return Direction(int(np.argmax(np.where(mask, q, -np.inf))))


def run_episode(agents: AgentSet, env: RoutingEnv, epsilon: float, learn: bool,
                rng: np.random.Generator | None = None) -> tuple[EpisodeTrace, list[Transition]]:
    """Route the packet of a freshly reset ``env`` until the episode ends."""
    if env.done:
        raise ValueError("environment must be reset before running an episode")
    transitions: list[Transition] = []
    obs = env.observation()
    while not env.done:
        node = env.node
        action = select_action(agents[node].online, obs, epsilon, env.valid_actions(), rng)
        next_obs, reward, kind = env.step(action)
        t = Transition(
            obs=obs,
            action=int(action),
            reward=reward,
            next_obs=next_obs,
            next_mask=env.valid_actions(),
            next_agent=env.node,
            terminal=kind in (TerminalKind.ARRIVED, TerminalKind.DROPPED),
        )
        transitions.append(t)
        if learn:
            agents[node].buffer.push(t)
            agents.learn_step(node, rng)
        obs = next_obs
    return env.trace, transitions


@dataclass
class RewardHistory:
    total_reward: list[float] = field(default_factory=list)
    hops: list[int] = field(default_factory=list)
    max_load: list[float] = field(default_factory=list)
    outcome: list[TerminalKind] = field(default_factory=list)
    source: list[int] = field(default_factory=list)
    dest: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.total_reward)

    def append(self, trace: EpisodeTrace) -> None:
        self.total_reward.append(trace.total_reward)
        self.hops.append(trace.hops)
        self.max_load.append(trace.max_link_load)
        self.outcome.append(trace.terminal)
        self.source.append(trace.source)
        self.dest.append(trace.destination)

    @property
    def rewards(self) -> np.ndarray:
        return np.asarray(self.total_reward, dtype=np.float64)


def train(
    topo: Topology,
    loads: LinkLoads,
    config: TrainingRunConfig | None = None,
    rewards: RewardConfig | None = None,
) -> tuple[AgentSet, RewardHistory]:
    """Train one agent per node for ``config.episodes`` single-packet episodes.

    With ``dynamic_evolution`` each episode sees ``loads`` plus the
    evolution increment on the links the previous episode used.
    """
    config = config or TrainingRunConfig()
    init_ss, explore_ss, pair_ss = np.random.SeedSequence(config.seed).spawn(3)
    agents = AgentSet(topo, config.agent, seed=int(init_ss.generate_state(1)[0]))
    rng = np.random.default_rng(explore_ss)
    pair_rng = np.random.default_rng(pair_ss)
    env = RoutingEnv(topo, loads, rewards)
    history = RewardHistory()
    previous: EpisodeTrace | None = None
    fixed = config.fixed_pair(topo)
    n = topo.n_nodes
    for episode in range(config.episodes):
        if config.pair_mode == "fixed":
            src, dst = fixed
        else:
            src = int(pair_rng.integers(n))
            dst = int(pair_rng.integers(n - 1))
            dst += dst >= src
        ep_loads = evolve_loads(loads, previous, config.evolution_increment) \
            if config.dynamic_evolution else loads
        env.reset(src, dst, ep_loads)
        trace, _ = run_episode(agents, env, config.epsilon(episode), learn=True, rng=rng)
        history.append(trace)
        previous = trace
        if (episode + 1) % 500 == 0:
            recent = history.rewards[-500:]
            log.info("episode %d: eps=%.3f mean reward(last 500)=%.2f",
                     episode + 1, config.epsilon(episode), recent.mean())
    return agents, history


def greedy_route(
    agents: AgentSet,
    topo: Topology,
    loads: LinkLoads,
    source: int,
    dest: int,
    rewards: RewardConfig | None = None,
) -> tuple[EpisodeOutcome, list[int]]:
    """Roll out the greedy policy without learning."""
    env = RoutingEnv(topo, loads, rewards)
    env.reset(source, dest)
    trace, _ = run_episode(agents, env, 0.0, learn=False)
    return trace.outcome(), trace.path
