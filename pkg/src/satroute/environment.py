"""Single-packet routing MDP with the shaped hop reward.

Each episode routes one packet from a source to a destination over the
cluster. The satellite currently holding the packet observes its adjacent
link loads, the direction the packet came from and a normalized offset to
the destination, then picks an outgoing ISL.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .topology import Direction, LinkLoads, Topology

OBS_DIM = 11
# slot layout of an observation vector
LOAD_SLICE = slice(0, 4)
PREV_SLICE = slice(4, 9)
DEST_SLICE = slice(9, 11)

DEFAULT_EVOLUTION_INCREMENT = 0.2


class EpisodeFinishedError(RuntimeError):
    pass


class TerminalKind(str, enum.Enum):
    NONE = "none"
    ARRIVED = "arrived"
    DROPPED = "dropped"
    HOP_LIMIT = "hop_limit"


@dataclass(frozen=True)
class RewardConfig:
    psi: float = 1.0
    Psi: float = 10.0
    xi1: float = 1.0
    xi2: float = 1.0
    xi3: float = 2.0
    Xi: float = 10.0
    low_threshold: float = 0.4
    high_threshold: float = 0.8
    saturation_threshold: float = 1.0

    def __post_init__(self) -> None:
        for name in ("psi", "Psi", "xi1", "xi2", "xi3", "Xi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"reward magnitude {name} must be positive")
        if self.Psi < 10 * self.psi:
            raise ValueError("Psi must be at least ten times psi")
        if self.Xi < 10 * self.psi:
            raise ValueError("Xi must be at least ten times psi")
        if not self.low_threshold < self.high_threshold < self.saturation_threshold:
            raise ValueError("thresholds must be strictly increasing")

    def load_component(self, load: float) -> float:
        """Load-band reward of traversing a link with utilization ``load``.

        ``load == low_threshold`` falls into the middle band.
        """
        if load >= self.saturation_threshold:
            return -self.Xi
        if load > self.high_threshold:
            return -self.xi3
        if load >= self.low_threshold:
            return -self.xi2
        return self.xi1


@dataclass(frozen=True)
class Step:
    node: int
    action: Direction
    next_node: int
    reward: float
    link_load: float
    terminal: TerminalKind = TerminalKind.NONE


@dataclass(frozen=True)
class EpisodeOutcome:
    arrived: bool
    hops: int
    max_link_load: float
    total_reward: float
    terminal: TerminalKind = TerminalKind.NONE


@dataclass
class EpisodeTrace:
    source: int
    destination: int
    steps: list[Step] = field(default_factory=list)

    @property
    def hops(self) -> int:
        return len(self.steps)

    @property
    def path(self) -> list[int]:
        return [self.source] + [s.next_node for s in self.steps]

    @property
    def terminal(self) -> TerminalKind:
        return self.steps[-1].terminal if self.steps else TerminalKind.NONE

    @property
    def total_reward(self) -> float:
        return float(sum(s.reward for s in self.steps))

    @property
    def max_link_load(self) -> float:
        return max((s.link_load for s in self.steps), default=0.0)

    def links(self) -> list[tuple[int, Direction]]:
        return [(s.node, s.action) for s in self.steps]

    def outcome(self) -> EpisodeOutcome:
        kind = self.terminal
        return EpisodeOutcome(
            arrived=kind is TerminalKind.ARRIVED,
            hops=self.hops,
            max_link_load=self.max_link_load,
            total_reward=self.total_reward,
            terminal=kind,
        )


def dest_offset(topo: Topology, node: int, dest: int) -> tuple[float, float]:
    r0, c0 = topo.coords(node)
    r1, c1 = topo.coords(dest)
    dr, dc = r1 - r0, c1 - c0
    if topo.wrap:
        # shortest signed offset around the ring
        dr = (dr + topo.rows // 2) % topo.rows - topo.rows // 2
        dc = (dc + topo.cols // 2) % topo.cols - topo.cols // 2
    return dr / topo.rows, dc / topo.cols


def encode_observation(
    topo: Topology,
    loads: LinkLoads,
    node: int,
    dest: int,
    prev_hop: Optional[Direction],
) -> np.ndarray:
    """Local view of ``node``: 4 link loads, 5-way previous-hop one-hot, offset.

    ``prev_hop`` is the direction from ``node`` back to the satellite the
    packet arrived from. Missing ISLs report a load of 1.0.
    """
    obs = np.zeros(OBS_DIM)
    row = loads.array[node]
    obs[LOAD_SLICE] = np.where(topo.neighbor_table[node] >= 0, row, 1.0)
    obs[4 if prev_hop is None else 5 + int(prev_hop)] = 1.0
    obs[DEST_SLICE] = dest_offset(topo, node, dest)
    return obs


class RoutingEnv:
    """One packet, one episode. Loads are frozen for the episode's duration."""

    def __init__(
        self,
        topo: Topology,
        loads: LinkLoads,
        rewards: RewardConfig | None = None,
        hop_limit: int | None = None,
    ) -> None:
        if loads.topology != topo:
            raise ValueError("load map belongs to a different topology")
        self.topo = topo
        self.loads = loads
        self.rewards = rewards or RewardConfig()
        self.hop_limit = hop_limit if hop_limit is not None else 4 * topo.n_nodes
        self.trace: EpisodeTrace | None = None
        self.done = True

    def reset(self, source: int, dest: int, loads: LinkLoads | None = None) -> np.ndarray:
        n = self.topo.n_nodes
        if not (0 <= source < n and 0 <= dest < n):
            raise ValueError(f"source/destination out of range: {source}, {dest}")
        if source == dest:
            raise ValueError("source and destination must differ")
        if loads is not None:
            if loads.topology != self.topo:
                raise ValueError("load map belongs to a different topology")
            self.loads = loads
        self.source, self.dest = source, dest
        self.node = source
        self.prev_hop: Optional[Direction] = None
        self.visited = {source}
        self.hops = 0
        self.trace = EpisodeTrace(source, dest)
        self.done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        return encode_observation(self.topo, self.loads, self.node, self.dest, self.prev_hop)

    def valid_actions(self, node: int | None = None) -> np.ndarray:
        node = self.node if node is None else node
        return self.topo.neighbor_table[node] >= 0

    def compute_reward(self, action: Direction) -> tuple[float, TerminalKind]:
        """Reward and terminal kind of taking ``action`` from the current node.

        Does not change the environment.
        """
        nxt = self.topo.neighbor_table[self.node, action]
        if nxt < 0:
            raise ValueError(f"no ISL from node {self.node} going {Direction(action).name}")
        nxt = int(nxt)
        cfg = self.rewards
        load = float(self.loads.array[self.node, action])
        load_part = cfg.load_component(load)
        dropped = load >= cfg.saturation_threshold

        dist = self.topo.distances
        d_cur, d_next = dist[self.node, self.dest], dist[nxt, self.dest]
        if nxt == self.dest and not dropped:
            return cfg.Psi + load_part, TerminalKind.ARRIVED
        if d_next < d_cur:
            path_part = cfg.psi
        elif nxt in self.visited:
            path_part = -cfg.Psi
        else:
            path_part = -cfg.psi
        kind = TerminalKind.DROPPED if dropped else TerminalKind.NONE
        return path_part + load_part, kind

    def step(self, action: Direction | int) -> tuple[np.ndarray, float, TerminalKind]:
        if self.done:
            raise EpisodeFinishedError("episode already finished; call reset()")
        action = Direction(action)
        reward, kind = self.compute_reward(action)
        nxt = int(self.topo.neighbor_table[self.node, action])
        load = float(self.loads.array[self.node, action])
        self.hops += 1
        if kind is TerminalKind.NONE and self.hops >= self.hop_limit:
            kind = TerminalKind.HOP_LIMIT
        self.trace.steps.append(Step(self.node, action, nxt, reward, load, kind))
        self.node = nxt
        self.prev_hop = action.opposite
        self.visited.add(nxt)
        self.done = kind is not TerminalKind.NONE
        return self.observation(), reward, kind


def evolve_loads(
    base: LinkLoads,
    previous: EpisodeTrace | None,
    increment: float = DEFAULT_EVOLUTION_INCREMENT,
) -> LinkLoads:
    """Add ``increment`` to each directed link the previous episode used.

    Links used more than once are incremented once. ``base`` is untouched.
    """
    if previous is None or not previous.steps:
        return base
    used = set(previous.links())
    return base.with_updates({link: min(1.0, base[link] + increment) for link in used})


def optimal_path_reward(
    topo: Topology,
    loads: LinkLoads,
    source: int,
    dest: int,
    rewards: RewardConfig | None = None,
) -> float:
    """Best total episode reward over minimum-hop routes from source to dest.

    Along a shortest route every hop reduces the distance, so the path
    component is fixed and only the load bands differ between routes.
    """
    cfg = rewards or RewardConfig()
    dist = topo.distances
    table = topo.neighbor_table
    best: dict[int, float] = {dest: 0.0}
    for node in sorted(range(topo.n_nodes), key=lambda v: dist[v, dest]):
        if node == dest:
            continue
        values = []
        for d in Direction:
            nxt = table[node, d]
            if nxt < 0 or dist[nxt, dest] != dist[node, dest] - 1:
                continue
            load = float(loads.array[node, d])
            if load >= cfg.saturation_threshold:
                continue
            path_part = cfg.Psi if nxt == dest else cfg.psi
            values.append(path_part + cfg.load_component(load) + best[int(nxt)])
        best[node] = max(values) if values else -np.inf
    return float(best[source])
