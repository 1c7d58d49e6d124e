"""Grid model of a satellite cluster with four ISLs per satellite.

Nodes are numbered column-major (``id = col * rows + row``) so that on the
4x6 cluster node 4 sits right of node 0 and node 23 sits below node 22.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Iterator, Mapping, Optional

import numpy as np

HIGH_LOAD = 0.8
SATURATED = 1.0


class TopologyError(ValueError):
    pass


class Direction(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]

    @classmethod
    def parse(cls, text: str | int) -> "Direction":
        if isinstance(text, (int, np.integer)):
            return cls(int(text))
        key = text.strip().upper()
        if key.isdigit():
            return cls(int(key))
        aliases = {"U": "UP", "D": "DOWN", "L": "LEFT", "R": "RIGHT"}
        return cls[aliases.get(key, key)]


_OPPOSITE = {
    Direction.UP: Direction.DOWN,
    Direction.DOWN: Direction.UP,
    Direction.LEFT: Direction.RIGHT,
    Direction.RIGHT: Direction.LEFT,
}

# (d_row, d_col) per direction
_STEP = {
    Direction.UP: (-1, 0),
    Direction.DOWN: (1, 0),
    Direction.LEFT: (0, -1),
    Direction.RIGHT: (0, 1),
}


@dataclass(frozen=True)
class Topology:
    rows: int
    cols: int
    wrap: bool = False

    def __post_init__(self) -> None:
        if self.rows < 2 or self.cols < 2:
            raise TopologyError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if self.wrap and (self.rows < 3 or self.cols < 3):
            raise TopologyError(f"torus needs at least 3x3, got {self.rows}x{self.cols}")

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def node_id(self, row: int, col: int) -> int:
        return col * self.rows + row

    def coords(self, node: int) -> tuple[int, int]:
        """Return ``(row, col)`` of ``node``."""
        self._check(node)
        return node % self.rows, node // self.rows

    def _check(self, node: int) -> None:
        if not 0 <= node < self.n_nodes:
            raise TopologyError(f"node {node} out of range for {self.n_nodes}-node grid")

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """``(N, 4)`` int array of neighbor ids, ``-1`` where no ISL exists."""
        table = np.full((self.n_nodes, 4), -1, dtype=np.int64)
        for node in range(self.n_nodes):
            row, col = node % self.rows, node // self.rows
            for d, (dr, dc) in _STEP.items():
                r, c = row + dr, col + dc
                if self.wrap:
                    r, c = r % self.rows, c % self.cols
                elif not (0 <= r < self.rows and 0 <= c < self.cols):
                    continue
                table[node, d] = self.node_id(r, c)
        table.setflags(write=False)
        return table

    def neighbors(self, node: int) -> dict[Direction, Optional[int]]:
        self._check(node)
        row = self.neighbor_table[node]
        return {d: (int(row[d]) if row[d] >= 0 else None) for d in Direction}

    def neighbor(self, node: int, direction: Direction) -> Optional[int]:
        self._check(node)
        nxt = self.neighbor_table[node, direction]
        return int(nxt) if nxt >= 0 else None

    def direction_to(self, a: int, b: int) -> Direction:
        """Direction of the ISL from ``a`` to adjacent node ``b``."""
        for d in Direction:
            if self.neighbor_table[a, d] == b:
                return d
        raise TopologyError(f"nodes {a} and {b} are not adjacent")

    def links(self) -> Iterator[tuple[int, Direction]]:
        """All directed links as ``(node, direction)`` in id/direction order."""
        for node in range(self.n_nodes):
            for d in Direction:
                if self.neighbor_table[node, d] >= 0:
                    yield node, d

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop counts computed by breadth-first search."""
        n = self.n_nodes
        dist = np.full((n, n), -1, dtype=np.int64)
        table = self.neighbor_table
        for src in range(n):
            dist[src, src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in table[u]:
                    if v >= 0 and dist[src, v] < 0:
                        dist[src, v] = dist[src, u] + 1
                        queue.append(v)
        dist.setflags(write=False)
        return dist

    def hop_distance(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        return int(self.distances[a, b])


def build_grid(rows: int, cols: int, wrap: bool = False) -> Topology:
    return Topology(rows, cols, wrap)


@dataclass(frozen=True)
class LinkLoads:
    """Per-directed-link utilization, stored as an ``(N, 4)`` array.

    Entries for missing ISLs are NaN. Instances are read-only; use
    :meth:`with_updates` to derive a modified copy.
    """

    topology: Topology
    array: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.array, dtype=np.float64)
        expected = (self.topology.n_nodes, 4)
        if arr.shape != expected:
            raise TopologyError(f"load array shape {arr.shape} != {expected}")
        exists = self.topology.neighbor_table >= 0
        if np.isnan(arr[exists]).any():
            raise TopologyError("missing load for an existing ISL")
        vals = arr[exists]
        if (vals < 0).any() or (vals > 1).any():
            raise TopologyError("link loads must lie in [0, 1]")
        arr[~exists] = np.nan
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    def __getitem__(self, key: tuple[int, Direction]) -> float:
        node, d = key
        if self.topology.neighbor(node, Direction(d)) is None:
            raise KeyError(f"no ISL from node {node} going {Direction(d).name}")
        return float(self.array[node, d])

    def between(self, a: int, b: int) -> float:
        return self[a, self.topology.direction_to(a, b)]

    def items(self) -> Iterator[tuple[tuple[int, Direction], float]]:
        for node, d in self.topology.links():
            yield (node, d), float(self.array[node, d])

    def with_updates(self, updates: Mapping[tuple[int, Direction], float]) -> "LinkLoads":
        arr = self.array.copy()
        for (node, d), load in updates.items():
            if self.topology.neighbor(node, Direction(d)) is None:
                raise TopologyError(f"no ISL from node {node} going {Direction(d).name}")
            arr[node, d] = load
        return LinkLoads(self.topology, arr)

    def is_saturated(self, node: int, d: Direction) -> bool:
        return self[node, d] >= SATURATED

    @classmethod
    def uniform(cls, topology: Topology, load: float) -> "LinkLoads":
        return cls(topology, np.full((topology.n_nodes, 4), load))


def random_loads(
    topo: Topology,
    seed: int,
    hotspot_fraction: float = 0.2,
    hotspot_boost: float = 0.35,
) -> LinkLoads:
    """Draw a saturation-free, non-uniform load map.

    Base loads are uniform in [0.05, 0.6] per directed link. A randomly chosen
    ``hotspot_fraction`` of the directed links gets an extra uniform boost in
    ``[0, hotspot_boost]``; the result is clamped to 0.95.
    """
    if not (0.0 <= hotspot_fraction <= 1.0 and 0.0 <= hotspot_boost <= 1.0):
        raise ValueError("hotspot_fraction and hotspot_boost must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    links = list(topo.links())
    base = rng.uniform(0.05, 0.6, size=len(links))
    n_hot = int(round(hotspot_fraction * len(links)))
    hot = rng.choice(len(links), size=n_hot, replace=False)
    base[hot] += rng.uniform(0.0, hotspot_boost, size=n_hot)
    base = np.minimum(base, 0.95)
    arr = np.full((topo.n_nodes, 4), np.nan)
    for (node, d), load in zip(links, base):
        arr[node, d] = load
    return LinkLoads(topo, arr)
