"""Rule-based multi-cost shortest-path baseline.

Paths minimize hop count over the links carrying at most 80% load, break
ties by the smallest total load and then by the lexicographically smallest
node sequence. Load sums are accumulated as exact fractions so equal sums
tie regardless of summation order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .topology import HIGH_LOAD, LinkLoads, Topology


class UnreachableError(RuntimeError):
    pass


@dataclass(frozen=True)
class PathResult:
    nodes: tuple[int, ...]
    hops: int
    max_load: float
    load_sum: float
    feasible: bool

    @classmethod
    def from_nodes(cls, nodes: tuple[int, ...], loads: LinkLoads, feasible: bool) -> "PathResult":
        hop_loads = [loads.between(a, b) for a, b in zip(nodes, nodes[1:])]
        return cls(
            nodes=tuple(nodes),
            hops=len(nodes) - 1,
            max_load=max(hop_loads, default=0.0),
            load_sum=float(sum(map(Fraction, hop_loads), Fraction(0))),
            feasible=feasible,
        )


def _dijkstra(topo: Topology, loads: LinkLoads, source: int, dest: int, *, filtered: bool):
    # label: (primary cost, secondary cost, node sequence)
    table = topo.neighbor_table
    arr = loads.array
    start = (Fraction(0), Fraction(0), (source,))
    best = {source: start}
    heap = [start]
    done: set[int] = set()
    while heap:
        label = heapq.heappop(heap)
        path = label[2]
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dest:
            return path
        for d in range(4):
            v = int(table[u, d])
            if v < 0 or v in done:
                continue
            load = float(arr[u, d])
            if filtered:
                if load > HIGH_LOAD:
                    continue
                cand = (label[0] + 1, label[1] + Fraction(load), path + (v,))
            else:
                cand = (label[0] + 1 + Fraction(load), Fraction(0), path + (v,))
            if v not in best or cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, cand)
    return None


def multi_cost_dijkstra(topo: Topology, loads: LinkLoads, source: int, dest: int) -> PathResult:
    """Min-hop route avoiding links above 80% load.

    If those links disconnect the pair, the route is recomputed on the full
    graph with per-link cost ``1 + load`` and returned with ``feasible=False``.
    """
    n = topo.n_nodes
    if not (0 <= source < n and 0 <= dest < n):
        raise ValueError(f"source/destination out of range: {source}, {dest}")
    if source == dest:
        raise ValueError("source and destination must differ")
    path = _dijkstra(topo, loads, source, dest, filtered=True)
    if path is not None:
        return PathResult.from_nodes(path, loads, feasible=True)
    path = _dijkstra(topo, loads, source, dest, filtered=False)
    if path is None:
        raise UnreachableError(f"node {dest} unreachable from {source}")
    return PathResult.from_nodes(path, loads, feasible=False)
