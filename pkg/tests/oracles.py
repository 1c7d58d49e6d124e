"""Independent reference implementations used only by the tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from satroute.qnet import QNetwork


def manhattan(rows: int, a: int, b: int) -> int:
    ra, ca = a % rows, a // rows
    rb, cb = b % rows, b // rows
    return abs(ra - rb) + abs(ca - cb)


def grid_adjacency(rows: int, cols: int) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for c in range(cols):
        for r in range(rows):
            node = c * rows + r
            adj[node] = set()
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= rr < rows and 0 <= cc < cols:
                    adj[node].add(cc * rows + rr)
    return adj


def naive_forward(net: QNetwork, x: list[float]) -> list[float]:
    act = list(map(float, x))
    n_layers = len(net.weights)
    for k in range(n_layers):
        w, b = net.weights[k], net.biases[k]
        out = []
        for j in range(w.shape[1]):
            s = float(b[j])
            for i in range(w.shape[0]):
                s += act[i] * float(w[i, j])
            out.append(s if k == n_layers - 1 else max(s, 0.0))
        act = out
    return act


def numeric_gradient(net: QNetwork, obs: np.ndarray, action: int, target: float,
                     eps: float = 1e-5) -> np.ndarray:
    theta = net.flat()
    grad = np.zeros_like(theta)
    probe = net.copy()

    def loss(t: np.ndarray) -> float:
        probe.set_flat(t)
        q = naive_forward(probe, list(obs))[action]
        return 0.5 * (q - target) ** 2

    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += eps
        down[i] -= eps
        grad[i] = (loss(up) - loss(down)) / (2 * eps)
    return grad


def simple_paths(adj: dict[int, list[tuple[int, float]]], source: int, dest: int):
    """Every simple path from source to dest as ``(nodes, hop_loads)``."""
    stack = [(source, (source,), ())]
    while stack:
        u, path, hop_loads = stack.pop()
        if u == dest:
            yield path, hop_loads
            continue
        for v, load in adj[u]:
            if v not in path:
                stack.append((v, path + (v,), hop_loads + (load,)))


def enumerate_baseline(topo, loads, source: int, dest: int) -> tuple[tuple[int, ...], bool]:
    """Brute-force baseline route under (exclude > 0.8, hops, load sum, lexicographic)."""
    full: dict[int, list[tuple[int, float]]] = {u: [] for u in range(topo.n_nodes)}
    for (u, d), load in loads.items():
        full[u].append((topo.neighbor(u, d), load))
    filtered = {u: [(v, l) for v, l in nbrs if l <= 0.8] for u, nbrs in full.items()}

    best = None
    for path, hop_loads in simple_paths(filtered, source, dest):
        key = (len(path) - 1, sum(map(Fraction, hop_loads), Fraction(0)), path)
        if best is None or key < best:
            best = key
    if best is not None:
        return best[2], True
    for path, hop_loads in simple_paths(full, source, dest):
        key = (sum((1 + Fraction(l) for l in hop_loads), Fraction(0)), path)
        if best is None or key < best:
            best = key
    return best[1], False


def compass_agents(topo):
    """Hand-built agents whose greedy action always moves toward the destination."""
    from satroute.madrl import Agent, AgentConfig, AgentSet
    from satroute.qnet import ReplayBuffer

    w1 = np.zeros((11, 4))
    w1[9, 0], w1[9, 1] = -1.0, 1.0  # row offset -> up / down
    w1[10, 2], w1[10, 3] = -1.0, 1.0  # column offset -> left / right
    net = QNetwork([w1, np.eye(4)], [np.zeros(4), np.zeros(4)])
    config = AgentConfig(hidden=(4,))
    agents = [Agent(n, net.copy(), net.copy(), ReplayBuffer(10)) for n in range(topo.n_nodes)]
    return AgentSet(topo, config, agents=agents)


def synthetic_trace(hop_loads, terminal="arrived"):
    """Straight-line trace along row 0 with the given per-hop loads."""
    from satroute.environment import EpisodeTrace, Step, TerminalKind
    from satroute.topology import Direction

    kind = TerminalKind(terminal)
    steps = [Step(i, Direction.RIGHT, i + 1, 0.0, float(load)) for i, load in enumerate(hop_loads)]
    if steps:
        last = steps[-1]
        steps[-1] = Step(last.node, last.action, last.next_node, 0.0, last.link_load, kind)
    return EpisodeTrace(0, len(steps), steps)
