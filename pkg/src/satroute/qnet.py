"""Feedforward Q-function approximator with hand-written backpropagation.

Layers are dense; hidden layers use ReLU and the output layer is linear with
one Q-value per direction. Training is plain SGD on the half mean squared
TD error of the taken action.

Checkpoint layout (all integers little-endian uint32, floats float64 LE)::

    b"QNET"  version(=1)  n_sizes  size_0 ... size_{n-1}
    for each layer k:  W_k (size_k x size_{k+1}, row-major)  b_k (size_{k+1})
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .environment import OBS_DIM

N_ACTIONS = 4
DEFAULT_LAYOUT = (OBS_DIM, 64, 64, N_ACTIONS)
_MAGIC = b"QNET"
_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class QNetwork:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layout(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    def set_flat(self, theta: np.ndarray) -> None:
        i = 0
        for w, b in zip(self.weights, self.biases):
            w[...] = theta[i:i + w.size].reshape(w.shape)
            i += w.size
            b[...] = theta[i:i + b.size]
            i += b.size

    def is_finite(self) -> bool:
        return all(np.isfinite(w).all() and np.isfinite(b).all()
                   for w, b in zip(self.weights, self.biases))


def _check_layout(layout: Sequence[int], *, strict_io: bool) -> None:
    if len(layout) < 2 or any(int(s) < 1 for s in layout):
        raise ValueError(f"invalid layer layout {tuple(layout)}")
    if strict_io and (layout[0] != OBS_DIM or layout[-1] != N_ACTIONS):
        raise ValueError(f"layout must start at {OBS_DIM} and end at {N_ACTIONS}, got {tuple(layout)}")


def init_network(layout: Sequence[int] = DEFAULT_LAYOUT, seed: int | np.random.Generator = 0,
                 *, strict_io: bool = True) -> QNetwork:
    """Gaussian weights with std ``1/sqrt(fan_in)``, zero biases."""
    _check_layout(layout, strict_io=strict_io)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layout[:-1], layout[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return QNetwork(weights, biases)


def _forward_cache(net: QNetwork, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    acts = [x]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w + b
        acts.append(z if k == last else np.maximum(z, 0.0))
    return acts[-1], acts


def forward(net: QNetwork, obs: np.ndarray) -> np.ndarray:
    """Q-values for one observation ``(d,)`` or a batch ``(B, d)``."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape[-1] != net.weights[0].shape[0]:
        raise ValueError(f"observation has dimension {obs.shape[-1]}, network expects {net.weights[0].shape[0]}")
    out, _ = _forward_cache(net, obs)
    return out


def td_target(reward: float, terminal: bool, next_q: np.ndarray, next_mask: np.ndarray,
              gamma: float) -> float:
    """One-step bootstrap target ``r + gamma * max_valid Q(s', a')``."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if terminal:
        return float(reward)
    mask = np.asarray(next_mask, dtype=bool)
    if not mask.any():
        raise ValueError("non-terminal transition has no valid next action")
    return float(reward + gamma * np.max(np.asarray(next_q)[mask]))


def td_targets(rewards: np.ndarray, terminals: np.ndarray, next_q: np.ndarray,
               next_masks: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized :func:`td_target` over a batch."""
    live = ~terminals
    if (live & ~next_masks.any(axis=1)).any():
        raise ValueError("non-terminal transition has no valid next action")
    best = np.where(next_masks, next_q, -np.inf).max(axis=1)
    return rewards + gamma * np.where(live, best, 0.0)


def loss_and_grads(net: QNetwork, obs: np.ndarray, actions: np.ndarray, targets: np.ndarray
                   ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Half mean squared error on the taken actions and its parameter gradients."""
    obs = np.atleast_2d(obs)
    actions = np.asarray(actions, dtype=np.int64)
    out, acts = _forward_cache(net, obs)
    batch = np.arange(len(actions))
    err = out[batch, actions] - targets
    loss = 0.5 * float(np.mean(err ** 2))

    delta = np.zeros_like(out)
    delta[batch, actions] = err / len(actions)
    grad_w: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    grad_b: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    for k in range(len(net.weights) - 1, -1, -1):
        grad_w[k] = acts[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ net.weights[k].T) * (acts[k] > 0)
    return loss, grad_w, grad_b


def train_batch(net: QNetwork, obs: np.ndarray, actions: np.ndarray, targets: np.ndarray,
                learning_rate: float = 1e-3) -> float:
    """One SGD step in place; returns the loss before the update.

    Raises ``FloatingPointError`` without touching ``net`` if any gradient
    is non-finite.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if len(targets) == 0:
        raise ValueError("empty batch")
    if not np.isfinite(targets).all():
        raise ValueError("non-finite TD targets")
    loss, gw, gb = loss_and_grads(net, obs, actions, targets)
    if not all(np.isfinite(g).all() for g in gw + gb):
        raise FloatingPointError("non-finite gradient; update skipped")
    for w, b, dw, db in zip(net.weights, net.biases, gw, gb):
        w -= learning_rate * dw
        b -= learning_rate * db
    return loss


def sync_target(net: QNetwork) -> QNetwork:
    return net.copy()


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    next_mask: np.ndarray
    next_agent: int
    terminal: bool


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    next_masks: np.ndarray
    next_agents: np.ndarray
    terminals: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class ReplayBuffer:
    """Bounded FIFO of transitions backed by preallocated arrays."""

    capacity: int = 10_000
    obs_dim: int = OBS_DIM
    _size: int = field(default=0, init=False)
    _head: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be positive")
        c, d = self.capacity, self.obs_dim
        self._obs = np.zeros((c, d))
        self._next_obs = np.zeros((c, d))
        self._actions = np.zeros(c, dtype=np.int64)
        self._rewards = np.zeros(c)
        self._masks = np.zeros((c, N_ACTIONS), dtype=bool)
        self._agents = np.zeros(c, dtype=np.int64)
        self._terminals = np.zeros(c, dtype=bool)

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        i = self._head
        self._obs[i] = t.obs
        self._actions[i] = t.action
        self._rewards[i] = t.reward
        self._next_obs[i] = t.next_obs
        self._masks[i] = t.next_mask
        self._agents[i] = t.next_agent
        self._terminals[i] = t.terminal
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _order(self) -> np.ndarray:
        start = self._head if self._size == self.capacity else 0
        return (start + np.arange(self._size)) % self.capacity

    def _gather(self, idx: np.ndarray) -> Batch:
        return Batch(self._obs[idx], self._actions[idx], self._rewards[idx], self._next_obs[idx],
                     self._masks[idx], self._agents[idx], self._terminals[idx])

    def __iter__(self):
        for i in self._order():
            yield Transition(self._obs[i].copy(), int(self._actions[i]), float(self._rewards[i]),
                             self._next_obs[i].copy(), self._masks[i].copy(),
                             int(self._agents[i]), bool(self._terminals[i]))

    def all(self) -> Batch:
        """All stored transitions, oldest first."""
        return self._gather(self._order())

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform sample of indices, with replacement."""
        if self._size < batch_size:
            raise ValueError(f"buffer holds {self._size} transitions, need {batch_size}")
        idx = rng.integers(0, self._size, size=batch_size)
        return self._gather(idx)


def save_network(net: QNetwork, path: str | Path) -> None:
    layout = net.layout
    header = _MAGIC + struct.pack(f"<II{len(layout)}I", _VERSION, len(layout), *layout)
    Path(path).write_bytes(header + net.flat().astype("<f8").tobytes())


def load_network(path: str | Path, expected_layout: Sequence[int] | None = None) -> QNetwork:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise CheckpointError(f"{path}: not a QNET checkpoint")
    version, n = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    layout = struct.unpack_from(f"<{n}I", data, 12)
    if expected_layout is not None and tuple(layout) != tuple(expected_layout):
        raise CheckpointError(f"{path}: layout {layout} does not match expected {tuple(expected_layout)}")
    net = init_network(layout, 0, strict_io=False)
    theta = np.frombuffer(data, dtype="<f8", offset=12 + 4 * n)
    if theta.size != net.n_params:
        raise CheckpointError(f"{path}: expected {net.n_params} parameters, found {theta.size}")
    net.set_flat(theta.astype(np.float64))
    return net
