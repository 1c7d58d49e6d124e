"""Offline evaluation: composite rewards, smoothing, convergence, comparison."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from .baseline import multi_cost_dijkstra
from .environment import EpisodeTrace, TerminalKind
from .madrl import AgentSet, greedy_route
from .topology import HIGH_LOAD, LinkLoads, Topology


@dataclass(frozen=True)
class CompositeWeights:
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 1.0
    w5: float = 1.0
    # drop weight of the local reward; None reuses w4
    w6: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("w1", "w2", "w3", "w4", "w5", "w6"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"weight {name} must be non-negative")

    @property
    def drop_weight(self) -> float:
        return self.w4 if self.w6 is None else self.w6

    def scaled(self, c: float) -> "CompositeWeights":
        return CompositeWeights(self.w1 * c, self.w2 * c, self.w3 * c, self.w4 * c, self.w5 * c,
                                None if self.w6 is None else self.w6 * c)


def global_reward(
    trace: EpisodeTrace,
    weights: CompositeWeights = CompositeWeights(),
    utilization: Literal["max", "mean"] = "max",
    utilization_sign: float = 1.0,
) -> float:
    """End-to-end reward ``w1*U - w2*L - w3*D`` of a finished episode.

    ``U`` is the max (or mean) traversed link load, ``L`` the hop count and
    ``D`` is 1 for a dropped packet. ``utilization_sign=-1`` turns the
    utilization term into a penalty.
    """
    if not trace.steps:
        raise ValueError("empty trace")
    link_loads = [s.link_load for s in trace.steps]
    if utilization == "max":
        u = max(link_loads)
    elif utilization == "mean":
        u = float(np.mean(link_loads))
    else:
        raise ValueError(f"unknown utilization mode {utilization!r}")
    dropped = 1.0 if trace.terminal is TerminalKind.DROPPED else 0.0
    return utilization_sign * weights.w1 * u - weights.w2 * trace.hops - weights.w3 * dropped


def local_reward(
    threshold_margin: float,
    local_delay: float,
    local_drop: float,
    weights: CompositeWeights = CompositeWeights(),
) -> float:
    return weights.w4 * threshold_margin - weights.w5 * local_delay - weights.drop_weight * local_drop


def hop_local_reward(load: float, dropped: bool, weights: CompositeWeights = CompositeWeights(),
                     threshold: float = HIGH_LOAD) -> float:
    """Local reward of one hop: margin below ``threshold``, unit delay, drop flag."""
    return local_reward(threshold - load, 1.0, float(dropped), weights)


def smooth(history: Sequence[float], window: int = 50) -> np.ndarray:
    """Trailing moving average over at most ``window`` past points."""
    if window < 1:
        raise ValueError("window must be at least 1")
    x = np.asarray(history, dtype=np.float64)
    if x.size == 0:
        return x
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def convergence_episode(smoothed: Sequence[float], plateau: float, tolerance: float,
                        sustain: int = 50) -> Optional[int]:
    """First index from which the series stays within ``tolerance`` of
    ``plateau`` for ``sustain`` consecutive episodes, or None."""
    if sustain < 1:
        raise ValueError("sustain must be at least 1")
    ok = np.abs(np.asarray(smoothed, dtype=np.float64) - plateau) <= tolerance
    run = 0
    for i, hit in enumerate(ok):
        run = run + 1 if hit else 0
        if run >= sustain:
            return i - sustain + 1
    return None


@dataclass(frozen=True)
class ComparisonRow:
    src: int
    dst: int
    rl_hops: int
    rl_maxload: float
    rl_arrived: bool
    spf_hops: int
    spf_maxload: float
    spf_feasible: bool = True


COMPARISON_COLUMNS = ("src", "dst", "rl_hops", "rl_maxload", "rl_arrived", "spf_hops", "spf_maxload")


@dataclass(frozen=True)
class ComparisonSummary:
    pairs: int
    arrived: int
    share_arrived: float
    share_fewer_hops: float
    share_not_more_hops: float
    share_rl_over_high: float
    share_spf_over_high: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def compare_all_pairs(agents: AgentSet, topo: Topology, loads: LinkLoads
                      ) -> tuple[list[ComparisonRow], ComparisonSummary]:
    """Greedy learner route vs. baseline route for every ordered pair.

    Hop shares are taken over the pairs the learner delivered; overload
    shares (any traversed link above 80% load) over delivered pairs as well.
    """
    rows = []
    for src in range(topo.n_nodes):
        for dst in range(topo.n_nodes):
            if src == dst:
                continue
            outcome, _ = greedy_route(agents, topo, loads, src, dst)
            spf = multi_cost_dijkstra(topo, loads, src, dst)
            rows.append(ComparisonRow(src, dst, outcome.hops, outcome.max_link_load, outcome.arrived,
                                      spf.hops, spf.max_load, spf.feasible))
    return rows, summarize(rows)


def summarize(rows: Sequence[ComparisonRow]) -> ComparisonSummary:
    arrived = [r for r in rows if r.rl_arrived]
    n_arr = len(arrived)

    def share(pred: Iterable[bool], denom: int) -> float:
        return sum(pred) / denom if denom else 0.0

    return ComparisonSummary(
        pairs=len(rows),
        arrived=n_arr,
        share_arrived=share((True for _ in arrived), len(rows)),
        share_fewer_hops=share((r.rl_hops < r.spf_hops for r in arrived), n_arr),
        share_not_more_hops=share((r.rl_hops <= r.spf_hops for r in arrived), n_arr),
        share_rl_over_high=share((r.rl_maxload > HIGH_LOAD for r in arrived), n_arr),
        share_spf_over_high=share((r.spf_maxload > HIGH_LOAD for r in arrived), n_arr),
    )


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARISON_COLUMNS)
    for r in rows:
        writer.writerow([r.src, r.dst, r.rl_hops, f"{r.rl_maxload:.6f}", int(r.rl_arrived),
                         r.spf_hops, f"{r.spf_maxload:.6f}"])
    return buf.getvalue()


def summary_text(summary: ComparisonSummary) -> str:
    lines = []
    for key, value in summary.as_dict().items():
        lines.append(f"{key} = {value:.6f}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"
