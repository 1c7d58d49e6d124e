"""Command-line entry point.

    satroute train    --scenario S --out DIR
    satroute compare  --scenario S --checkpoint DIR --out FILE.csv
    satroute baseline --scenario S SOURCE DEST

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Sequence

from .baseline import multi_cost_dijkstra
from .environment import optimal_path_reward
from .madrl import AgentSet, RewardHistory, train
from .metrics import compare_all_pairs, comparison_csv, convergence_episode, smooth, summary_text
from .qnet import CheckpointError
from .scenario import Scenario, ScenarioError, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
REWARD_COLUMNS = ("episode", "total_reward", "smoothed_reward", "hops", "max_load", "outcome")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rewards_csv(history: RewardHistory, window: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REWARD_COLUMNS)
    smoothed = smooth(history.total_reward, window)
    for i in range(len(history)):
        writer.writerow([i, f"{history.total_reward[i]:.6f}", f"{smoothed[i]:.6f}", history.hops[i],
                         f"{history.max_load[i]:.6f}", history.outcome[i].value])
    return buf.getvalue()


def _scenario(args: argparse.Namespace) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    return scenario.with_overrides(seed=args.seed, episodes=args.episodes)


def cmd_train(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    topo, loads = scenario.topology(), scenario.link_loads()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    agents, history = train(topo, loads, scenario.training, scenario.reward)
    agents.save(out / "checkpoints")
    (out / "rewards.csv").write_text(rewards_csv(history, scenario.eval.smoothing_window))
    print(f"trained {len(history)} episodes on {topo.rows}x{topo.cols} grid -> {out}")
    if scenario.training.pair_mode == "fixed" and len(history):
        src, dst = scenario.training.fixed_pair(topo)
        plateau = optimal_path_reward(topo, loads, src, dst, scenario.reward)
        conv = convergence_episode(smooth(history.total_reward, scenario.eval.smoothing_window),
                                   plateau, scenario.tolerance, scenario.eval.convergence_sustain)
        status = f"episode {conv}" if conv is not None else "not reached"
        print(f"optimal path reward {plateau:.3f}; convergence: {status}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    topo, loads = scenario.topology(), scenario.link_loads()
    agents = AgentSet.load(args.checkpoint, topo)
    rows, summary = compare_all_pairs(agents, topo, loads)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(comparison_csv(rows))
    text = summary_text(summary)
    out.with_name(out.stem + "_summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    topo, loads = scenario.topology(), scenario.link_loads()
    n = topo.n_nodes
    if not (0 <= args.source < n and 0 <= args.dest < n):
        raise UsageError(f"nodes must lie in 0..{n - 1}")
    if args.source == args.dest:
        raise UsageError("source and destination must differ")
    result = multi_cost_dijkstra(topo, loads, args.source, args.dest)
    print("path: " + " ".join(map(str, result.nodes)))
    print(f"hops: {result.hops}")
    print(f"max_load: {result.max_load:.6f}")
    print(f"load_sum: {result.load_sum:.6f}")
    print(f"feasible: {str(result.feasible).lower()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="satroute", description="Decentralized DQN routing on satellite clusters")
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", type=str, default=None, help="scenario file (default: built-in 4x3)")
        p.add_argument("--seed", type=int, default=None, help="override [training] seed")
        p.add_argument("--episodes", type=int, default=None, help="override [training] episodes")

    p = sub.add_parser("train", help="train one agent per satellite")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="all-pairs learner vs. baseline table")
    common(p)
    p.add_argument("--checkpoint", required=True, help="checkpoint directory written by train")
    p.add_argument("--out", required=True, help="comparison CSV path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("baseline", help="print the baseline route for one pair")
    common(p)
    p.add_argument("source", type=int)
    p.add_argument("dest", type=int)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, UsageError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
