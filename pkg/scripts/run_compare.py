"""Pair-sampled training followed by the all-pairs comparison against the baseline.

    python3 scripts/run_compare.py scenarios/pairs24.ini --seed 0 --csv compare.csv
"""

import argparse
from pathlib import Path

from satroute.experiments import run_comparison
from satroute.metrics import comparison_csv, summary_text
from satroute.scenario import load_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("scenario")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--episodes", type=int, default=None)
    parser.add_argument("--csv", type=Path, default=None, help="also write the per-pair table")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario).with_overrides(episodes=args.episodes)
    _, rows, summary = run_comparison(scenario, seed=args.seed)
    print(summary_text(summary), end="")
    if args.csv:
        args.csv.write_text(comparison_csv(rows))


if __name__ == "__main__":
    main()
