"""Multi-seed fixed-pair training on one or more scenarios; prints convergence per seed.

    python3 scripts/run_static.py scenarios/static12.ini scenarios/static24.ini --seeds 5
"""

import argparse

from satroute.experiments import median_convergence, run_seeds
from satroute.scenario import load_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("scenarios", nargs="+")
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--episodes", type=int, default=None)
    args = parser.parse_args()

    medians = {}
    for path in args.scenarios:
        scenario = load_scenario(path).with_overrides(episodes=args.episodes)
        runs = run_seeds(scenario, range(args.seeds))
        print(f"{path}: optimum {runs[0].optimum:.3f}, hop distance {runs[0].hop_distance}")
        for r in runs:
            print(f"  seed {r.seed}: convergence {r.convergence}, final smoothed {r.final_smoothed:.3f}, "
                  f"greedy {'arrived' if r.greedy.arrived else r.greedy.terminal.value} "
                  f"in {r.greedy.hops} hops via {r.greedy_path}")
        medians[path] = median_convergence(runs)
        print(f"  median convergence {medians[path]}")
    if len(medians) == 2:
        (a, ma), (b, mb) = medians.items()
        print(f"ratio {b} / {a}: {mb / ma:.2f}")


if __name__ == "__main__":
    main()
