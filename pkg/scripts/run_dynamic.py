"""Static vs. dynamic load evolution: tail mean and variance of the smoothed reward.

    python3 scripts/run_dynamic.py scenarios/static12.ini scenarios/dynamic12.ini
"""

import argparse

import numpy as np

from satroute.experiments import TAIL_FRACTION, run_seeds
from satroute.scenario import load_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("static")
    parser.add_argument("dynamic")
    parser.add_argument("--seeds", type=int, default=5)
    args = parser.parse_args()

    print(f"statistics over the final {TAIL_FRACTION:.0%} of episodes")
    for label, path in (("static", args.static), ("dynamic", args.dynamic)):
        runs = run_seeds(load_scenario(path), range(args.seeds))
        for r in runs:
            print(f"  {label} seed {r.seed}: mean {r.tail_mean:.3f}, smoothed var {r.tail_var:.4f}, "
                  f"raw var {r.tail_raw_var:.3f}")
        print(f"{label} medians: mean {np.median([r.tail_mean for r in runs]):.3f}, "
              f"smoothed var {np.median([r.tail_var for r in runs]):.4f}, "
              f"raw var {np.median([r.tail_raw_var for r in runs]):.3f}")


if __name__ == "__main__":
    main()
