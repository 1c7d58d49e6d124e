import math

from satroute.experiments import median_convergence, run_comparison, run_fixed_pair
from satroute.scenario import Scenario, parse_scenario

SHORT = parse_scenario("[training]\nepisodes = 30\nhidden = 8\nwarmup = 16\n")


def test_fixed_pair_run_fields():
    run = run_fixed_pair(SHORT, seed=2)
    assert run.seed == 2 and run.hop_distance == 5
    assert run.optimum == 19.0
    assert run.greedy_path[0] == 0
    assert math.isfinite(run.tail_mean) and run.tail_var >= 0


def test_zero_episodes():
    run = run_fixed_pair(Scenario().with_overrides(episodes=0), seed=0)
    assert run.convergence is None and math.isnan(run.tail_mean)


def test_median_treats_never_as_infinite():
    runs = [run_fixed_pair(SHORT, seed=s) for s in range(3)]
    fake = [r.__class__(**{**r.__dict__, "convergence": c}) for r, c in zip(runs, [4, None, 10])]
    assert median_convergence(fake) == 10.0
    fake = [r.__class__(**{**r.__dict__, "convergence": c}) for r, c in zip(runs, [4, None, None])]
    assert median_convergence(fake) == math.inf


def test_comparison_forces_random_pairs():
    _, rows, summary = run_comparison(SHORT, seed=0)
    assert len(rows) == 132 and summary.pairs == 132
