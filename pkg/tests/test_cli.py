import dataclasses
from pathlib import Path

import pytest

from satroute.cli import main
from satroute.environment import RewardConfig
from satroute.madrl import TrainingRunConfig
from satroute.scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from satroute.topology import Direction

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
STATIC24 = SCENARIOS / "static24.ini"


def write(tmp_path, text, name="s.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestScenario:
    def test_empty_file_is_default(self):
        s = parse_scenario("")
        assert s == Scenario()
        assert s.topology().n_nodes == 12
        assert s.training == TrainingRunConfig()
        assert s.reward == RewardConfig()
        assert s.tolerance == 2.0

    def test_bundled_static12_equals_defaults(self):
        s = load_scenario(SCENARIOS / "static12.ini")
        topo = s.topology()
        assert s.training.fixed_pair(topo) == Scenario().training.fixed_pair(topo)
        unpinned = dataclasses.replace(s.training, source=None, dest=None)
        assert dataclasses.replace(s, training=unpinned) == Scenario()

    def test_case_sensitive_reward_keys(self):
        s = parse_scenario("[reward]\npsi = 2\nPsi = 30\nXi = 20\n")
        assert (s.reward.psi, s.reward.Psi) == (2.0, 30.0)

    def test_explicit_overrides_generated(self):
        s = load_scenario(STATIC24)
        loads = s.link_loads()
        assert loads[22, Direction.DOWN] == 0.93
        assert loads[4, Direction.RIGHT] == 0.19
        generated = Scenario(cols=6).link_loads()
        assert loads[9, Direction.UP] == generated[9, Direction.UP]

    def test_hidden_and_auto_decay(self):
        s = parse_scenario("[training]\nhidden = 8, 8\nepsilon_decay = auto\n")
        assert s.training.agent.hidden == (8, 8)
        assert s.training.epsilon_decay is None

    def test_bad_value_names_line_and_key(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario("[topology]\nrows = 4\n\n[training]\nepisodes = many\n", source="x.ini")
        assert err.value.line == 5
        assert "x.ini:5" in str(err.value) and "training.episodes" in str(err.value)

    def test_unknown_key(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario("[training]\nepisodez = 3\n")
        assert err.value.line == 2 and "training.episodez" in str(err.value)

    def test_unknown_section(self):
        with pytest.raises(ScenarioError):
            parse_scenario("[plots]\ncolor = green\n")

    def test_syntax_error(self):
        with pytest.raises(ScenarioError) as err:
            parse_scenario("[topology]\nrows 4\n")
        assert err.value.line == 2

    def test_semantic_errors(self):
        for text in ("[reward]\nPsi = 2\n", "[topology]\nrows = 1\n", "[training]\ndest = 40\n",
                     "[loads]\nexplicit = 0:up:0.5\n", "[training]\nsource = 11\n"):
            with pytest.raises(ScenarioError):
                parse_scenario(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / "nope.ini")


class TestTrain:
    def test_zero_episodes(self, tmp_path):
        scen = write(tmp_path, "[training]\nepisodes = 0\n")
        assert main(["train", "--scenario", scen, "--out", str(tmp_path / "run")]) == 0
        csv = (tmp_path / "run" / "rewards.csv").read_text()
        assert csv == "episode,total_reward,smoothed_reward,hops,max_load,outcome\n"
        assert (tmp_path / "run" / "checkpoints" / "manifest.json").exists()

    def test_row_count_and_format(self, tmp_path, capsys):
        assert main(["train", "--episodes", "40", "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "rewards.csv").read_bytes().split(b"\n")
        assert lines[-1] == b"" and b"\r" not in b"".join(lines)
        rows = lines[1:-1]
        assert len(rows) == 40
        assert [int(r.split(b",")[0]) for r in rows] == list(range(40))
        assert "convergence" in capsys.readouterr().out

    def test_bad_scenario_exit_code(self, tmp_path, capsys):
        scen = write(tmp_path, "[training]\nepisodes = -3\n")
        assert main(["train", "--scenario", scen, "--out", str(tmp_path / "o")]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["train"])
        assert exc.value.code == 1


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    assert main(["train", "--episodes", "5", "--out", str(out)]) == 0
    return out / "checkpoints"


class TestCompare:
    def test_twelve_node_rows(self, checkpoint, tmp_path, capsys):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--checkpoint", str(checkpoint), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "src,dst,rl_hops,rl_maxload,rl_arrived,spf_hops,spf_maxload"
        assert len(lines) == 1 + 132
        summary = (tmp_path / "cmp_summary.txt").read_text()
        assert summary == capsys.readouterr().out
        for line in summary.splitlines():
            key, value = line.split(" = ")
            if key.startswith("share"):
                assert 0.0 <= float(value) <= 1.0

    def test_topology_mismatch(self, checkpoint, tmp_path, capsys):
        code = main(["compare", "--scenario", str(STATIC24), "--checkpoint", str(checkpoint),
                     "--out", str(tmp_path / "c.csv")])
        assert code == 1
        assert "checkpoint" in capsys.readouterr().err
        assert not (tmp_path / "c.csv").exists()

    def test_missing_checkpoint(self, tmp_path):
        assert main(["compare", "--checkpoint", str(tmp_path / "none"), "--out", str(tmp_path / "c.csv")]) == 1


class TestBaseline:
    def test_adjacent(self, capsys):
        assert main(["baseline", "0", "1"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "path: 0 1" and out[1] == "hops: 1"

    def test_same_node(self, capsys):
        assert main(["baseline", "3", "3"]) == 1
        assert "differ" in capsys.readouterr().err

    def test_out_of_range(self):
        assert main(["baseline", "0", "12"]) == 1

    def test_pinned_scenario(self, capsys):
        # expected route from the enumeration oracle; 22 -> 23 is pinned at 0.93
        assert main(["baseline", "--scenario", str(STATIC24), "4", "23"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "path: 4 8 9 10 11 15 19 23"
        assert out[1] == "hops: 7"
        assert out[-1] == "feasible: true"
