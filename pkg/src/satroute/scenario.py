"""Scenario files: INI-style sections describing one experiment.

Keys are case-sensitive (``psi`` and ``Psi`` are different constants).
Every key is optional; an empty file describes the 4x3 static scenario.
Explicit link loads are written as ``node:direction:load`` entries,
separated by commas or newlines, e.g. ``explicit = 22:down:0.93``.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .environment import RewardConfig
from .madrl import AgentConfig, TrainingRunConfig
from .topology import Direction, LinkLoads, Topology, random_loads


class ScenarioError(ValueError):
    def __init__(self, message: str, *, source: str = "<scenario>", line: int | None = None,
                 key: str | None = None) -> None:
        where = source if line is None else f"{source}:{line}"
        what = f" [{key}]" if key else ""
        super().__init__(f"{where}:{what} {message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class LoadSpec:
    seed: int = 7
    hotspot_fraction: float = 0.2
    hotspot_boost: float = 0.35
    explicit: tuple[tuple[int, Direction, float], ...] = ()


@dataclass(frozen=True)
class EvalConfig:
    smoothing_window: int = 50
    # None means psi + xi1 of the reward section
    convergence_tolerance: Optional[float] = None
    convergence_sustain: int = 50


@dataclass(frozen=True)
class Scenario:
    rows: int = 4
    cols: int = 3
    wrap: bool = False
    loads: LoadSpec = field(default_factory=LoadSpec)
    reward: RewardConfig = field(default_factory=RewardConfig)
    training: TrainingRunConfig = field(default_factory=TrainingRunConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def topology(self) -> Topology:
        return Topology(self.rows, self.cols, self.wrap)

    def link_loads(self) -> LinkLoads:
        topo = self.topology()
        base = random_loads(topo, self.loads.seed, self.loads.hotspot_fraction, self.loads.hotspot_boost)
        if not self.loads.explicit:
            return base
        return base.with_updates({(node, d): load for node, d, load in self.loads.explicit})

    @property
    def tolerance(self) -> float:
        tol = self.eval.convergence_tolerance
        return self.reward.psi + self.reward.xi1 if tol is None else tol

    def with_overrides(self, *, seed: int | None = None, episodes: int | None = None) -> "Scenario":
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if episodes is not None:
            changes["episodes"] = episodes
        if not changes:
            return self
        return dataclasses.replace(self, training=dataclasses.replace(self.training, **changes))


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str) -> Any:
        return None if text.strip().lower() in ("", "none", "auto") else conv(text)
    return parse


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in re.split(r"[,\s]+", text.strip()) if tok)


def _explicit(text: str) -> tuple[tuple[int, Direction, float], ...]:
    out = []
    for tok in re.split(r"[,\n]+", text):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(":")
        if len(parts) != 3:
            raise ValueError(f"explicit load {tok!r} is not node:direction:load")
        try:
            direction = Direction.parse(parts[1])
        except KeyError:
            raise ValueError(f"unknown direction {parts[1]!r}") from None
        out.append((int(parts[0]), direction, float(parts[2])))
    return tuple(out)


_SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "topology": {"rows": int, "cols": int, "wrap": _bool},
    "loads": {"seed": int, "hotspot_fraction": float, "hotspot_boost": float, "explicit": _explicit},
    "reward": {k: float for k in ("psi", "Psi", "xi1", "xi2", "xi3", "Xi",
                                  "low_threshold", "high_threshold", "saturation_threshold")},
    "training": {
        "episodes": int, "gamma": float, "learning_rate": float,
        "epsilon_start": float, "epsilon_end": float, "epsilon_decay": _optional(float),
        "batch_size": int, "buffer_capacity": int, "warmup": int, "target_interval": int,
        "hidden": _ints, "pair_mode": str.strip, "source": _optional(int), "dest": _optional(int),
        "dynamic_evolution": _bool, "evolution_increment": float, "seed": int,
    },
    "eval": {"smoothing_window": int, "convergence_tolerance": _optional(float),
             "convergence_sustain": int},
}
_AGENT_KEYS = {f.name for f in dataclasses.fields(AgentConfig)}


def _key_line(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", line):
            return lineno
    return None


def _section_line(text: str, section: str) -> int | None:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip() == f"[{section}]":
            return lineno
    return None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ScenarioError(exc.message.splitlines()[0], source=source, line=line) from None

    values: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ScenarioError(f"unknown section [{section}]", source=source,
                                line=_section_line(text, section))
        values[section] = {}
        for key, raw in parser.items(section):
            line = _key_line(text, section, key)
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ScenarioError("unknown key", source=source, line=line, key=f"{section}.{key}")
            try:
                values[section][key] = conv(raw)
            except ValueError as exc:
                raise ScenarioError(str(exc), source=source, line=line, key=f"{section}.{key}") from None

    def build(section: str, factory: Callable[..., Any], kwargs: dict[str, Any]) -> Any:
        try:
            return factory(**kwargs)
        except (ValueError, TypeError) as exc:
            key = next(iter(kwargs), None)
            line = _key_line(text, section, key) if key else _section_line(text, section)
            raise ScenarioError(str(exc), source=source, line=line, key=section) from None

    topo_kw = values.get("topology", {})
    reward = build("reward", RewardConfig, values.get("reward", {}))
    training_kw = dict(values.get("training", {}))
    agent_kw = {k: training_kw.pop(k) for k in list(training_kw) if k in _AGENT_KEYS}
    agent = build("training", AgentConfig, agent_kw)
    training = build("training", TrainingRunConfig, {**training_kw, "agent": agent})
    scenario = build("topology", Scenario, {
        **topo_kw,
        "loads": LoadSpec(**values.get("loads", {})),
        "reward": reward,
        "training": training,
        "eval": build("eval", EvalConfig, values.get("eval", {})),
    })
    try:
        topo = scenario.topology()
        scenario.link_loads()
    except ValueError as exc:
        raise ScenarioError(str(exc), source=source) from None
    for name in ("source", "dest"):
        node = getattr(training, name)
        if node is not None and not 0 <= node < topo.n_nodes:
            raise ScenarioError(f"node {node} out of range", source=source,
                                line=_key_line(text, "training", name), key=f"training.{name}")
    src, dst = training.fixed_pair(topo)
    if training.pair_mode == "fixed" and src == dst:
        raise ScenarioError("fixed source and dest must differ", source=source, key="training")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", source=str(path)) from None
    return parse_scenario(text, source=str(path))
