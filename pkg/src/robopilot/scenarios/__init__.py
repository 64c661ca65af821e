"""Scenario definitions: robot profiles bound to a fresh simulator graph.

A scenario is described by a plain key-value text file (see FILE_FORMAT)
naming the robot kind, its system prompts, constants, descriptions, and a
seed graph; the robot-specific tool bindings live in `robots.py`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..agent import SafetyState
from ..builtin_tools import register_builtin_tools
from ..errors import UnknownScenario
from ..graphsim import Graph
from ..memory import Message
from ..tools import Blacklist, ToolRegistry
from . import robots
from .robots import CarterState, EelsState, SpotState

FILE_FORMAT = """\
Scenario files are UTF-8 text, one `key = value` pair per line. Blank
lines and lines starting with `#` are ignored. Keys may repeat; repeated
keys accumulate in order. Recognized keys:

  name         = scenario identifier
  kind         = robot kind: spot | eels | carter | none
  rsp          = one system prompt line (repeatable)
  description.<slot> = fixed scene description text
  const.<name> = numeric constant (heading_error_deg, obstacle_distance_m,
                 fov_deg, ...)
  graph.node   = extra introspection-only node to seed (repeatable)
  blacklist    = global blacklist entry (exact name or trailing-* glob)
"""


@dataclass
class ScenarioDef:
    name: str
    kind: str = "none"
    robot_prompts: list[str] = field(default_factory=list)
    descriptions: dict[str, str] = field(default_factory=dict)
    constants: dict[str, float] = field(default_factory=dict)
    seed_nodes: list[str] = field(default_factory=list)
    blacklist: list[str] = field(default_factory=list)


@dataclass
class ScenarioRuntime:
    definition: ScenarioDef
    graph: Graph
    registry: ToolRegistry
    state: SpotState | EelsState | CarterState | None
    robot_prompts: list[Message]


def parse_scenario(text: str) -> ScenarioDef:
    defn = ScenarioDef(name="")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UnknownScenario(f"bad scenario line {lineno}: {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "name":
            defn.name = value
        elif key == "kind":
            defn.kind = value
        elif key == "rsp":
            defn.robot_prompts.append(value)
        elif key.startswith("description."):
            defn.descriptions[key[len("description."):]] = value
        elif key.startswith("const."):
            defn.constants[key[len("const."):]] = float(value)
        elif key == "graph.node":
            defn.seed_nodes.append(value)
        elif key == "blacklist":
            defn.blacklist.append(value)
        else:
            raise UnknownScenario(f"unknown scenario key {key!r} at line {lineno}")
    if not defn.name:
        raise UnknownScenario("scenario file lacks a name")
    return defn


def load_scenario_def(name_or_path: str | Path) -> ScenarioDef:
    path = Path(name_or_path)
    if path.suffix == ".scenario" and path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    package_file = resources.files(__package__) / "data" / f"{name_or_path}.scenario"
    try:
        return parse_scenario(package_file.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UnknownScenario(f"unknown scenario: {name_or_path}")


def available_scenarios() -> list[str]:
    data_dir = resources.files(__package__) / "data"
    return sorted(
        entry.name[: -len(".scenario")]
        for entry in data_dir.iterdir()
        if entry.name.endswith(".scenario")
    )


def build_scenario(
    name_or_def: str | ScenarioDef,
    safety: SafetyState,
    log_dir: str | Path | None = None,
    constant_overrides: dict[str, float] | None = None,
) -> ScenarioRuntime:
    """Instantiate a fresh graph, registry, and robot state for a scenario."""
    defn = (
        name_or_def
        if isinstance(name_or_def, ScenarioDef)
        else load_scenario_def(name_or_def)
    )
    constants = dict(defn.constants)
    constants.update(constant_overrides or {})
    log_path = None
    if log_dir is not None:
        log_path = Path(log_dir) / f"{defn.name}.log"
    graph = Graph(log_path=log_path)
    registry = ToolRegistry(global_blacklist=Blacklist.of(defn.blacklist))
    register_builtin_tools(registry, graph)

    state: SpotState | EelsState | CarterState | None
    if defn.kind == "spot":
        state = SpotState()
        robots.register_spot_tools(registry, graph, state, safety, defn.descriptions)
    elif defn.kind == "eels":
        state = EelsState(
            heading_error_deg=constants.get("heading_error_deg", 0.3)
        )
        robots.register_eels_tools(registry, graph, state, safety, defn.descriptions)
    elif defn.kind == "carter":
        state = CarterState(
            fov_deg=constants.get("fov_deg", 90.0),
            obstacle_distance_m=constants.get("obstacle_distance_m", 4.0),
        )
        robots.register_carter_tools(registry, graph, state, safety, defn.descriptions)
    elif defn.kind == "none":
        state = None
    else:
        raise UnknownScenario(f"unknown robot kind: {defn.kind}")

    for node in defn.seed_nodes:
        graph.register_node(node)

    prompts = [Message("system", text) for text in defn.robot_prompts]
    return ScenarioRuntime(defn, graph, registry, state, prompts)
