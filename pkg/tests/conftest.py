"""Shared fixtures and script helpers."""

from __future__ import annotations

import json

import pytest

from robopilot import Graph, ScriptedBackend, Session, parse_script
from robopilot.memory import AgentConfig


def tool_call_response(calls, reasoning="working"):
    """Build a wire-format tool-call response body."""
    records = []
    for i, (name, args, group) in enumerate(calls):
        records.append({"id": f"c{i + 1}", "group": group, "name": name, "args": args})
    return json.dumps({"reasoning": reasoning, "tool_calls": records})


def script_backend(rules_text: str) -> ScriptedBackend:
    return ScriptedBackend(parse_script(rules_text))


def make_session(
    scenario: str,
    rules_text: str,
    config: AgentConfig | None = None,
    extra_tools=(),
    constant_overrides=None,
    log_dir=None,
) -> Session:
    return Session(
        "test",
        scenario,
        backend=script_backend(rules_text),
        config=config,
        extra_tools=extra_tools,
        constant_overrides=constant_overrides,
        log_dir=log_dir,
    )


@pytest.fixture
def four_node_graph() -> Graph:
    graph = Graph()
    for name in ("/rosout", "/talker", "/listener", "/parameter_server"):
        graph.register_node(name)
    return graph


FIG3_SCRIPT = """\
trigger: list of ROS nodes
{"reasoning": "The user wants a list of available nodes; call node_list.", "tool_calls": [{"id": "c1", "group": 0, "name": "node_list", "args": {}}]}
---
trigger: "nodes"
Here is a list of available nodes: /rosout, /talker, /listener, /parameter_server
"""
