"""Middleware simulator tests."""

from __future__ import annotations

import random

import pytest

from robopilot.errors import (
    BadLevel,
    DuplicateNode,
    InvalidName,
    NotAPublisher,
    ReentrancyError,
    SchemaViolation,
    UnknownKey,
    UnknownService,
    UnknownTopic,
)
from robopilot.graphsim import Graph


def test_register_single_node_listed_in_snapshot():
    graph = Graph()
    graph.register_node("/talker", publications=[("/chatter", "std_msgs/String")])
    snap = graph.snapshot()
    assert snap.nodes == ("/talker",)
    assert snap.topics == (("/chatter", "std_msgs/String"),)


def test_register_four_node_seed_graph(four_node_graph):
    snap = four_node_graph.snapshot()
    assert snap.nodes == ("/listener", "/parameter_server", "/rosout", "/talker")
    assert four_node_graph.node_names() == [
        "/rosout", "/talker", "/listener", "/parameter_server",
    ]


def test_register_duplicate_node_rejected():
    graph = Graph()
    graph.register_node("/talker")
    with pytest.raises(DuplicateNode):
        graph.register_node("/talker")


@pytest.mark.parametrize("name", ["talker", "/bad name", "/x//y", "", "/tr@iler"])
def test_invalid_names_rejected(name):
    with pytest.raises(InvalidName):
        Graph().register_node(name)


def test_publish_ring_buffer_overwrite():
    graph = Graph(buffer_depth=10)
    node = graph.register_node("/talker", publications=[("/chatter", "std_msgs/String")])
    for i in range(11):
        node.publish("/chatter", {"seq": i})
    topic = graph.topics["/chatter"]
    assert topic.publish_count == 11
    assert [m["seq"] for m in topic.buffer] == list(range(1, 11))


def test_publish_to_undeclared_topic_rejected():
    graph = Graph()
    graph.register_node("/talker", publications=[("/chatter", "std_msgs/String")])
    graph.register_node("/other", publications=[("/elsewhere", "std_msgs/String")])
    with pytest.raises(UnknownTopic):
        graph.publish("/talker", "/nope", {})
    with pytest.raises(NotAPublisher):
        graph.publish("/other", "/chatter", {})


def test_publish_increments_clock_by_one_and_returns_tick():
    graph = Graph()
    node = graph.register_node("/talker", publications=[("/chatter", "t")])
    before = graph.tick()
    tick = node.publish("/chatter", {})
    assert tick == before + 1
    assert graph.tick() == tick


def test_subscriber_callbacks_run_exactly_once_per_publish():
    graph = Graph()
    seen: list[dict] = []
    graph.register_node("/listener", subscriptions={"/chatter": seen.append})
    node = graph.register_node("/talker", publications=[("/chatter", "t")])
    node.publish("/chatter", {"n": 1})
    node.publish("/chatter", {"n": 2})
    assert [m["n"] for m in seen] == [1, 2]


def test_randomized_topology_delivery_counts():
    rng = random.Random(7)
    graph = Graph()
    counts: dict[tuple[str, str], int] = {}
    topics = [f"/t{i}" for i in range(5)]
    for t in topics:
        graph.register_node(f"/pub{t[2:]}", publications=[(t, "t")])
    for s in range(8):
        subs = rng.sample(topics, rng.randint(1, 4))
        def make_cb(sname, tname):
            def cb(payload):
                counts[(sname, tname)] = counts.get((sname, tname), 0) + 1
            return cb
        graph.register_node(
            f"/sub{s}", subscriptions={t: make_cb(f"/sub{s}", t) for t in subs}
        )
    expected: dict[str, int] = {t: 0 for t in topics}
    for _ in range(50):
        t = rng.choice(topics)
        graph.publish(f"/pub{t[2:]}", t, {})
        expected[t] += 1
    for (sname, tname), count in counts.items():
        assert count == expected[tname], (sname, tname)


def test_reentrant_publish_detected():
    graph = Graph()
    node_holder = {}

    def echo(payload):
        node_holder["n"].publish("/loop", payload)

    graph.register_node("/listener", subscriptions={"/loop": echo})
    node_holder["n"] = graph.register_node("/echoer", publications=[("/loop", "t")])
    with pytest.raises(ReentrancyError):
        node_holder["n"].publish("/loop", {})


def test_service_call_roundtrip_and_idempotency():
    graph = Graph()
    state = {"raised": False, "calls": 0}

    def handler(req):
        state["calls"] += 1
        state["raised"] = True
        return {"ok": True}

    graph.register_node("/head", services=[("/head_raise", {}, handler)])
    assert graph.call_service("/head_raise", {}) == {"ok": True}
    assert state["raised"]
    assert graph.call_service("/head_raise", {}) == {"ok": True}
    assert state["calls"] == 2


def test_service_schema_violations():
    graph = Graph()
    graph.register_node(
        "/svc", services=[("/move", {"x": "number", "label": "string"}, lambda r: r)]
    )
    with pytest.raises(SchemaViolation, match="x"):
        graph.call_service("/move", {"label": "a"})
    with pytest.raises(SchemaViolation, match="label"):
        graph.call_service("/move", {"x": 1, "label": 5})
    with pytest.raises(SchemaViolation, match="extra"):
        graph.call_service("/move", {"x": 1, "label": "a", "extra": 1})
    with pytest.raises(UnknownService):
        graph.call_service("/nonexistent", {})


def test_param_roundtrip_and_errors():
    graph = Graph()
    assert graph.param_access("list") == []
    graph.param_access("set", "max_speed", 1.5)
    assert graph.param_access("get", "max_speed") == 1.5
    graph.param_access("set", "a", 1)
    assert graph.param_access("list") == ["a", "max_speed"]
    with pytest.raises(UnknownKey):
        graph.param_access("get", "absent")


def test_snapshot_is_immutable_value_copy():
    graph = Graph()
    graph.register_node("/talker")
    snap = graph.snapshot()
    graph.register_node("/listener")
    assert snap.nodes == ("/talker",)
    assert Graph().snapshot().nodes == ()


def test_log_order_and_level_validation():
    graph = Graph()
    graph.register_node("/talker")
    t1 = graph.log("/talker", "INFO", "hello")
    t2 = graph.log("/talker", "ERROR", "oops")
    assert t2 > t1
    assert [e.level for e in graph.logs] == ["INFO", "ERROR"]
    with pytest.raises(BadLevel):
        graph.log("/talker", "TRACE", "nope")
    from robopilot.errors import UnknownNode

    with pytest.raises(UnknownNode):
        graph.log("/ghost", "INFO", "x")


def test_log_level_filter_count():
    graph = Graph()
    graph.register_node("/n")
    for _ in range(3):
        graph.log("/n", "ERROR", "bad")
    for _ in range(2):
        graph.log("/n", "INFO", "fine")
    errors = [e for e in graph.logs if e.level == "ERROR"]
    assert len(errors) == 3


def test_log_mirror_file_format(tmp_path):
    path = tmp_path / "robot.log"
    graph = Graph(log_path=path)
    graph.register_node("/n")
    graph.log("/n", "INFO", "hello world")
    graph.log("/n", "WARN", "careful")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["1\tINFO\t/n\thello world", "2\tWARN\t/n\tcareful"]
    assert path.read_text(encoding="utf-8").endswith("\n")


def _run_sequence(log_path):
    graph = Graph(log_path=log_path)
    node = graph.register_node("/talker", publications=[("/chatter", "t")])
    graph.register_node("/listener", subscriptions=["/chatter"])
    for i in range(5):
        node.publish("/chatter", {"i": i})
        node.log("INFO", f"sent {i}")
    graph.param_access("set", "k", "v")
    return graph.snapshot()


def test_identical_sequences_are_byte_identical(tmp_path):
    snap_a = _run_sequence(tmp_path / "a.log")
    snap_b = _run_sequence(tmp_path / "b.log")
    assert snap_a == snap_b
    assert (tmp_path / "a.log").read_bytes() == (tmp_path / "b.log").read_bytes()


def test_every_registered_entity_reachable_via_snapshot():
    graph = Graph()
    graph.register_node(
        "/a",
        publications=[("/t1", "x")],
        services=[("/s1", {}, lambda r: {})],
    )
    graph.register_node("/b", subscriptions=["/t2"])
    graph.param_access("set", "p", 1)
    snap = graph.snapshot()
    assert set(snap.nodes) == {"/a", "/b"}
    assert {t for t, _ in snap.topics} == {"/t1", "/t2"}
    assert set(snap.services) == {"/s1"}
    assert set(snap.param_keys) == {"p"}
