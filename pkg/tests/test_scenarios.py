"""Scenario files and the three demo robot bindings."""

from __future__ import annotations

import math
import threading
import time

import mpmath
import pytest

from robopilot.agent import SafetyState
from robopilot.errors import UnknownScenario
from robopilot.scenarios import (
    available_scenarios,
    build_scenario,
    load_scenario_def,
    parse_scenario,
)
from robopilot.scenarios.robots import (
    CAMERA_TOPIC,
    JOY_TOPIC,
    MOVE_CHECKPOINTS,
    Pose2D,
    normalize_half_open,
    panorama_plan,
)
from robopilot.tools import ToolError


def runtime_for(name, constant_overrides=None):
    safety = SafetyState()
    runtime = build_scenario(name, safety, constant_overrides=constant_overrides)
    runtime.registry.seal()
    return runtime, safety


# --- scenario files -----------------------------------------------------


def test_available_scenarios_are_packaged():
    names = available_scenarios()
    assert {"testbed", "spot", "eels", "carter"} <= set(names)


def test_parse_scenario_minimal_and_errors():
    defn = parse_scenario("name = demo\nkind = none\nrsp = You are a robot.\n")
    assert defn.name == "demo"
    assert defn.robot_prompts == ["You are a robot."]
    with pytest.raises(UnknownScenario):
        parse_scenario("kind = none\n")  # nameless
    with pytest.raises(UnknownScenario):
        parse_scenario("name = x\nwhatkey = 1\n")
    with pytest.raises(UnknownScenario):
        parse_scenario("name = x\nnot a pair\n")


def test_load_scenario_from_path(tmp_path):
    path = tmp_path / "field.scenario"
    path.write_text(
        "name = field\nkind = none\ngraph.node = /weather_station\n",
        encoding="utf-8",
    )
    defn = load_scenario_def(path)
    assert defn.name == "field"
    assert defn.seed_nodes == ["/weather_station"]


def test_unknown_scenario_name():
    with pytest.raises(UnknownScenario):
        load_scenario_def("atlantis")


def test_testbed_seeds_exactly_four_nodes():
    runtime, _ = runtime_for("testbed")
    assert runtime.graph.node_names() == [
        "/rosout", "/talker", "/listener", "/parameter_server",
    ]


def test_scenario_blacklist_reaches_node_list(tmp_path):
    path = tmp_path / "masked.scenario"
    path.write_text(
        "name = masked\nkind = none\n"
        "graph.node = /public\ngraph.node = /secret_cam\n"
        "blacklist = /secret*\n",
        encoding="utf-8",
    )
    runtime, _ = runtime_for(str(path))
    result = runtime.registry.invoke("node_list", {})
    assert result.payload["nodes"] == ["/public"]


def test_constant_override_wins():
    runtime, _ = runtime_for("eels", constant_overrides={"heading_error_deg": 1.5})
    assert runtime.state.heading_error_deg == 1.5


# --- geometry helpers ---------------------------------------------------


def test_normalize_half_open_range():
    assert normalize_half_open(180.0) == 180.0
    assert normalize_half_open(-180.0) == 180.0
    assert normalize_half_open(190.0) == -170.0
    assert normalize_half_open(540.0) == 180.0
    assert normalize_half_open(-90.0) == -90.0


def test_pose_advanced_matches_trig_oracle():
    pose = Pose2D(1.0, 2.0, 30.0)
    moved = pose.advanced(2.0)
    with mpmath.workdps(50):
        ex = float(1 + 2 * mpmath.cos(mpmath.radians(30)))
        ey = float(2 + 2 * mpmath.sin(mpmath.radians(30)))
    assert moved.x == pytest.approx(ex, abs=1e-12)
    assert moved.y == pytest.approx(ey, abs=1e-12)
    assert moved.theta == 30.0


# --- Spot ----------------------------------------------------------------


def test_spot_stand_up_via_joy_message():
    runtime, _ = runtime_for("spot")
    assert runtime.state.standing is False
    result = runtime.registry.invoke("stand_up", {})
    assert runtime.state.standing is True
    assert result.payload["standing"] is True
    topic = runtime.graph.topics[JOY_TOPIC]
    assert topic.publish_count == 1
    assert topic.buffer[-1] == {"buttons": {"B": 1}}


def test_spot_move_requires_standing():
    runtime, _ = runtime_for("spot")
    err = runtime.registry.invoke("move", {"distance_m": 1, "turn_deg": 0})
    assert isinstance(err, ToolError) and err.kind == "not_standing"
    assert runtime.state.pose.x == 0.0


def test_spot_move_then_turn():
    runtime, _ = runtime_for("spot")
    runtime.registry.invoke("stand_up", {})
    result = runtime.registry.invoke("move", {"distance_m": 2.0, "turn_deg": 90})
    pose = result.payload["pose"]
    # Forward along the initial heading, then turn in place.
    assert pose["x"] == pytest.approx(2.0)
    assert pose["y"] == pytest.approx(0.0, abs=1e-12)
    assert pose["theta"] == 90.0
    assert "2.0" in result.payload["status"]


def test_spot_turn_normalization():
    runtime, _ = runtime_for("spot")
    runtime.registry.invoke("stand_up", {})
    runtime.registry.invoke("move", {"distance_m": 0, "turn_deg": 270})
    assert runtime.state.pose.theta == -90.0


def test_spot_camera_feed_mode():
    runtime, _ = runtime_for("spot")
    assert runtime.state.camera_feed_displayed is False
    result = runtime.registry.invoke("describe_camera", {"mode": "show_feed"})
    assert result.payload["feed_displayed"] is True
    assert runtime.state.camera_feed_displayed is True
    described = runtime.registry.invoke("describe_camera", {})
    assert "description" in described.payload


def test_spot_estop_mid_move_freezes_pose():
    runtime, safety = runtime_for("spot")
    runtime.registry.invoke("stand_up", {})
    runtime.state.step_delay_s = 0.01
    result_slot = {}

    def mover():
        result_slot["obs"] = runtime.registry.invoke(
            "move", {"distance_m": 1.0, "turn_deg": 0}
        )

    thread = threading.Thread(target=mover)
    thread.start()
    time.sleep(0.035)  # a few checkpoints in
    safety.estop(runtime.graph.advance)
    pose_at_ack = runtime.state.pose.x
    thread.join()
    obs = result_slot["obs"]
    assert isinstance(obs, ToolError) and obs.kind == "cancelled"
    # No effect lands after the acknowledgement tick.
    assert runtime.state.pose.x == pose_at_ack
    committed = round(runtime.state.pose.x * MOVE_CHECKPOINTS)
    assert 0 < committed < MOVE_CHECKPOINTS


# --- EELS ----------------------------------------------------------------


def test_eels_waypoint_reports_heading_error():
    runtime, _ = runtime_for("eels")
    result = runtime.registry.invoke(
        "move_to_waypoint", {"x": 3.0, "y": 4.0, "theta": 90.0}
    )
    payload = result.payload
    assert payload["achieved"]["x"] == 3.0
    assert payload["achieved"]["theta"] == pytest.approx(90.3)
    assert payload["heading_error_deg"] == pytest.approx(0.3)
    assert "0.3 degrees" in payload["status"]
    assert "try again" in payload["status"]


def test_eels_raise_head_service_once():
    runtime, _ = runtime_for("eels")
    first = runtime.registry.invoke("raise_head", {})
    assert first.payload == {"raised": True, "service_called": True}
    assert runtime.state.head_raise_calls == 1
    second = runtime.registry.invoke("raise_head", {})
    assert second.payload == {"raised": True, "service_called": False}
    assert runtime.state.head_raise_calls == 1  # early return, no second call


def test_eels_estopped_waypoint_refused():
    runtime, safety = runtime_for("eels")
    safety.estop(runtime.graph.advance)
    err = runtime.registry.invoke("move_to_waypoint", {"x": 1, "y": 1, "theta": 0})
    assert isinstance(err, ToolError)
    assert runtime.state.pose.x == 0.0


# --- Carter --------------------------------------------------------------


def test_carter_lidar_tracks_progress():
    runtime, _ = runtime_for("carter")
    assert runtime.registry.invoke("lidar_scan", {}).payload == {
        "obstacle_distance_m": 4.0
    }
    runtime.registry.invoke("move_forward", {"distance_m": 1.5})
    remaining = runtime.registry.invoke("lidar_scan", {}).payload["obstacle_distance_m"]
    assert remaining == pytest.approx(2.5)


def test_carter_move_refuses_obstacle_violation():
    runtime, _ = runtime_for("carter")
    err = runtime.registry.invoke("move_forward", {"distance_m": 4.5})
    assert isinstance(err, ToolError) and err.kind == "obstacle_violation"
    assert runtime.state.pose.x == 0.0
    # Moving exactly to the obstacle face is allowed.
    ok = runtime.registry.invoke("move_forward", {"distance_m": 4.0})
    assert ok.payload["pose"]["x"] == pytest.approx(4.0)
    assert runtime.registry.invoke("lidar_scan", {}).payload[
        "obstacle_distance_m"
    ] == pytest.approx(0.0)


def test_carter_rotate_camera_publishes_radians():
    runtime, _ = runtime_for("carter")
    result = runtime.registry.invoke("rotate_camera", {"angle": 120.0})
    assert result.payload["camera_yaw"] == pytest.approx(120.0)
    assert result.payload["status"] == "Camera rotated by 120.0 degrees."
    message = runtime.graph.topics[CAMERA_TOPIC].buffer[-1]
    with mpmath.workdps(50):
        expected = float(mpmath.radians(120))
    assert message["angle_rad"] == pytest.approx(expected, abs=1e-12)


def test_carter_camera_yaw_wraps():
    runtime, _ = runtime_for("carter")
    for _ in range(3):
        runtime.registry.invoke("rotate_camera", {"angle": 150.0})
    assert runtime.state.camera_yaw == pytest.approx(90.0)


def test_carter_snapshots_record_yaw_and_tick():
    runtime, _ = runtime_for("carter")
    runtime.registry.invoke("rotate_camera", {"angle": 90.0})
    shot = runtime.registry.invoke("capture_snapshot", {}).payload
    assert shot["yaw"] == pytest.approx(90.0)
    assert runtime.state.snapshots == [(90.0, shot["tick"])]


@pytest.mark.parametrize(
    "fov,count",
    [(90.0, 4), (120.0, 3), (100.0, 4), (360.0, 1), (59.9, 7)],
)
def test_panorama_plan_count(fov, count):
    plan = panorama_plan(fov)
    assert len(plan) == 2 * count
    rotations = [args["angle"] for name, args in plan if name == "rotate_camera"]
    assert all(a == pytest.approx(360.0 / count) for a in rotations)
    assert sum(rotations) == pytest.approx(360.0)


def test_panorama_plan_rejects_bad_fov():
    with pytest.raises(ValueError):
        panorama_plan(0)
    with pytest.raises(ValueError):
        panorama_plan(361)


def test_panorama_execution_covers_circle_within_fov():
    runtime, _ = runtime_for("carter")
    fov = runtime.state.fov_deg
    for name, args in panorama_plan(fov):
        runtime.registry.invoke(name, args)
    yaws = sorted(yaw for yaw, _ in runtime.state.snapshots)
    assert len(yaws) == math.ceil(360.0 / fov)
    gaps = [b - a for a, b in zip(yaws, yaws[1:])]
    gaps.append(360.0 - yaws[-1] + yaws[0])
    assert all(g <= fov + 1e-9 for g in gaps)


def test_carter_estop_mid_move_partial_progress():
    runtime, safety = runtime_for("carter")
    runtime.state.step_delay_s = 0.01
    slot = {}

    def mover():
        slot["obs"] = runtime.registry.invoke("move_forward", {"distance_m": 2.0})

    thread = threading.Thread(target=mover)
    thread.start()
    time.sleep(0.035)
    safety.estop(runtime.graph.advance)
    thread.join()
    assert isinstance(slot["obs"], ToolError) and slot["obs"].kind == "cancelled"
    assert 0.0 < runtime.state.pose.x < 2.0
    assert runtime.state.forward_progress_m == pytest.approx(runtime.state.pose.x)
