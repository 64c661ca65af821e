"""Robot state models and tool bindings for the three demo robots.

Motion is kinematic teleportation under the session's safety gate: every
state mutation goes through SafetyState.commit(), so an e-stop can never
be outrun by an in-flight actuation. Long motions commit in checkpoints
and freeze wherever the cancellation lands.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field

from ..agent import SafetyState
from ..graphsim import Graph, NodeHandle
from ..tools import ToolFailure, ToolParam, ToolRegistry, ToolSpec, UPLINK

MOVE_CHECKPOINTS = 10


def normalize_half_open(theta: float) -> float:
    """Normalize an angle into (-180, 180]."""
    theta = theta % 360.0
    if theta > 180.0:
        theta -= 360.0
    if theta == -180.0:
        theta = 180.0
    return theta


@dataclass
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0  # degrees in (-180, 180]

    def advanced(self, distance: float) -> "Pose2D":
        rad = math.radians(self.theta)
        return Pose2D(
            self.x + distance * math.cos(rad),
            self.y + distance * math.sin(rad),
            self.theta,
        )

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta}


@dataclass
class SpotState:
    standing: bool = False
    pose: Pose2D = field(default_factory=Pose2D)
    camera_feed_displayed: bool = False
    # Test hook: per-checkpoint delay so e-stop races are reproducible.
    step_delay_s: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class EelsState:
    pose: Pose2D = field(default_factory=Pose2D)
    head_raised: bool = False
    heading_error_deg: float = 0.3
    head_raise_calls: int = 0
    step_delay_s: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class CarterState:
    pose: Pose2D = field(default_factory=Pose2D)
    camera_yaw: float = 0.0  # degrees in [0, 360)
    fov_deg: float = 90.0
    obstacle_distance_m: float = 4.0
    forward_progress_m: float = 0.0
    snapshots: list[tuple[float, int]] = field(default_factory=list)
    step_delay_s: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


def _checkpointed_move(
    safety: SafetyState,
    graph: Graph,
    apply_step,
    steps: int,
    delay_s: float,
) -> tuple[int, int | None]:
    """Commit a motion in `steps` increments; stop at the e-stop.

    Returns (committed steps, last effect tick)."""
    done = 0
    last_tick: int | None = None
    for _ in range(steps):
        if delay_s:
            time.sleep(delay_s)
        tick = safety.commit(graph.advance, apply_step)
        if tick is None:
            break
        last_tick = tick
        done += 1
    return done, last_tick


# --- Spot ---------------------------------------------------------------

JOY_TOPIC = "/spot/joy"
BUTTON_B = "B"


def seed_spot_graph(graph: Graph, state: SpotState) -> NodeHandle:
    def on_joy(payload: dict) -> None:
        if payload.get("buttons", {}).get(BUTTON_B) == 1:
            state.standing = True

    graph.register_node("/spot_driver", subscriptions={JOY_TOPIC: on_joy})
    teleop = graph.register_node("/teleop_bridge", publications=[(JOY_TOPIC, "sensor_msgs/Joy")])
    return teleop


def register_spot_tools(
    registry: ToolRegistry,
    graph: Graph,
    state: SpotState,
    safety: SafetyState,
    descriptions: dict[str, str],
) -> None:
    teleop = seed_spot_graph(graph, state)

    def stand_up() -> dict:
        def effect():
            teleop.publish(JOY_TOPIC, {"buttons": {BUTTON_B: 1}})

        if safety.commit(graph.advance, effect) is None:
            raise ToolFailure("e_stopped", "stand_up cancelled: e-stopped")
        return {"status": "Spot is now standing up.", "standing": state.standing}

    registry.register(
        ToolSpec(
            name="stand_up",
            description="Command the robot to stand.",
            direction=UPLINK,
        ),
        stand_up,
    )

    def move(distance_m, turn_deg) -> dict:
        if not state.standing:
            raise ToolFailure("not_standing", "cannot move: the robot is not standing")
        step = distance_m / MOVE_CHECKPOINTS
        turn_step = turn_deg / MOVE_CHECKPOINTS

        def apply_step():
            with state.lock:
                state.pose = state.pose.advanced(step)

        done, _ = _checkpointed_move(
            safety, graph, apply_step, MOVE_CHECKPOINTS, state.step_delay_s
        )
        if done == MOVE_CHECKPOINTS:
            def apply_turn():
                with state.lock:
                    state.pose.theta = normalize_half_open(state.pose.theta + turn_deg)

            turned = safety.commit(graph.advance, apply_turn) is not None
        else:
            turned = False
        if done < MOVE_CHECKPOINTS or not turned:
            raise ToolFailure(
                "cancelled",
                f"move cancelled by e-stop after {done}/{MOVE_CHECKPOINTS} checkpoints",
            )
        return {
            "status": (
                f"I have moved forward {distance_m} meter(s) and turned "
                f"{turn_deg} degrees."
            ),
            "pose": state.pose.as_dict(),
        }

    registry.register(
        ToolSpec(
            name="move",
            description="Move forward a distance in meters, then turn by an angle in degrees (left positive).",
            params=(
                ToolParam("distance_m", "number", required=True, description="Distance to move forward, meters."),
                ToolParam("turn_deg", "number", required=True, description="Turn angle in degrees after moving."),
            ),
            direction=UPLINK,
            gated=True,
        ),
        move,
    )

    _register_describe_camera(registry, descriptions, show_feed_state=state)


# --- EELS ---------------------------------------------------------------

HEAD_RAISE_SERVICE = "/head_raise"


def seed_eels_graph(graph: Graph, state: EelsState) -> None:
    def handle_head_raise(request: dict) -> dict:
        state.head_raise_calls += 1
        state.head_raised = True
        return {"ok": True}

    graph.register_node(
        "/head_driver", services=[(HEAD_RAISE_SERVICE, {}, handle_head_raise)]
    )


def register_eels_tools(
    registry: ToolRegistry,
    graph: Graph,
    state: EelsState,
    safety: SafetyState,
    descriptions: dict[str, str],
) -> None:
    seed_eels_graph(graph, state)

    def move_to_waypoint(x, y, theta) -> dict:
        achieved_theta = normalize_half_open(theta + state.heading_error_deg)

        def effect():
            with state.lock:
                state.pose = Pose2D(x, y, achieved_theta)

        if safety.commit(graph.advance, effect) is None:
            raise ToolFailure("cancelled", "waypoint move cancelled by e-stop")
        error = state.heading_error_deg
        status = (
            f"I have moved to the waypoint. However, it appears my heading is "
            f"off by approximately {error} degrees. Would you like me to try again?"
        )
        return {
            "status": status,
            "requested": {"x": x, "y": y, "theta": theta},
            "achieved": state.pose.as_dict(),
            "heading_error_deg": error,
        }

    registry.register(
        ToolSpec(
            name="move_to_waypoint",
            description="Move to a waypoint given as (x, y, theta) in meters and degrees.",
            params=(
                ToolParam("x", "number", required=True, description="Target x, meters."),
                ToolParam("y", "number", required=True, description="Target y, meters."),
                ToolParam("theta", "number", required=True, description="Target heading, degrees."),
            ),
            direction=UPLINK,
            gated=True,
        ),
        move_to_waypoint,
    )

    def raise_head() -> dict:
        if state.head_raised:
            # Early return: the service is not called again.
            return {"raised": True, "service_called": False}

        def effect():
            graph.call_service(HEAD_RAISE_SERVICE, {})

        if safety.commit(graph.advance, effect) is None:
            raise ToolFailure("e_stopped", "raise_head cancelled: e-stopped")
        return {"raised": state.head_raised, "service_called": True}

    registry.register(
        ToolSpec(
            name="raise_head",
            description="Raise the head module.",
            direction=UPLINK,
        ),
        raise_head,
    )

    _register_describe_camera(registry, descriptions)


# --- Carter -------------------------------------------------------------

CAMERA_TOPIC = "/carter/camera_rotate"


def seed_carter_graph(graph: Graph, state: CarterState) -> NodeHandle:
    return graph.register_node(
        "/carter_base", publications=[(CAMERA_TOPIC, "carter_msgs/CameraRotate")]
    )


def register_carter_tools(
    registry: ToolRegistry,
    graph: Graph,
    state: CarterState,
    safety: SafetyState,
    descriptions: dict[str, str],
) -> None:
    base = seed_carter_graph(graph, state)

    def lidar_scan() -> dict:
        with state.lock:
            remaining = max(0.0, state.obstacle_distance_m - state.forward_progress_m)
        return {"obstacle_distance_m": remaining}

    registry.register(
        ToolSpec(
            name="lidar_scan",
            description="Scan ahead and report the distance to the nearest obstacle in meters.",
        ),
        lidar_scan,
    )

    def move_forward(distance_m) -> dict:
        with state.lock:
            clearance = max(0.0, state.obstacle_distance_m - state.forward_progress_m)
        if distance_m > clearance + 1e-12:
            raise ToolFailure(
                "obstacle_violation",
                f"cannot move {distance_m} m: obstacle {clearance} m ahead",
            )
        step = distance_m / MOVE_CHECKPOINTS

        def apply_step():
            with state.lock:
                state.pose = state.pose.advanced(step)
                state.forward_progress_m += step

        done, _ = _checkpointed_move(
            safety, graph, apply_step, MOVE_CHECKPOINTS, state.step_delay_s
        )
        if done < MOVE_CHECKPOINTS:
            raise ToolFailure(
                "cancelled",
                f"move cancelled by e-stop after {done}/{MOVE_CHECKPOINTS} checkpoints",
            )
        return {
            "status": f"I have moved forward by {distance_m} meters.",
            "pose": state.pose.as_dict(),
        }

    registry.register(
        ToolSpec(
            name="move_forward",
            description="Move forward by a distance in meters; refuses to enter an obstacle.",
            params=(
                ToolParam("distance_m", "number", required=True, description="Distance, meters."),
            ),
            direction=UPLINK,
            gated=True,
        ),
        move_forward,
    )

    def rotate_camera(angle) -> dict:
        def effect():
            base.publish(CAMERA_TOPIC, {"angle_rad": math.radians(angle)})
            with state.lock:
                state.camera_yaw = (state.camera_yaw + angle) % 360.0

        if safety.commit(graph.advance, effect) is None:
            raise ToolFailure("e_stopped", "rotate_camera cancelled: e-stopped")
        return {
            "status": f"Camera rotated by {angle} degrees.",
            "camera_yaw": state.camera_yaw,
        }

    registry.register(
        ToolSpec(
            name="rotate_camera",
            description="Rotate the on-board camera sensor by a specified angle in degrees.",
            params=(ToolParam("angle", "number", required=True, description="Angle in degrees."),),
            direction=UPLINK,
        ),
        rotate_camera,
    )

    def capture_snapshot() -> dict:
        with state.lock:
            record = (state.camera_yaw, graph.advance())
            state.snapshots.append(record)
        return {"yaw": record[0], "tick": record[1]}

    registry.register(
        ToolSpec(
            name="capture_snapshot",
            description="Capture a camera snapshot at the current yaw.",
        ),
        capture_snapshot,
    )

    _register_describe_camera(registry, descriptions)


def panorama_plan(fov_deg: float) -> list[tuple[str, dict]]:
    """Rotate/capture pairs covering a full 360-degree panorama.

    ceil(360/fov) snapshots, evenly spaced, so adjacent yaw gaps never
    exceed the field of view."""
    if not 0 < fov_deg <= 360:
        raise ValueError("fov must be in (0, 360]")
    count = math.ceil(360.0 / fov_deg)
    step = 360.0 / count
    plan: list[tuple[str, dict]] = []
    for _ in range(count):
        plan.append(("rotate_camera", {"angle": step}))
        plan.append(("capture_snapshot", {}))
    return plan


# --- shared -------------------------------------------------------------


def _register_describe_camera(
    registry: ToolRegistry,
    descriptions: dict[str, str],
    show_feed_state: SpotState | None = None,
) -> None:
    def describe_camera(mode="describe") -> dict:
        if mode == "show_feed" and show_feed_state is not None:
            show_feed_state.camera_feed_displayed = True
            return {"status": "The camera feed is live.", "feed_displayed": True}
        return {"description": descriptions.get("camera", "")}

    registry.register(
        ToolSpec(
            name="describe_camera",
            description="Describe the current camera view; mode 'show_feed' displays the live feed.",
            params=(ToolParam("mode", "string", description="'describe' (default) or 'show_feed'."),),
        ),
        describe_camera,
    )
