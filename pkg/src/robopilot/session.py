"""Sessions: one conversation bound to one robot scenario.

A session serializes turns, routes safety controls (confirm / e-stop /
override) into the engine, keeps operability counters, and appends every
event to an append-only JSONL transcript.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .agent import (
    ActionEvent,
    ConfirmationRequired,
    FinalEvent,
    ObservationEvent,
    ReactEngine,
    ReasoningEvent,
    SafetyState,
    TurnEvent,
)
from .errors import NoPendingConfirmation, SessionBusy, UnknownSession
from .memory import AgentConfig, Message, Scratchpad
from .scenarios import ScenarioDef, ScenarioRuntime, build_scenario
from .tools import Observation, ToolError, ToolParam, ToolSpec


@dataclass
class SessionMetrics:
    interventions: int = 0
    tasks_completed: int = 0
    incidents: int = 0
    turns: int = 0

    def as_dict(self) -> dict:
        return {
            "interventions": self.interventions,
            "tasks_completed": self.tasks_completed,
            "incidents": self.incidents,
            "turns": self.turns,
        }


class Session:
    def __init__(
        self,
        session_id: str,
        scenario: str | ScenarioDef,
        backend,
        config: AgentConfig | None = None,
        log_dir: str | Path | None = None,
        constant_overrides: dict[str, float] | None = None,
        extra_tools=(),
    ):
        self.id = session_id
        self.config = config or AgentConfig()
        self.safety = SafetyState()
        self.runtime: ScenarioRuntime = build_scenario(
            scenario, self.safety, log_dir=log_dir,
            constant_overrides=constant_overrides,
        )
        self.history: list[Message] = []
        self.scratchpad = Scratchpad(budget=self.config.scratchpad_budget)
        self._register_scratchpad_tool()
        for spec, impl in extra_tools:
            self.runtime.registry.register(spec, impl)
        self.runtime.registry.seal()
        self.engine = ReactEngine(
            registry=self.runtime.registry,
            backend=backend,
            config=self.config,
            safety=self.safety,
            robot_prompts=self.runtime.robot_prompts,
            scratchpad=self.scratchpad,
            history=self.history,
            tick_source=self.runtime.graph.advance,
        )
        self.metrics = SessionMetrics()
        self.transcript: list[dict] = []
        self._turn_gen = None
        self._busy = False
        self._lock = threading.Lock()
        # Set by the gateway while a turn is being streamed over HTTP.
        self.stream_queue: "queue.Queue | None" = None
        self._record("created", {"scenario": self.runtime.definition.name})

    # --- turn driving ---------------------------------------------------

    def post_message(
        self,
        text: str,
        language: str | None = None,
        stream_queue: "queue.Queue | None" = None,
    ) -> list[TurnEvent]:
        """Run a turn up to its final answer or a pending confirmation."""
        with self._lock:
            if self._busy:
                raise SessionBusy(f"session {self.id} already has an active turn")
            self._busy = True
            if stream_queue is not None:
                self.stream_queue = stream_queue
        self._record("user", {"text": text, "language": language})
        gen = self.engine.turn(text, language)
        return self._drive(gen, first=True)

    def confirm(self, decision: str) -> list[TurnEvent]:
        """Answer the pending confirmation and resume the turn."""
        if decision not in ("approve", "deny"):
            raise ValueError("decision must be 'approve' or 'deny'")
        gen = self._turn_gen
        if gen is None:
            raise NoPendingConfirmation("no action is awaiting confirmation")
        self._turn_gen = None
        self.metrics.interventions += 1
        if decision == "deny":
            self.metrics.incidents += 1
        self._record("safety", {"event": "confirmation", "decision": decision})
        return self._drive(gen, send_value=decision)

    @property
    def awaiting_confirmation(self) -> bool:
        return self._turn_gen is not None

    def _drive(self, gen, send_value: str | None = None, first: bool = False) -> list[TurnEvent]:
        events: list[TurnEvent] = []
        try:
            event = next(gen) if first else gen.send(send_value)
            while True:
                events.append(event)
                self._record_event(event)
                self._count_incident(event)
                self._emit(event)
                if isinstance(event, ConfirmationRequired):
                    self._turn_gen = gen
                    return events
                if isinstance(event, FinalEvent):
                    self._finish_turn(event, events)
                    return events
                event = next(gen)
        except StopIteration:
            self._end_stream()
            with self._lock:
                self._busy = False
            return events
        except Exception:
            self._end_stream()
            with self._lock:
                self._busy = False
            raise

    def _count_incident(self, event: TurnEvent) -> None:
        if isinstance(event, ObservationEvent) and isinstance(
            event.observation, ToolError
        ):
            # A denial is counted when the operator answers the
            # confirmation; don't count its observation a second time.
            if event.observation.kind != "denied":
                self.metrics.incidents += 1

    def _finish_turn(self, final: FinalEvent, events: list[TurnEvent]) -> None:
        self.metrics.turns += 1
        if final.reason == "answer":
            self.metrics.tasks_completed += 1
        self._end_stream()
        with self._lock:
            self._busy = False

    # --- safety controls ------------------------------------------------

    def estop(self) -> int:
        tick = self.safety.estop(self.runtime.graph.advance)
        self.metrics.interventions += 1
        self._record("safety", {"event": "estop", "ack_tick": tick})
        return tick

    def estop_reset(self) -> None:
        self.safety.reset()
        self._record("safety", {"event": "estop_reset"})

    def override(self, tool: str, args: dict | None = None) -> Observation:
        """Execute an operator command directly, bypassing the model."""
        self.metrics.interventions += 1
        if self.safety.is_estopped:
            obs: Observation = ToolError("e_stopped", "override refused: e-stopped")
        else:
            spec = self.runtime.registry.spec(tool)
            if spec is None:
                obs = ToolError("unknown_tool", f"unknown tool: {tool}")
            elif spec.direction != "uplink":
                obs = ToolError(
                    "arg_validation", f"override targets must be uplink tools: {tool}"
                )
            else:
                obs = self.runtime.registry.invoke(tool, args or {})
        if isinstance(obs, ToolError):
            self.metrics.incidents += 1
        self._record(
            "override",
            {"origin": "human", "tool": tool, "args": args or {},
             "observation": obs.rendered_text},
        )
        return obs

    # --- transcript -----------------------------------------------------

    def _record(self, kind: str, body: dict) -> None:
        self.transcript.append(
            {"tick": self.runtime.graph.tick(), "kind": kind, "body": body}
        )

    def _record_event(self, event: TurnEvent) -> None:
        if isinstance(event, ReasoningEvent):
            self._record("step", {"iteration": event.iteration, "reasoning": event.text})
        elif isinstance(event, ActionEvent):
            self._record(
                "tool",
                {"phase": "action", "iteration": event.iteration,
                 "id": event.call.id, "tool": event.call.name, "args": event.call.args},
            )
        elif isinstance(event, ObservationEvent):
            self._record(
                "tool",
                {"phase": "observation", "iteration": event.iteration,
                 "id": event.call.id, "content": event.observation.rendered_text},
            )
        elif isinstance(event, ConfirmationRequired):
            self._record(
                "safety",
                {"event": "confirmation_required", "id": event.call.id,
                 "tool": event.call.name, "args": event.call.args},
            )
        elif isinstance(event, FinalEvent):
            self._record("assistant", {"text": event.text, "reason": event.reason})

    def export_transcript(self) -> str:
        return "".join(
            json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n"
            for rec in self.transcript
        )

    def metrics_snapshot(self) -> dict:
        return self.metrics.as_dict()

    # --- streaming ------------------------------------------------------

    def _emit(self, event: TurnEvent) -> None:
        q = self.stream_queue
        if q is not None:
            q.put(event)

    def _end_stream(self) -> None:
        q = self.stream_queue
        if q is not None:
            q.put(None)
            self.stream_queue = None

    # --- setup ----------------------------------------------------------

    def _register_scratchpad_tool(self) -> None:
        def set_scratchpad(text) -> dict:
            self.scratchpad.set(text, self.runtime.graph.tick())
            return {"scratchpad": self.scratchpad.text}

        self.runtime.registry.register(
            ToolSpec(
                name="set_scratchpad",
                description="Store or replace the agent's working notes for multi-step plans.",
                params=(
                    ToolParam("text", "string", required=True, description="The notes to keep."),
                ),
            ),
            set_scratchpad,
        )


class SessionService:
    """Holds live sessions; ids are stable and unique per instance."""

    def __init__(self, backend_factory, log_dir: str | Path | None = None):
        self._backend_factory = backend_factory
        self._log_dir = log_dir
        self._sessions: dict[str, Session] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def create_session(
        self,
        scenario: str | ScenarioDef,
        config_overrides: dict | None = None,
    ) -> Session:
        config = AgentConfig(**(config_overrides or {}))
        with self._lock:
            self._counter += 1
            session_id = f"s{self._counter}"
        session = Session(
            session_id,
            scenario,
            backend=self._backend_factory(),
            config=config,
            log_dir=self._log_dir,
        )
        self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session: {session_id}")
        return session


def event_to_wire(event: TurnEvent) -> dict:
    """Map a turn event to its line-delimited stream representation."""
    if isinstance(event, ReasoningEvent):
        return {"kind": "reasoning", "iteration": event.iteration, "text": event.text}
    if isinstance(event, ActionEvent):
        return {
            "kind": "action", "iteration": event.iteration,
            "id": event.call.id, "tool": event.call.name, "args": event.call.args,
        }
    if isinstance(event, ObservationEvent):
        return {
            "kind": "observation", "iteration": event.iteration,
            "id": event.call.id, "content": event.observation.rendered_text,
            "error": isinstance(event.observation, ToolError),
        }
    if isinstance(event, ConfirmationRequired):
        return {
            "kind": "confirmation", "id": event.call.id,
            "tool": event.call.name, "args": event.call.args,
        }
    if isinstance(event, FinalEvent):
        return {"kind": "final", "text": event.text, "reason": event.reason}
    raise TypeError(f"unknown event type: {type(event)!r}")
