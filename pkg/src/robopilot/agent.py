"""The ReAct engine: parse model output, execute tool batches, gate safety.

A turn is a generator of TurnEvent values. The driver (session layer)
iterates it; when a gated uplink call is reached the generator yields a
ConfirmationRequired event and suspends until the driver sends back an
"approve" or "deny" decision. E-stop may be flipped from any thread and
dominates everything: once the acknowledgement tick is taken, no uplink
effect can land.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Generator, Iterable

from .memory import (
    AgentConfig,
    Message,
    Scratchpad,
    assemble_context,
)
from .tools import UPLINK, Observation, ToolError, ToolRegistry, canonical_json


# --- wire format --------------------------------------------------------


@dataclass(frozen=True)
class ToolCall:
    id: str
    group: int
    name: str
    args: dict


@dataclass(frozen=True)
class ToolCallBatch:
    groups: tuple[tuple[ToolCall, ...], ...]
    reasoning: str = ""

    def calls(self) -> list[ToolCall]:
        return [c for g in self.groups for c in g]


@dataclass(frozen=True)
class FinalAnswer:
    text: str


@dataclass(frozen=True)
class Malformed:
    diagnostic: str


def parse_model_output(raw: str) -> FinalAnswer | ToolCallBatch | Malformed:
    """Classify a raw model response.

    A JSON object with a "tool_calls" key becomes a ToolCallBatch; anything
    that is plain text (including JSON without that key) is a FinalAnswer.
    Broken tool-call payloads become Malformed values, never exceptions.
    """
    text = raw.strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        if '"tool_calls"' in text:
            return Malformed(f"unparseable tool-call payload at position {exc.pos}: {exc.msg}")
        return FinalAnswer(raw)
    if not isinstance(data, dict) or "tool_calls" not in data:
        return FinalAnswer(raw)
    records = data["tool_calls"]
    if not isinstance(records, list) or not records:
        return Malformed("tool_calls must be a non-empty list")
    calls: list[ToolCall] = []
    seen_ids: set[str] = set()
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or not isinstance(rec.get("name"), str):
            return Malformed(f"tool call record {i} lacks a name")
        call_id = rec.get("id", f"c{i + 1}")
        if not isinstance(call_id, str):
            return Malformed(f"tool call record {i} has a non-string id")
        if call_id in seen_ids:
            return Malformed(f"duplicate call id: {call_id}")
        seen_ids.add(call_id)
        group = rec.get("group", 0)
        if not isinstance(group, int) or isinstance(group, bool) or group < 0:
            return Malformed(f"tool call record {i} has a bad group index")
        args = rec.get("args", {})
        if not isinstance(args, dict):
            return Malformed(f"tool call record {i} has non-map args")
        calls.append(ToolCall(call_id, group, rec["name"], args))
    group_indices = sorted({c.group for c in calls})
    groups = tuple(
        tuple(c for c in calls if c.group == g) for g in group_indices
    )
    reasoning = data.get("reasoning", "")
    if not isinstance(reasoning, str):
        reasoning = ""
    return ToolCallBatch(groups=groups, reasoning=reasoning)


def render_observation(call_id: str, obs: Observation) -> str:
    """Observation message content sent back to the model."""
    if isinstance(obs, ToolError):
        return canonical_json({"id": call_id, "error": obs.rendered_text})
    return canonical_json({"id": call_id, "result": obs.payload})


# --- safety -------------------------------------------------------------


class SafetyState:
    """E-stop latch, pending confirmation slot, and the effect-commit gate.

    Uplink tools mutate robot state only through commit(); commit and the
    e-stop share one lock, so an effect either lands before the e-stop
    acknowledgement tick or not at all.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.estopped = False
        self.estop_tick: int | None = None
        self.pending_confirmation: ToolCall | None = None
        self.human_override_active = False
        self.cancel = threading.Event()

    def estop(self, tick_source) -> int:
        """Latch the e-stop; returns the acknowledgement tick."""
        with self._lock:
            self.estopped = True
            self.cancel.set()
            self.estop_tick = tick_source()
            return self.estop_tick

    def reset(self) -> None:
        with self._lock:
            self.estopped = False
            self.estop_tick = None
            self.cancel.clear()

    def commit(self, tick_source, effect) -> int | None:
        """Apply an uplink effect unless e-stopped; returns its tick or None."""
        with self._lock:
            if self.estopped:
                return None
            tick = tick_source()
            effect()
            return tick

    @property
    def is_estopped(self) -> bool:
        with self._lock:
            return self.estopped


ESTOPPED_OBSERVATION = ToolError("e_stopped", "e-stopped; uplink actions are disabled")
DENIED_OBSERVATION = ToolError("denied", "action denied by operator")


# --- turn events --------------------------------------------------------


@dataclass(frozen=True)
class ReasoningEvent:
    iteration: int
    text: str


@dataclass(frozen=True)
class ActionEvent:
    iteration: int
    call: ToolCall


@dataclass(frozen=True)
class ObservationEvent:
    iteration: int
    call: ToolCall
    observation: Observation
    started: float
    finished: float


@dataclass(frozen=True)
class ConfirmationRequired:
    call: ToolCall


@dataclass(frozen=True)
class FinalEvent:
    text: str
    reason: str  # "answer" | "iteration_limit" | "malformed"
    traces: tuple["StepTrace", ...]


TurnEvent = (
    ReasoningEvent
    | ActionEvent
    | ObservationEvent
    | ConfirmationRequired
    | FinalEvent
)


@dataclass
class StepTrace:
    """One reasoning-action-observation iteration."""

    iteration: int
    reasoning_text: str
    actions: list[tuple[str, dict]] = field(default_factory=list)
    observations: list[str] = field(default_factory=list)
    intervals: list[tuple[float, float]] = field(default_factory=list)
    phases: tuple[str, ...] = ("reason", "act", "observe")


ITERATION_LIMIT_ANSWER = (
    "I reached my iteration limit of {n} without resolving the request. "
    "Please simplify or retry."
)
MALFORMED_ANSWER = (
    "I could not produce a well-formed response for this request: {diag}"
)


# --- engine -------------------------------------------------------------


class ReactEngine:
    """Drives the reason-act-observe loop for one session."""

    def __init__(
        self,
        registry: ToolRegistry,
        backend,
        config: AgentConfig,
        safety: SafetyState,
        robot_prompts: Iterable[Message],
        scratchpad: Scratchpad,
        history: list[Message],
        tick_source,
    ):
        self.registry = registry
        self.backend = backend
        self.config = config
        self.safety = safety
        self.robot_prompts = list(robot_prompts)
        self.scratchpad = scratchpad
        self.history = history
        self.tick_source = tick_source

    def turn(
        self, user_text: str, language: str | None = None
    ) -> Generator[TurnEvent, str | None, None]:
        self.history.append(Message("user", user_text, self.tick_source()))
        prompts = list(self.robot_prompts)
        if language:
            prompts.append(Message("system", f"Respond in {language}."))
        catalog = self.registry.render_catalog()
        traces: list[StepTrace] = []
        malformed_retry_used = False
        iteration = 0
        while iteration < self.config.max_iterations:
            doc = assemble_context(
                prompts, catalog, self.scratchpad, self.history,
                self.config.context_budget,
            )
            from .models import ModelRequest  # late import to avoid a cycle

            response = self.backend.complete(ModelRequest(doc.messages(), catalog))
            parsed = parse_model_output(response.content)
            if isinstance(parsed, Malformed):
                if not malformed_retry_used:
                    malformed_retry_used = True
                    self.history.append(
                        Message(
                            "tool",
                            canonical_json(
                                {"error": "malformed_output", "message": parsed.diagnostic}
                            ),
                            self.tick_source(),
                        )
                    )
                    continue
                final = MALFORMED_ANSWER.format(diag=parsed.diagnostic)
                self.history.append(Message("assistant", final, self.tick_source()))
                yield FinalEvent(final, "malformed", tuple(traces))
                return
            if isinstance(parsed, FinalAnswer):
                self.history.append(
                    Message("assistant", parsed.text, self.tick_source())
                )
                yield FinalEvent(parsed.text, "answer", tuple(traces))
                return
            iteration += 1
            batch = parsed
            self.history.append(
                Message("assistant", response.content, self.tick_source())
            )
            yield ReasoningEvent(iteration, batch.reasoning)
            trace = StepTrace(iteration=iteration, reasoning_text=batch.reasoning)
            for group in batch.groups:
                for call in group:
                    yield ActionEvent(iteration, call)
                decisions: dict[str, str] = {}
                for call in group:
                    if self._needs_confirmation(call):
                        self.safety.pending_confirmation = call
                        decision = yield ConfirmationRequired(call)
                        self.safety.pending_confirmation = None
                        decisions[call.id] = decision or "deny"
                results = self._run_group(group, decisions)
                for call in group:
                    obs, started, finished = results[call.id]
                    trace.actions.append((call.name, call.args))
                    trace.observations.append(obs.rendered_text)
                    trace.intervals.append((started, finished))
                    self.history.append(
                        Message(
                            "tool",
                            render_observation(call.id, obs),
                            self.tick_source(),
                        )
                    )
                    yield ObservationEvent(iteration, call, obs, started, finished)
            traces.append(trace)
        final = ITERATION_LIMIT_ANSWER.format(n=self.config.max_iterations)
        self.history.append(Message("assistant", final, self.tick_source()))
        yield FinalEvent(final, "iteration_limit", tuple(traces))

    # --- internals ------------------------------------------------------

    def _needs_confirmation(self, call: ToolCall) -> bool:
        spec = self.registry.spec(call.name)
        if spec is None or spec.direction != UPLINK or not spec.gated:
            return False
        if not self.config.require_confirmation_for_uplink:
            return False
        # No point asking: the call will be rejected by the e-stop anyway.
        return not self.safety.is_estopped

    def _execute_call(
        self, call: ToolCall, decisions: dict[str, str]
    ) -> tuple[Observation, float, float]:
        started = time.perf_counter()
        spec = self.registry.spec(call.name)
        if spec is not None and spec.direction == UPLINK and self.safety.is_estopped:
            obs: Observation = ESTOPPED_OBSERVATION
        elif decisions.get(call.id) == "deny":
            obs = DENIED_OBSERVATION
        else:
            obs = self.registry.invoke(call.name, call.args)
        return obs, started, time.perf_counter()

    def _run_group(
        self, group: tuple[ToolCall, ...], decisions: dict[str, str]
    ) -> dict[str, tuple[Observation, float, float]]:
        """Run one parallel group; all calls complete before returning."""
        if len(group) == 1:
            call = group[0]
            return {call.id: self._execute_call(call, decisions)}
        with ThreadPoolExecutor(max_workers=len(group)) as pool:
            futures = {
                call.id: pool.submit(self._execute_call, call, decisions)
                for call in group
            }
            return {cid: fut.result() for cid, fut in futures.items()}
