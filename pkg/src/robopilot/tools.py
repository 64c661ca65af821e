"""Tool abstraction: declarative specs, registry, blacklists, invocation.

Tools are the agent's entire action space. Every result or failure crossing
the invoke() boundary is a value (ToolResult / ToolError), never an
exception: failed tools become observations the model can react to.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .errors import DuplicateTool, MissingDescription, RegistrySealed

DOWNLINK = "downlink"
UPLINK = "uplink"

_PARAM_KINDS = ("string", "number", "integer", "boolean", "list", "map")


def canonical_json(payload: Any) -> str:
    """Deterministic serialization: sorted keys, compact, UTF-8 friendly."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class ToolParam:
    name: str
    kind: str = "string"
    required: bool = False
    default: Any = None
    description: str = ""


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    params: tuple[ToolParam, ...] = ()
    direction: str = DOWNLINK
    accepts_blacklist: bool = False
    # Only uplink tools may be gated behind operator confirmation.
    gated: bool = False

    def __post_init__(self):
        if self.gated and self.direction != UPLINK:
            raise ValueError(f"only uplink tools may be gated: {self.name}")

    def ordered_params(self) -> list[ToolParam]:
        required = [p for p in self.params if p.required]
        optional = [p for p in self.params if not p.required]
        return required + optional


@dataclass(frozen=True)
class ToolResult:
    payload: dict

    @property
    def rendered_text(self) -> str:
        return canonical_json(self.payload)


@dataclass(frozen=True)
class ToolError:
    kind: str
    message: str

    @property
    def rendered_text(self) -> str:
        return canonical_json({"error": self.kind, "message": self.message})


Observation = ToolResult | ToolError


@dataclass(frozen=True)
class Blacklist:
    """Exact names plus trailing-`*` prefix globs; case-sensitive."""

    entries: tuple[str, ...] = ()

    @classmethod
    def of(cls, entries: Iterable[str] | None) -> "Blacklist":
        return cls(tuple(entries or ()))

    def matches(self, name: str) -> bool:
        for entry in self.entries:
            if entry.endswith("*"):
                if name.startswith(entry[:-1]):
                    return True
            elif name == entry:
                return True
        return False

    def union(self, other: "Blacklist") -> "Blacklist":
        merged = list(self.entries)
        for entry in other.entries:
            if entry not in merged:
                merged.append(entry)
        return Blacklist(tuple(merged))


class ToolRegistry:
    """Name -> (spec, implementation) registry with a global blacklist.

    Implementations are plain callables taking keyword arguments and
    returning a payload dict (or raising ToolFailure for a clean error).
    Tools whose spec has accepts_blacklist=True receive an effective
    `blacklist` list equal to union(global, per-call list).
    """

    def __init__(self, global_blacklist: Blacklist | None = None):
        self._tools: dict[str, tuple[ToolSpec, Callable[..., dict]]] = {}
        self.global_blacklist = global_blacklist or Blacklist()
        self._sealed = False

    def register(self, spec: ToolSpec, impl: Callable[..., dict]) -> None:
        if self._sealed:
            raise RegistrySealed("registry is sealed; session already started")
        if not spec.description.strip():
            raise MissingDescription(f"tool {spec.name!r} has no description")
        if spec.name in self._tools:
            raise DuplicateTool(f"tool already registered: {spec.name}")
        self._tools[spec.name] = (spec, impl)

    def seal(self) -> None:
        self._sealed = True

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def spec(self, name: str) -> ToolSpec | None:
        entry = self._tools.get(name)
        return entry[0] if entry else None

    def names(self) -> list[str]:
        return list(self._tools)

    # --- catalog --------------------------------------------------------

    def catalog_entries(self) -> list[dict]:
        """Model-facing schema entries, in registration order."""
        entries = []
        for spec, _ in self._tools.values():
            params = []
            for p in spec.ordered_params():
                params.append(
                    {
                        "name": p.name,
                        "type": p.kind,
                        "required": p.required,
                        "description": p.description,
                    }
                )
            entries.append(
                {
                    "name": spec.name,
                    "description": spec.description,
                    "direction": spec.direction,
                    "parameters": params,
                }
            )
        return entries

    def render_catalog(self) -> str:
        return canonical_json(self.catalog_entries())

    # --- invocation -----------------------------------------------------

    def invoke(self, name: str, args: dict | None = None) -> Observation:
        args = dict(args or {})
        entry = self._tools.get(name)
        if entry is None:
            return ToolError("unknown_tool", f"unknown tool: {name}")
        spec, impl = entry
        violations: list[str] = []
        known = {p.name: p for p in spec.params}
        for key in args:
            if key not in known:
                violations.append(f"unknown argument: {key}")
        coerced: dict[str, Any] = {}
        for param in spec.params:
            if param.name in args:
                ok, value = _coerce(param.kind, args[param.name])
                if not ok:
                    violations.append(
                        f"argument {param.name} expects {param.kind}"
                    )
                else:
                    coerced[param.name] = value
            elif param.required:
                violations.append(f"missing required argument: {param.name}")
            elif param.default is not None:
                coerced[param.name] = param.default
        if violations:
            return ToolError("arg_validation", "; ".join(violations))
        if spec.accepts_blacklist:
            call_list = Blacklist.of(coerced.get("blacklist"))
            coerced["blacklist"] = list(self.global_blacklist.union(call_list).entries)
        try:
            payload = impl(**coerced)
        except ToolFailure as exc:
            return ToolError(exc.kind, str(exc))
        except Exception as exc:  # tool bugs become observations too
            return ToolError("tool_error", f"{type(exc).__name__}: {exc}")
        return ToolResult(payload)


class ToolFailure(Exception):
    """Raised by tool implementations to report a clean, typed failure."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _coerce(kind: str, value: Any) -> tuple[bool, Any]:
    """Validate a value against a param kind, coercing string->number only."""
    if kind == "string":
        return isinstance(value, str), value
    if kind == "boolean":
        return isinstance(value, bool), value
    if kind == "integer":
        if isinstance(value, bool):
            return False, value
        if isinstance(value, int):
            return True, value
        if isinstance(value, str):
            try:
                return True, int(value)
            except ValueError:
                return False, value
        return False, value
    if kind == "number":
        if isinstance(value, bool):
            return False, value
        if isinstance(value, (int, float)):
            return True, value
        if isinstance(value, str):
            try:
                number = float(value)
            except ValueError:
                return False, value
            return math.isfinite(number), number
        return False, value
    if kind == "list":
        return isinstance(value, list), value
    if kind == "map":
        return isinstance(value, dict), value
    raise ValueError(f"unknown param kind: {kind}")
