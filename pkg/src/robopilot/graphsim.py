"""In-process pub/sub middleware simulator.

A single `Graph` holds nodes, topics, services, parameters, and logs, and
offers full introspection. Everything is synchronous and driven by a logical
tick clock, so identical operation sequences produce byte-identical snapshots
and log files.
"""

from __future__ import annotations

import re
import threading
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from .errors import (
    BadLevel,
    DuplicateNode,
    InvalidName,
    NotAPublisher,
    ReentrancyError,
    SchemaViolation,
    UnknownKey,
    UnknownNode,
    UnknownService,
    UnknownTopic,
)

LOG_LEVELS = ("DEBUG", "INFO", "WARN", "ERROR", "FATAL")

_NAME_RE = re.compile(r"^/[A-Za-z0-9_]+(?:/[A-Za-z0-9_]+)*$")

# Semantic types accepted in service request schemas.
_SEMANTIC_TYPES: dict[str, tuple[type, ...]] = {
    "string": (str,),
    "number": (int, float),
    "integer": (int,),
    "boolean": (bool,),
    "list": (list, tuple),
    "map": (dict,),
}


def valid_name(name: str) -> bool:
    return bool(_NAME_RE.match(name))


@dataclass
class NodeRecord:
    name: str
    publications: set[str] = field(default_factory=set)
    subscriptions: set[str] = field(default_factory=set)
    provided_services: set[str] = field(default_factory=set)


@dataclass
class TopicRecord:
    name: str
    message_type: str
    buffer: deque
    publish_count: int = 0
    # (node name, callback) pairs in subscription order
    subscribers: list[tuple[str, Callable[[dict], None] | None]] = field(default_factory=list)


@dataclass
class ServiceRecord:
    name: str
    request_schema: dict[str, str]
    provider: str
    handler: Callable[[dict], dict]


@dataclass(frozen=True)
class LogEntry:
    tick: int
    level: str
    node: str
    text: str


@dataclass(frozen=True)
class GraphSnapshot:
    """Immutable value copy of the graph's registered entities."""

    nodes: tuple[str, ...]
    topics: tuple[tuple[str, str], ...]
    services: tuple[str, ...]
    param_keys: tuple[str, ...]


class NodeHandle:
    """Convenience wrapper binding a node name to its graph."""

    def __init__(self, graph: "Graph", name: str):
        self.graph = graph
        self.name = name

    def publish(self, topic: str, payload: dict) -> int:
        return self.graph.publish(self.name, topic, payload)

    def log(self, level: str, text: str) -> int:
        return self.graph.log(self.name, level, text)


class Graph:
    """Registry of nodes/topics/services/params/logs with a logical clock.

    All mutation is serialized by an internal re-entrant lock; subscriber
    callbacks run synchronously inside publish(), in subscription order.
    Callbacks must not publish back to the topic being delivered.
    """

    def __init__(self, buffer_depth: int = 10, log_path: str | Path | None = None):
        self.buffer_depth = buffer_depth
        self.nodes: dict[str, NodeRecord] = {}
        self.topics: dict[str, TopicRecord] = {}
        self.services: dict[str, ServiceRecord] = {}
        self.params: dict[str, Any] = {}
        self.logs: list[LogEntry] = []
        self.clock = 0
        self._lock = threading.RLock()
        self._publishing: set[str] = set()
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_path.write_text("", encoding="utf-8")

    # --- registration ---------------------------------------------------

    def register_node(
        self,
        name: str,
        publications: Iterable[tuple[str, str]] = (),
        subscriptions: Mapping[str, Callable[[dict], None] | None] | Iterable[str] = (),
        services: Iterable[tuple[str, dict[str, str], Callable[[dict], dict]]] = (),
    ) -> NodeHandle:
        with self._lock:
            if not valid_name(name):
                raise InvalidName(f"invalid node name: {name!r}")
            if name in self.nodes:
                raise DuplicateNode(f"node already registered: {name}")
            record = NodeRecord(name=name)
            for topic, message_type in publications:
                self._ensure_topic(topic, message_type)
                record.publications.add(topic)
            if isinstance(subscriptions, Mapping):
                sub_items = list(subscriptions.items())
            else:
                sub_items = [(t, None) for t in subscriptions]
            for topic, callback in sub_items:
                self._ensure_topic(topic, "unknown")
                record.subscriptions.add(topic)
                self.topics[topic].subscribers.append((name, callback))
            for sname, schema, handler in services:
                if sname in self.services:
                    raise DuplicateNode(f"service already provided: {sname}")
                if not valid_name(sname):
                    raise InvalidName(f"invalid service name: {sname!r}")
                self.services[sname] = ServiceRecord(sname, dict(schema), name, handler)
                record.provided_services.add(sname)
            self.nodes[name] = record
            return NodeHandle(self, name)

    def _ensure_topic(self, topic: str, message_type: str) -> None:
        if not valid_name(topic):
            raise InvalidName(f"invalid topic name: {topic!r}")
        existing = self.topics.get(topic)
        if existing is None:
            self.topics[topic] = TopicRecord(
                topic, message_type, deque(maxlen=self.buffer_depth)
            )
        elif existing.message_type == "unknown" and message_type != "unknown":
            existing.message_type = message_type

    # --- pub/sub --------------------------------------------------------

    def publish(self, node: str, topic: str, payload: dict) -> int:
        with self._lock:
            record = self.nodes.get(node)
            if record is None:
                raise UnknownNode(f"unknown node: {node}")
            if topic not in self.topics:
                raise UnknownTopic(f"unknown topic: {topic}")
            if topic not in record.publications:
                raise NotAPublisher(f"{node} is not a publisher of {topic}")
            if topic in self._publishing:
                raise ReentrancyError(f"re-entrant publish on {topic}")
            trec = self.topics[topic]
            trec.buffer.append(payload)
            trec.publish_count += 1
            self.clock += 1
            tick = self.clock
            self._publishing.add(topic)
            try:
                for _, callback in trec.subscribers:
                    if callback is not None:
                        callback(payload)
            finally:
                self._publishing.discard(topic)
            return tick

    # --- services -------------------------------------------------------

    def call_service(self, service: str, request: dict) -> dict:
        with self._lock:
            record = self.services.get(service)
            if record is None:
                raise UnknownService(f"unknown service: {service}")
            for fname, semantic in record.request_schema.items():
                if fname not in request:
                    raise SchemaViolation(f"missing field: {fname}")
                expected = _SEMANTIC_TYPES[semantic]
                value = request[fname]
                if isinstance(value, bool) and semantic in ("number", "integer"):
                    raise SchemaViolation(f"wrong type for field: {fname}")
                if not isinstance(value, expected):
                    raise SchemaViolation(f"wrong type for field: {fname}")
            for fname in request:
                if fname not in record.request_schema:
                    raise SchemaViolation(f"unexpected field: {fname}")
            return record.handler(dict(request))

    # --- parameters -----------------------------------------------------

    def param_access(self, mode: str, key: str | None = None, value: Any = None) -> Any:
        with self._lock:
            if mode == "get":
                if key not in self.params:
                    raise UnknownKey(f"unknown parameter: {key}")
                return self.params[key]
            if mode == "set":
                if key is None:
                    raise UnknownKey("set requires a key")
                self.params[key] = value
                return value
            if mode == "list":
                return sorted(self.params)
            raise ValueError(f"unknown param mode: {mode}")

    # --- introspection --------------------------------------------------

    def node_names(self) -> list[str]:
        """Node names in registration order."""
        with self._lock:
            return list(self.nodes)

    def snapshot(self) -> GraphSnapshot:
        with self._lock:
            return GraphSnapshot(
                nodes=tuple(sorted(self.nodes)),
                topics=tuple(sorted((t.name, t.message_type) for t in self.topics.values())),
                services=tuple(sorted(self.services)),
                param_keys=tuple(sorted(self.params)),
            )

    # --- logging --------------------------------------------------------

    def log(self, node: str, level: str, text: str) -> int:
        with self._lock:
            if node not in self.nodes:
                raise UnknownNode(f"unknown node: {node}")
            if level not in LOG_LEVELS:
                raise BadLevel(f"bad log level: {level}")
            self.clock += 1
            entry = LogEntry(self.clock, level, node, text)
            self.logs.append(entry)
            if self._log_path is not None:
                with self._log_path.open("a", encoding="utf-8") as fh:
                    fh.write(f"{entry.tick}\t{entry.level}\t{entry.node}\t{entry.text}\n")
            return entry.tick

    def tick(self) -> int:
        """Current logical time."""
        with self._lock:
            return self.clock

    def advance(self) -> int:
        """Advance the clock by one (used to timestamp non-publish events)."""
        with self._lock:
            self.clock += 1
            return self.clock
