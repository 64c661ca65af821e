"""Built-in introspection and utility tools bound to a middleware graph."""

from __future__ import annotations

import re
import statistics
from pathlib import Path

from .graphsim import LOG_LEVELS, Graph
from .tools import (
    Blacklist,
    ToolFailure,
    ToolParam,
    ToolRegistry,
    ToolSpec,
)


def register_builtin_tools(registry: ToolRegistry, graph: Graph) -> None:
    """Register the standard introspection/utility toolset against a graph."""

    def node_list(pattern=None, namespace=None, blacklist=None) -> dict:
        nodes = graph.node_names()
        # Filter order: namespace prefix, then pattern, then blacklist.
        if namespace:
            nodes = [n for n in nodes if n.startswith(namespace)]
        if pattern:
            try:
                matcher = re.compile(pattern)
            except re.error as exc:
                raise ToolFailure("bad_pattern", f"invalid regex {pattern!r}: {exc}")
            nodes = [n for n in nodes if matcher.fullmatch(n)]
        if blacklist:
            bl = Blacklist.of(blacklist)
            nodes = [n for n in nodes if not bl.matches(n)]
        return {
            "nodes": nodes,
            "total": len(nodes),
            "namespace": namespace or "/",
            "pattern": pattern or ".*",
        }

    registry.register(
        ToolSpec(
            name="node_list",
            description="Returns a list of running nodes with optional filtering.",
            params=(
                ToolParam("pattern", "string", description="Regex to filter node names."),
                ToolParam("namespace", "string", description="Namespace to scope the search."),
                ToolParam("blacklist", "list", description="Node names to exclude."),
            ),
            accepts_blacklist=True,
        ),
        node_list,
    )

    def topic_echo(topic=None, count=None, mode="echo") -> dict:
        if mode == "list":
            topics = [
                {"name": t.name, "type": t.message_type}
                for t in graph.topics.values()
            ]
            return {"topics": topics, "total": len(topics)}
        if topic is None or topic not in graph.topics:
            raise ToolFailure("unknown_topic", f"unknown topic: {topic}")
        buffered = list(graph.topics[topic].buffer)
        n = len(buffered) if count is None else max(0, min(int(count), len(buffered)))
        messages = buffered[len(buffered) - n :]
        return {"topic": topic, "messages": messages, "total": len(messages)}

    registry.register(
        ToolSpec(
            name="topic_echo",
            description="Lists topics, or echoes the most recent messages on a topic.",
            params=(
                ToolParam("topic", "string", description="Topic to echo (echo mode)."),
                ToolParam("count", "integer", description="How many recent messages to return."),
                ToolParam("mode", "string", description="'list' or 'echo' (default)."),
            ),
        ),
        topic_echo,
    )

    def service_call(service, request=None) -> dict:
        from .errors import SchemaViolation, UnknownService

        try:
            response = graph.call_service(service, request or {})
        except UnknownService as exc:
            raise ToolFailure("unknown_service", str(exc))
        except SchemaViolation as exc:
            raise ToolFailure("schema_violation", str(exc))
        return {"service": service, "response": response}

    registry.register(
        ToolSpec(
            name="service_call",
            description="Calls a service with a request payload and returns its response.",
            params=(
                ToolParam("service", "string", required=True, description="Service name."),
                ToolParam("request", "map", description="Request fields."),
            ),
        ),
        service_call,
    )

    def param_tool(mode, key=None, value=None) -> dict:
        from .errors import UnknownKey

        try:
            result = graph.param_access(mode, key, value)
        except UnknownKey as exc:
            raise ToolFailure("unknown_key", str(exc))
        except ValueError as exc:
            raise ToolFailure("arg_validation", str(exc))
        if mode == "list":
            return {"keys": result, "total": len(result)}
        if mode == "set":
            return {"key": key, "value": value, "set": True}
        return {"key": key, "value": result}

    registry.register(
        ToolSpec(
            name="param",
            description="Gets, sets, or lists parameter values.",
            params=(
                ToolParam("mode", "string", required=True, description="'get', 'set', or 'list'."),
                ToolParam("key", "string", description="Parameter key."),
                ToolParam("value", "string", description="Value to set."),
            ),
        ),
        param_tool,
    )

    registry.register(
        ToolSpec(
            name="read_log",
            description="Reads a log file and returns entries matching the criteria.",
            params=(
                ToolParam("log_file_directory", "string", required=True,
                          description="Directory containing the log file."),
                ToolParam("log_filename", "string", required=True,
                          description="Name of the log file."),
                ToolParam("level_filter", "string", description="Keep only this level."),
                ToolParam("num_lines", "integer", description="Return only the newest N entries."),
            ),
        ),
        read_log,
    )

    registry.register(
        ToolSpec(
            name="add_all",
            description="Returns the sum of numbers.",
            params=(ToolParam("numbers", "list", required=True, description="Numbers to add."),),
        ),
        add_all,
    )

    registry.register(
        ToolSpec(
            name="mean",
            description="Returns the mean and standard deviation of a list of numbers.",
            params=(ToolParam("numbers", "list", required=True, description="Numbers to analyze."),),
        ),
        mean,
    )

    def package_tool(name=None) -> dict:
        return {"supported": False, "detail": "package/launch tools are not supported in simulation"}

    registry.register(
        ToolSpec(
            name="package_list",
            description="Package and launch-file operations (stub: unsupported in simulation).",
            params=(ToolParam("name", "string", description="Package name."),),
        ),
        package_tool,
    )


def read_log(log_file_directory, log_filename, level_filter=None, num_lines=None) -> dict:
    """Parse a tab-separated log mirror file, filter by level, keep newest N."""
    path = Path(log_file_directory) / log_filename
    if not path.is_file():
        raise ToolFailure("file_not_found", f"no such log file: {path}")
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        parts = line.split("\t")
        if len(parts) != 4 or parts[1] not in LOG_LEVELS:
            raise ToolFailure("malformed_line", f"malformed log line {lineno}")
        try:
            tick = int(parts[0])
        except ValueError:
            raise ToolFailure("malformed_line", f"malformed log line {lineno}")
        entries.append({"tick": tick, "level": parts[1], "node": parts[2], "text": parts[3]})
    if level_filter is not None:
        entries = [e for e in entries if e["level"] == level_filter]
    if num_lines is not None:
        entries = entries[max(0, len(entries) - int(num_lines)) :]
    return {"entries": entries, "total": len(entries), "level_filter": level_filter}


def add_all(numbers) -> dict:
    if not numbers:
        raise ToolFailure("empty_list", "add_all requires a non-empty list")
    total = numbers[0]
    for x in numbers[1:]:
        total = total + x
    return {"sum": total}


def mean(numbers) -> dict:
    if len(numbers) < 2:
        raise ToolFailure("too_few_elements", "mean requires at least two numbers")
    return {"mean": statistics.mean(numbers), "stdev": statistics.stdev(numbers)}
