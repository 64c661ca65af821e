"""Command-line interface: interactive REPL and the gateway server.

Meta-commands inside the REPL: /confirm, /deny, /estop, /reset, /quit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agent import (
    ActionEvent,
    ConfirmationRequired,
    FinalEvent,
    ObservationEvent,
    ReasoningEvent,
)
from .errors import BackendError, NoPendingConfirmation, RobopilotError
from .models import RemoteBackend, RemoteConfig, ScriptedBackend
from .session import SessionService

CONFIG_FORMAT = """\
Config files are UTF-8 text, one `key = value` per line; `#` starts a
comment. Recognized keys: model.endpoint, model.name,
agent.max_iterations, agent.context_budget.
"""


def parse_config_file(path: str | Path) -> dict:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise RobopilotError(f"bad config line {lineno}: {stripped!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robopilot",
        description="Operate a simulated robot through natural-language conversation.",
    )
    parser.add_argument("--scenario", default="testbed", help="scenario name or .scenario file")
    parser.add_argument("--script", help="script file for the scripted model backend")
    parser.add_argument("--model", choices=("scripted", "remote"), default="scripted")
    parser.add_argument("--log-dir", help="directory for middleware log mirrors")
    parser.add_argument("--config", help="config file (key = value lines)")
    parser.add_argument("--serve", action="store_true", help="run the HTTP gateway instead of the REPL")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    return parser


def make_backend_factory(args, config: dict):
    if args.model == "remote":
        endpoint = config.get("model.endpoint")
        if not endpoint:
            raise RobopilotError("remote model requires model.endpoint in the config file")
        remote = RemoteConfig(endpoint=endpoint, model=config.get("model.name", "default"))
        return lambda: RemoteBackend(remote)
    if not args.script:
        raise RobopilotError("scripted model requires --script <file>")
    script_path = args.script
    return lambda: ScriptedBackend.from_file(script_path)


def config_overrides(config: dict) -> dict:
    overrides = {}
    if "agent.max_iterations" in config:
        overrides["max_iterations"] = int(config["agent.max_iterations"])
    if "agent.context_budget" in config:
        overrides["context_budget"] = int(config["agent.context_budget"])
    return overrides


def print_event(event, out) -> None:
    if isinstance(event, ReasoningEvent):
        out.write(f"[reasoning {event.iteration}] {event.text}\n")
    elif isinstance(event, ActionEvent):
        out.write(f"[action {event.iteration}] {event.call.name} {event.call.args}\n")
    elif isinstance(event, ObservationEvent):
        out.write(f"[observation {event.iteration}] {event.observation.rendered_text}\n")
    elif isinstance(event, ConfirmationRequired):
        out.write(
            f"[confirm?] {event.call.name} {event.call.args} — /confirm or /deny\n"
        )
    elif isinstance(event, FinalEvent):
        out.write(f"{event.text}\n")


def repl(session, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        if line == "/quit":
            return 0
        try:
            if line in ("/confirm", "/deny"):
                decision = "approve" if line == "/confirm" else "deny"
                for event in session.confirm(decision):
                    print_event(event, stdout)
            elif line == "/estop":
                session.estop()
                stdout.write("e-stopped\n")
            elif line == "/reset":
                session.estop_reset()
                stdout.write("e-stop reset\n")
            else:
                for event in session.post_message(line):
                    print_event(event, stdout)
        except NoPendingConfirmation:
            stdout.write("nothing to confirm\n")
        except BackendError as exc:
            stdout.write(f"backend failure: {exc}\n")
            return 1
        stdout.flush()
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = parse_config_file(args.config) if args.config else {}
    try:
        backend_factory = make_backend_factory(args, config)
    except RobopilotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    service = SessionService(backend_factory, log_dir=args.log_dir)
    if args.serve:
        import uvicorn

        from .server import build_app

        uvicorn.run(build_app(service), host=args.host, port=args.port)
        return 0
    session = service.create_session(args.scenario, config_overrides(config))
    return repl(session)


if __name__ == "__main__":
    sys.exit(main())
