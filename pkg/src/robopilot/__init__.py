"""Natural-language robot operations agent over a simulated pub/sub middleware."""

from .agent import (
    FinalAnswer,
    Malformed,
    ReactEngine,
    SafetyState,
    StepTrace,
    ToolCall,
    ToolCallBatch,
    parse_model_output,
)
from .graphsim import Graph, GraphSnapshot
from .memory import AgentConfig, Message, Scratchpad, assemble_context, estimate_tokens
from .models import (
    ModelCapabilities,
    ModelRequest,
    ModelResponse,
    RemoteBackend,
    RemoteConfig,
    Script,
    ScriptedBackend,
    ScriptRule,
    parse_script,
    validate_model,
)
from .session import Session, SessionMetrics, SessionService
from .tools import Blacklist, ToolError, ToolRegistry, ToolResult, ToolSpec

__all__ = [
    "AgentConfig",
    "Blacklist",
    "FinalAnswer",
    "Graph",
    "GraphSnapshot",
    "Malformed",
    "Message",
    "ModelCapabilities",
    "ModelRequest",
    "ModelResponse",
    "ReactEngine",
    "RemoteBackend",
    "RemoteConfig",
    "SafetyState",
    "Scratchpad",
    "Script",
    "ScriptRule",
    "ScriptedBackend",
    "Session",
    "SessionMetrics",
    "SessionService",
    "StepTrace",
    "ToolCall",
    "ToolCallBatch",
    "ToolError",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "assemble_context",
    "estimate_tokens",
    "parse_model_output",
    "parse_script",
    "validate_model",
]
__version__ = "0.1.0"
