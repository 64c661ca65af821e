"""Exception hierarchy shared across the runtime."""

from __future__ import annotations


class RobopilotError(Exception):
    """Base class for all runtime errors."""


# --- middleware graph ---------------------------------------------------


class GraphError(RobopilotError):
    pass


class DuplicateNode(GraphError):
    pass


class InvalidName(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class UnknownTopic(GraphError):
    pass


class NotAPublisher(GraphError):
    pass


class UnknownService(GraphError):
    pass


class SchemaViolation(GraphError):
    pass


class UnknownKey(GraphError):
    pass


class BadLevel(GraphError):
    pass


class ReentrancyError(GraphError):
    pass


# --- tool registry ------------------------------------------------------


class RegistryError(RobopilotError):
    pass


class DuplicateTool(RegistryError):
    pass


class MissingDescription(RegistryError):
    pass


class RegistrySealed(RegistryError):
    pass


# --- agent / memory -----------------------------------------------------


class BudgetTooSmall(RobopilotError):
    pass


class InvalidConfig(RobopilotError):
    pass


class NoPendingConfirmation(RobopilotError):
    pass


# --- model backends -----------------------------------------------------


class BackendError(RobopilotError):
    pass


class NoMatchingRule(BackendError):
    pass


class BackendUnavailable(BackendError):
    pass


class AuthError(BackendError):
    pass


class ResponseMappingError(BackendError):
    pass


class ScriptSyntaxError(BackendError):
    pass


# --- gateway ------------------------------------------------------------


class UnknownScenario(RobopilotError):
    pass


class UnknownSession(RobopilotError):
    pass


class SessionBusy(RobopilotError):
    pass
