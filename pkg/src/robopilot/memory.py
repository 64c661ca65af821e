"""Agent memory: messages, chat history, scratchpad, and context assembly.

The context window is assembled in a fixed order — robot system prompts,
tool catalog, scratchpad, chat history — and only the history is ever
evicted (oldest non-system messages first) to fit the token budget.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetTooSmall, InvalidConfig

ROLES = ("system", "user", "assistant", "tool")

MIN_CONTEXT_BUDGET = 8192


def estimate_tokens(text: str) -> int:
    """Deterministic, model-independent token estimate: ceil(bytes / 4)."""
    return -(-len(text.encode("utf-8")) // 4)


@dataclass(frozen=True)
class Message:
    role: str
    content: str
    origin_tick: int = 0

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"bad role: {self.role}")

    @property
    def cost(self) -> int:
        return estimate_tokens(self.content)


@dataclass
class Scratchpad:
    """Bounded free-text region the agent keeps its in-progress plans in."""

    budget: int = 512
    text: str = ""
    last_updated_tick: int = 0

    def set(self, text: str, tick: int = 0) -> None:
        # Truncate head-first: the newest tail of the plan survives.
        while estimate_tokens(text) > self.budget:
            text = text[1:]
        self.text = text
        self.last_updated_tick = tick

    def clear(self) -> None:
        self.text = ""


@dataclass
class AgentConfig:
    max_iterations: int = 10
    context_budget: int = MIN_CONTEXT_BUDGET
    require_confirmation_for_uplink: bool = True
    scratchpad_budget: int = 512

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidConfig("max_iterations must be positive")
        if self.context_budget < MIN_CONTEXT_BUDGET:
            raise InvalidConfig(
                f"context_budget must be at least {MIN_CONTEXT_BUDGET} tokens"
            )


def history_cost(messages: list[Message]) -> int:
    return sum(m.cost for m in messages)


def evict_history(messages: list[Message], available_tokens: int) -> list[Message]:
    """Drop oldest non-system messages until the history fits.

    System messages are never evicted; relative order is preserved. If the
    history already fits it is returned unchanged (same list object).
    """
    if history_cost(messages) <= available_tokens:
        return messages
    kept = list(messages)
    while history_cost(kept) > available_tokens:
        victim = next((i for i, m in enumerate(kept) if m.role != "system"), None)
        if victim is None:
            break
        del kept[victim]
    return kept


@dataclass(frozen=True)
class ContextDocument:
    """Assembled prompt: fixed sections plus the (possibly evicted) history."""

    robot_prompts: tuple[Message, ...]
    catalog: str
    scratchpad: str
    history: tuple[Message, ...]

    @property
    def cost(self) -> int:
        return (
            sum(m.cost for m in self.robot_prompts)
            + estimate_tokens(self.catalog)
            + estimate_tokens(self.scratchpad)
            + sum(m.cost for m in self.history)
        )

    def messages(self) -> list[Message]:
        """Flatten to an ordered message list for a model request."""
        out = list(self.robot_prompts)
        out.append(Message("system", "Available tools:\n" + self.catalog))
        if self.scratchpad:
            out.append(Message("system", "Scratchpad:\n" + self.scratchpad))
        out.extend(self.history)
        return out

    def render(self) -> str:
        """Single-document rendering with stable section markers."""
        parts = ["## robot system prompts"]
        parts.extend(m.content for m in self.robot_prompts)
        parts.append("## tool catalog")
        parts.append(self.catalog)
        parts.append("## scratchpad")
        parts.append(self.scratchpad)
        parts.append("## chat history")
        parts.extend(f"{m.role}: {m.content}" for m in self.history)
        return "\n".join(parts)


def assemble_context(
    robot_prompts: list[Message],
    catalog: str,
    scratchpad: Scratchpad,
    history: list[Message],
    budget: int,
) -> ContextDocument:
    """Build the prompt document, evicting history to fit the budget.

    The robot prompts and catalog are never evicted; if they alone exceed
    the budget (or nothing evictable remains and the document still does
    not fit), BudgetTooSmall is raised.
    """
    fixed = sum(m.cost for m in robot_prompts) + estimate_tokens(catalog)
    if fixed > budget:
        raise BudgetTooSmall(
            f"fixed sections need {fixed} tokens, budget is {budget}"
        )
    available = budget - fixed - estimate_tokens(scratchpad.text)
    trimmed = evict_history(history, max(available, 0))
    doc = ContextDocument(
        robot_prompts=tuple(robot_prompts),
        catalog=catalog,
        scratchpad=scratchpad.text,
        history=tuple(trimmed),
    )
    if doc.cost > budget:
        raise BudgetTooSmall(
            f"context needs {doc.cost} tokens after eviction, budget is {budget}"
        )
    return doc
