/** Console view state: a pure reducer over stream events and UI actions. */

import type { ConfirmationEvent, Metrics, StreamEvent } from "./types";

export interface Bubble {
  role: "user" | "assistant";
  text: string;
  reason?: string;
}

export interface TraceEntry {
  iteration: number;
  kind: "reasoning" | "action" | "observation";
  text: string;
  isError: boolean;
}

export interface ViewState {
  sessionId: string | null;
  bubbles: Bubble[];
  trace: TraceEntry[];
  pendingConfirmation: ConfirmationEvent | null;
  streaming: boolean;
  estopped: boolean;
  errorBanner: string | null;
  language: string;
  metrics: Metrics | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    bubbles: [],
    trace: [],
    pendingConfirmation: null,
    streaming: false,
    estopped: false,
    errorBanner: null,
    language: "English",
    metrics: null,
  };
}

export type Action =
  | { type: "session_created"; id: string }
  | { type: "user_message"; text: string }
  | { type: "stream_event"; event: StreamEvent }
  | { type: "stream_closed" }
  | { type: "confirmation_answered" }
  | { type: "estop" }
  | { type: "estop_reset" }
  | { type: "set_language"; language: string }
  | { type: "metrics"; metrics: Metrics }
  | { type: "connection_lost"; message: string };

export function formatArgs(args: Record<string, unknown>): string {
  const parts = Object.entries(args).map(([key, value]) => `${key}=${JSON.stringify(value)}`);
  return parts.join(", ");
}

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "session_created":
      return { ...initialState(), language: state.language, sessionId: action.id };
    case "user_message":
      return {
        ...state,
        streaming: true,
        errorBanner: null,
        bubbles: [...state.bubbles, { role: "user", text: action.text }],
      };
    case "stream_event":
      return applyEvent(state, action.event);
    case "stream_closed":
      // Input stays locked only while a confirmation is still pending.
      return state.pendingConfirmation ? state : { ...state, streaming: false };
    case "confirmation_answered":
      return { ...state, pendingConfirmation: null };
    case "estop":
      return { ...state, estopped: true, pendingConfirmation: null };
    case "estop_reset":
      return { ...state, estopped: false };
    case "set_language":
      return { ...state, language: action.language };
    case "metrics":
      return { ...state, metrics: action.metrics };
    case "connection_lost":
      return { ...state, streaming: false, errorBanner: action.message };
  }
}

function applyEvent(state: ViewState, event: StreamEvent): ViewState {
  switch (event.kind) {
    case "reasoning":
      return pushTrace(state, {
        iteration: event.iteration,
        kind: "reasoning",
        text: event.text,
        isError: false,
      });
    case "action":
      return pushTrace(state, {
        iteration: event.iteration,
        kind: "action",
        text: `${event.tool}(${formatArgs(event.args)})`,
        isError: false,
      });
    case "observation":
      return pushTrace(state, {
        iteration: event.iteration,
        kind: "observation",
        text: event.content,
        isError: event.error,
      });
    case "confirmation":
      return { ...state, pendingConfirmation: event };
    case "final":
      return {
        ...state,
        streaming: false,
        pendingConfirmation: null,
        bubbles: [
          ...state.bubbles,
          { role: "assistant", text: event.text, reason: event.reason },
        ],
      };
    case "error":
      return { ...state, streaming: false, errorBanner: event.message };
  }
}

function pushTrace(state: ViewState, entry: TraceEntry): ViewState {
  return { ...state, trace: [...state.trace, entry] };
}
