/** Wire types for the gateway's NDJSON event stream and JSON endpoints. */

export interface ReasoningEvent {
  kind: "reasoning";
  iteration: number;
  text: string;
}

export interface ActionEvent {
  kind: "action";
  iteration: number;
  id: string;
  tool: string;
  args: Record<string, unknown>;
}

export interface ObservationEvent {
  kind: "observation";
  iteration: number;
  id: string;
  content: string;
  error: boolean;
}

export interface ConfirmationEvent {
  kind: "confirmation";
  id: string;
  tool: string;
  args: Record<string, unknown>;
}

export interface FinalEvent {
  kind: "final";
  text: string;
  reason: "answer" | "iteration_limit" | "malformed";
}

export interface ErrorEvent {
  kind: "error";
  message: string;
}

export type StreamEvent =
  | ReasoningEvent
  | ActionEvent
  | ObservationEvent
  | ConfirmationEvent
  | FinalEvent
  | ErrorEvent;

export interface Metrics {
  interventions: number;
  tasks_completed: number;
  incidents: number;
  turns: number;
}

export const LANGUAGES = [
  "English",
  "Spanish",
  "Polish",
  "German",
  "Korean",
  "Dutch",
] as const;

export type Language = (typeof LANGUAGES)[number];
