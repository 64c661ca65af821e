/** Thin HTTP client for the gateway: sessions, NDJSON streams, controls. */

import type { Metrics, StreamEvent } from "./types";

export type FetchLike = typeof fetch;

/**
 * Split an incoming byte stream into parsed NDJSON events.
 *
 * Lines may arrive fragmented across chunks; a trailing partial line is
 * held back until its newline arrives. Blank lines are ignored.
 */
export async function* parseNdjson(
  stream: AsyncIterable<Uint8Array>,
): AsyncGenerator<StreamEvent> {
  const decoder = new TextDecoder();
  let buffer = "";
  for await (const chunk of stream) {
    buffer += decoder.decode(chunk, { stream: true });
    let index: number;
    while ((index = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, index).trim();
      buffer = buffer.slice(index + 1);
      if (line) yield JSON.parse(line) as StreamEvent;
    }
  }
  const rest = buffer.trim();
  if (rest) yield JSON.parse(rest) as StreamEvent;
}

async function* iterateBody(body: ReadableStream<Uint8Array>) {
  const reader = body.getReader();
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) return;
      if (value) yield value;
    }
  } finally {
    reader.releaseLock();
  }
}

export class GatewayError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async post(path: string, body: unknown): Promise<Response> {
    const reply = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!reply.ok) {
      throw new GatewayError(reply.status, await reply.text());
    }
    return reply;
  }

  async createSession(
    scenario: string,
    config: Record<string, unknown> = {},
  ): Promise<string> {
    const reply = await this.post("/sessions", { scenario, config });
    const data = (await reply.json()) as { id: string };
    return data.id;
  }

  /** Post a user message and stream the turn's events. */
  async *sendMessage(
    sessionId: string,
    text: string,
    language?: string,
  ): AsyncGenerator<StreamEvent> {
    const reply = await this.post(`/sessions/${sessionId}/messages`, {
      text,
      language: language ?? null,
    });
    if (!reply.body) throw new GatewayError(0, "response body missing");
    yield* parseNdjson(iterateBody(reply.body));
  }

  async confirm(sessionId: string, decision: "approve" | "deny"): Promise<void> {
    await this.post(`/sessions/${sessionId}/confirm`, { decision });
  }

  async estop(sessionId: string): Promise<number> {
    const reply = await this.post(`/sessions/${sessionId}/estop`, {});
    const data = (await reply.json()) as { ack_tick: number };
    return data.ack_tick;
  }

  async override(
    sessionId: string,
    tool: string,
    args: Record<string, unknown> = {},
  ): Promise<unknown> {
    const reply = await this.post(`/sessions/${sessionId}/override`, {
      tool,
      args,
    });
    return reply.json();
  }

  async metrics(sessionId: string): Promise<Metrics> {
    const reply = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/metrics`,
    );
    if (!reply.ok) throw new GatewayError(reply.status, await reply.text());
    return (await reply.json()) as Metrics;
  }

  async transcript(sessionId: string): Promise<string> {
    const reply = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/transcript`,
    );
    if (!reply.ok) throw new GatewayError(reply.status, await reply.text());
    return reply.text();
  }
}
