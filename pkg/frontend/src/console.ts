/** DOM console: renders ViewState and wires controls to the gateway.
 *
 * All user-visible content is set through textContent, never innerHTML
 * with interpolated data.
 */

import { GatewayClient } from "./client";
import { type Action, type ViewState, formatArgs, initialState, reduce } from "./state";
import { LANGUAGES } from "./types";

export class ConsoleApp {
  state: ViewState = initialState();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: GatewayClient,
  ) {
    this.buildSkeleton();
    this.render();
  }

  dispatch(action: Action): void {
    this.state = reduce(this.state, action);
    this.render();
  }

  async start(scenario: string): Promise<void> {
    const id = await this.client.createSession(scenario);
    this.dispatch({ type: "session_created", id });
  }

  async submit(text: string): Promise<void> {
    const { sessionId, streaming } = this.state;
    if (!sessionId || streaming || !text.trim()) return;
    this.dispatch({ type: "user_message", text });
    try {
      for await (const event of this.client.sendMessage(
        sessionId,
        text,
        this.state.language,
      )) {
        this.dispatch({ type: "stream_event", event });
      }
      this.dispatch({ type: "stream_closed" });
      this.dispatch({ type: "metrics", metrics: await this.client.metrics(sessionId) });
    } catch (error) {
      this.dispatch({
        type: "connection_lost",
        message: error instanceof Error ? error.message : String(error),
      });
    }
  }

  async answerConfirmation(decision: "approve" | "deny"): Promise<void> {
    const { sessionId, pendingConfirmation } = this.state;
    if (!sessionId || !pendingConfirmation) return;
    await this.client.confirm(sessionId, decision);
    this.dispatch({ type: "confirmation_answered" });
  }

  async triggerEstop(): Promise<void> {
    const { sessionId } = this.state;
    if (!sessionId) return;
    await this.client.estop(sessionId);
    this.dispatch({ type: "estop" });
  }

  // --- rendering --------------------------------------------------------

  private buildSkeleton(): void {
    this.root.innerHTML = `
      <div class="banner" data-role="error" hidden></div>
      <div class="banner estop" data-role="estop" hidden>E-STOP LATCHED</div>
      <div class="banner confirm" data-role="confirmation" hidden>
        <span data-role="confirmation-text"></span>
        <button data-role="approve">Approve</button>
        <button data-role="deny">Deny</button>
      </div>
      <ol data-role="messages"></ol>
      <ol data-role="trace"></ol>
      <form data-role="composer">
        <select data-role="language"></select>
        <input data-role="input" type="text" />
        <button data-role="send" type="submit">Send</button>
        <button data-role="estop-button" type="button">E-stop</button>
        <button data-role="audio" type="button" disabled
                title="Audio playback is not available">&#9658;</button>
      </form>
      <div data-role="metrics"></div>
    `;
    const select = this.part<HTMLSelectElement>("language");
    for (const language of LANGUAGES) {
      const option = document.createElement("option");
      option.value = language;
      option.textContent = language;
      select.appendChild(option);
    }
    select.addEventListener("change", () =>
      this.dispatch({ type: "set_language", language: select.value }),
    );
    this.part("composer").addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.part<HTMLInputElement>("input");
      const text = input.value;
      input.value = "";
      void this.submit(text);
    });
    this.part("approve").addEventListener("click", () => void this.answerConfirmation("approve"));
    this.part("deny").addEventListener("click", () => void this.answerConfirmation("deny"));
    this.part("estop-button").addEventListener("click", () => void this.triggerEstop());
  }

  part<T extends HTMLElement = HTMLElement>(role: string): T {
    const found = this.root.querySelector(`[data-role="${role}"]`);
    if (!found) throw new Error(`missing console part: ${role}`);
    return found as T;
  }

  private render(): void {
    const state = this.state;

    const error = this.part("error");
    error.hidden = state.errorBanner === null;
    error.textContent = state.errorBanner ?? "";

    this.part("estop").hidden = !state.estopped;

    const confirmation = this.part("confirmation");
    confirmation.hidden = state.pendingConfirmation === null;
    const pending = state.pendingConfirmation;
    this.part("confirmation-text").textContent = pending
      ? `Confirm ${pending.tool}(${formatArgs(pending.args)})?`
      : "";

    const messages = this.part("messages");
    messages.textContent = "";
    for (const bubble of state.bubbles) {
      const item = document.createElement("li");
      item.className = `bubble ${bubble.role}`;
      item.textContent = bubble.text;
      if (bubble.reason && bubble.reason !== "answer") {
        item.dataset.reason = bubble.reason;
      }
      messages.appendChild(item);
    }

    const trace = this.part("trace");
    trace.textContent = "";
    for (const entry of state.trace) {
      const item = document.createElement("li");
      item.className = `trace ${entry.kind}${entry.isError ? " error" : ""}`;
      item.textContent = `[${entry.iteration}] ${entry.kind}: ${entry.text}`;
      trace.appendChild(item);
    }

    // Input locks while streaming; safety controls stay live.
    this.part<HTMLInputElement>("input").disabled = state.streaming;
    this.part<HTMLButtonElement>("send").disabled = state.streaming;

    const metrics = this.part("metrics");
    metrics.textContent = state.metrics
      ? `turns ${state.metrics.turns} · completed ${state.metrics.tasks_completed}` +
        ` · interventions ${state.metrics.interventions} · incidents ${state.metrics.incidents}`
      : "";
  }
}

export function mountConsole(root: HTMLElement, baseUrl: string): ConsoleApp {
  return new ConsoleApp(root, new GatewayClient(baseUrl));
}
