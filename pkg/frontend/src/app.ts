/** DOM wiring: render, events, and the session-id hash for reload recovery. */

import { ApiError, createSession, endSession, getSession, sendTurn } from "./api.js";
import {
  UiState, canSend, debugRows, initialState, inputLocked,
  onSendStart, onSessionCreated, onSessionEnded, onSummaryLoaded,
  onTurnError, onTurnSuccess,
} from "./model.js";

let state: UiState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function render(): void {
  const transcript = el<HTMLDivElement>("transcript");
  transcript.innerHTML = state.transcript
    .map((b) => `<div class="bubble ${b.speaker}">${escapeHtml(b.text)}</div>`)
    .join("");
  transcript.scrollTop = transcript.scrollHeight;

  const banner = el<HTMLDivElement>("banner");
  if (state.status === "error" && state.error) {
    banner.innerHTML = `engine error: ${escapeHtml(state.error)} ` +
      `<button id="retry">retry</button>`;
    banner.classList.remove("hidden");
    el<HTMLButtonElement>("retry").onclick = () => {
      const pending = state.pendingText;
      if (pending) void submit(pending);
    };
  } else {
    banner.classList.add("hidden");
    banner.innerHTML = "";
  }

  const sessionLabel = el<HTMLSpanElement>("session-label");
  sessionLabel.textContent = state.sessionId
    ? `session ${state.sessionId.slice(0, 8)}${state.status === "ended" ? " (ended)" : ""}`
    : "no session";

  const input = el<HTMLInputElement>("input");
  const send = el<HTMLButtonElement>("send");
  input.disabled = inputLocked(state);
  send.disabled = inputLocked(state) || !canSend(state, input.value);

  const debugBody = el<HTMLTableSectionElement>("debug-body");
  if (state.debug) {
    debugBody.innerHTML = debugRows(state.debug)
      .map((row) => `<tr class="${row.winner ? "winner" : ""}${row.invalidated ? " invalid" : ""}">
        <td>${row.winner ? "★" : ""}</td>
        <td>${escapeHtml(row.module)}</td>
        <td class="num">${row.confidence}</td>
        <td class="num">${row.incoherence}</td>
        <td class="num">${row.repeat}</td>
        <td class="num">${row.sentLen}</td>
        <td>${escapeHtml(row.relation)}</td>
        <td class="text">${escapeHtml(row.text)}</td>
      </tr>`)
      .join("");
  } else {
    debugBody.innerHTML = "";
  }
}

async function submit(text: string): Promise<void> {
  const sessionId = state.sessionId;
  if (!sessionId || !canSend(state, text)) return;
  state = onSendStart(state, text);
  render();
  try {
    const response = await sendTurn(sessionId, text);
    state = onTurnSuccess(state, text, response);
    el<HTMLInputElement>("input").value = "";
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    state = onTurnError(state, text, message);
  }
  render();
}

async function newSession(): Promise<void> {
  const seedRaw = el<HTMLInputElement>("seed").value.trim();
  const seed = seedRaw ? Number(seedRaw) : undefined;
  try {
    const created = await createSession(Number.isFinite(seed as number) ? seed : undefined);
    state = onSessionCreated(state, created.session_id);
    window.location.hash = created.session_id;
  } catch (err) {
    state = { ...state, status: "error", error: String(err) };
  }
  render();
}

async function finishSession(): Promise<void> {
  if (!state.sessionId) return;
  try {
    await endSession(state.sessionId);
    state = onSessionEnded(state);
  } catch (err) {
    state = { ...state, status: "error", error: String(err) };
  }
  render();
}

async function restoreFromHash(): Promise<void> {
  const sessionId = window.location.hash.replace(/^#/, "");
  if (!sessionId) return;
  try {
    const summary = await getSession(sessionId);
    state = onSummaryLoaded(state, summary);
  } catch {
    window.location.hash = "";
  }
  render();
}

export function start(): void {
  el<HTMLButtonElement>("new-session").onclick = () => void newSession();
  el<HTMLButtonElement>("end-session").onclick = () => void finishSession();
  el<HTMLButtonElement>("send").onclick = () => void submit(el<HTMLInputElement>("input").value);
  const input = el<HTMLInputElement>("input");
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void submit(input.value);
  });
  input.addEventListener("input", render);
  el<HTMLInputElement>("debug-toggle").addEventListener("change", (event) => {
    const panel = el<HTMLDivElement>("debug-panel");
    panel.classList.toggle("hidden", !(event.target as HTMLInputElement).checked);
  });
  void restoreFromHash();
  render();
}

start();
