/** Pure UI state and formatting; everything here is unit-testable without a DOM.
 *
 * The UI keeps no conversation state beyond the session id: the transcript is
 * whatever the server reported, so a reload plus GET /v1/sessions/{id}
 * reconstructs it exactly.
 */

import type { PoolCandidate, SessionSummary, TurnDebug, TurnResponse } from "./types.js";

export interface Bubble {
  speaker: "user" | "agent";
  text: string;
}

export interface DebugRow {
  winner: boolean;
  module: string;
  confidence: string; // verbatim, at most 3 decimals
  incoherence: string;
  repeat: string;
  sentLen: string;
  relation: string;
  invalidated: boolean;
  text: string;
}

export type Status = "idle" | "waiting" | "error" | "ended" | "disconnected";

export interface UiState {
  sessionId: string | null;
  transcript: Bubble[];
  debug: TurnDebug | null;
  status: Status;
  error: string | null;
  pendingText: string | null; // retained for retry after an error
}

export function initialState(): UiState {
  return { sessionId: null, transcript: [], debug: null, status: "disconnected",
           error: null, pendingText: null };
}

/** At most 3 decimals, no padding games: 0.9 -> "0.9", 0.8499999 -> "0.85". */
export function formatConfidence(value: number): string {
  const rounded = Math.round(value * 1000) / 1000;
  return String(rounded);
}

export function debugRows(debug: TurnDebug): DebugRow[] {
  const rows = debug.pool.map((candidate: PoolCandidate): DebugRow => ({
    winner: candidate.id === debug.winner_id,
    module: candidate.source_module,
    confidence: formatConfidence(candidate.final_confidence),
    incoherence: formatConfidence(candidate.loss.incoherence),
    repeat: formatConfidence(candidate.loss.repeat),
    sentLen: formatConfidence(candidate.loss.sentLen),
    relation: candidate.discourse_relation ?? "",
    invalidated: candidate.invalidated,
    text: candidate.text,
  }));
  rows.sort((a, b) => Number(b.confidence) - Number(a.confidence));
  return rows;
}

export function canSend(state: UiState, draft: string): boolean {
  if (draft.trim().length === 0) return false;
  return state.status === "idle" || state.status === "error";
}

// --- transitions ------------------------------------------------------

export function onSessionCreated(state: UiState, sessionId: string): UiState {
  return { ...initialState(), sessionId, status: "idle" };
}

export function onSendStart(state: UiState, text: string): UiState {
  return { ...state, status: "waiting", error: null, pendingText: text };
}

export function onTurnSuccess(state: UiState, text: string, response: TurnResponse): UiState {
  return {
    ...state,
    transcript: [...state.transcript,
                 { speaker: "user", text },
                 { speaker: "agent", text: response.reply.text }],
    debug: response.debug,
    status: response.ended ? "ended" : "idle",
    error: null,
    pendingText: null,
  };
}

/** Failures leave the transcript untouched; the draft is kept for retry. */
export function onTurnError(state: UiState, text: string, message: string): UiState {
  return { ...state, status: "error", error: message, pendingText: text };
}

export function onSessionEnded(state: UiState): UiState {
  return { ...state, status: "ended", pendingText: null };
}

/** Rebuild after a reload: the server's transcript is the truth. */
export function onSummaryLoaded(state: UiState, summary: SessionSummary): UiState {
  return {
    ...state,
    sessionId: summary.session_id,
    transcript: summary.transcript.map((entry) => ({
      speaker: entry.speaker,
      text: entry.text,
    })),
    status: summary.ended ? "ended" : "idle",
    error: null,
    pendingText: null,
  };
}

export function inputLocked(state: UiState): boolean {
  return state.status === "ended" || state.status === "waiting"
    || state.status === "disconnected";
}
