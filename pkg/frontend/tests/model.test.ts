import { describe, expect, it } from "vitest";

import {
  canSend, debugRows, formatConfidence, initialState, inputLocked,
  onSendStart, onSessionCreated, onSessionEnded, onSummaryLoaded,
  onTurnError, onTurnSuccess,
} from "../src/model.js";
import type { SessionSummary, TurnDebug, TurnResponse } from "../src/types.js";

function candidate(id: string, confidence: number, module = "retrieval") {
  return {
    id,
    text: `candidate ${id}`,
    source_module: module,
    base_confidence: 0.6,
    context: 0.6,
    loss: { incoherence: 0.15, repeat: 0, sentLen: 0.01 },
    final_confidence: confidence,
    invalidated: false,
    priority: false,
    topic: null,
    entities: [],
    discourse_relation: id === "c0" ? "comparison" : null,
    prompt_id: `p:${id}`,
  };
}

function debug(...confidences: number[]): TurnDebug {
  return {
    pool: confidences.map((c, i) => candidate(`c${i}`, c)),
    winner_id: "c0",
    winner_via: "score",
    active_module: null,
    discourse_relation: "comparison",
    mood: "neutral",
    flow: {},
  };
}

function turnResponse(text: string, ended = false): TurnResponse {
  return { reply: { text, ssml: `<speak>${text}</speak>` }, debug: debug(0.9, 0.6), ended };
}

describe("formatConfidence", () => {
  it("keeps at most three decimals without padding", () => {
    expect(formatConfidence(0.9)).toBe("0.9");
    expect(formatConfidence(0.8499999)).toBe("0.85");
    expect(formatConfidence(1)).toBe("1");
    expect(formatConfidence(0.1234)).toBe("0.123");
  });
});

describe("debugRows", () => {
  it("has one row per pool candidate", () => {
    const rows = debugRows(debug(0.9, 0.6, 0.5, 0.4));
    expect(rows).toHaveLength(4);
  });

  it("sorts by confidence descending and flags the winner", () => {
    const rows = debugRows(debug(0.6, 0.9, 0.75));
    expect(rows.map((r) => r.confidence)).toEqual(["0.9", "0.75", "0.6"]);
    expect(rows.filter((r) => r.winner)).toHaveLength(1);
    expect(rows.find((r) => r.winner)?.confidence).toBe("0.6"); // winner_id is c0
  });

  it("carries the loss breakdown verbatim", () => {
    const rows = debugRows(debug(0.9));
    expect(rows[0].incoherence).toBe("0.15");
    expect(rows[0].sentLen).toBe("0.01");
    expect(rows[0].repeat).toBe("0");
  });
});

describe("turn lifecycle", () => {
  it("appends both bubbles on success", () => {
    let state = onSessionCreated(initialState(), "abc");
    state = onSendStart(state, "hi");
    state = onTurnSuccess(state, "hi", turnResponse("hello!"));
    expect(state.transcript).toEqual([
      { speaker: "user", text: "hi" },
      { speaker: "agent", text: "hello!" },
    ]);
    expect(state.status).toBe("idle");
    expect(state.debug?.pool).toHaveLength(2);
  });

  it("leaves the transcript unchanged on error and keeps the draft for retry", () => {
    let state = onSessionCreated(initialState(), "abc");
    state = onTurnSuccess(state, "hi", turnResponse("hello!"));
    const before = state.transcript;
    state = onSendStart(state, "second");
    state = onTurnError(state, "second", "500: boom");
    expect(state.transcript).toEqual(before); // no phantom bubble
    expect(state.status).toBe("error");
    expect(state.pendingText).toBe("second");
  });

  it("locks input while waiting and after the session ends", () => {
    let state = onSessionCreated(initialState(), "abc");
    expect(inputLocked(state)).toBe(false);
    state = onSendStart(state, "bye");
    expect(inputLocked(state)).toBe(true);
    state = onTurnSuccess(state, "bye", turnResponse("farewell", true));
    expect(state.status).toBe("ended");
    expect(inputLocked(state)).toBe(true);
  });

  it("end control locks input", () => {
    let state = onSessionCreated(initialState(), "abc");
    state = onSessionEnded(state);
    expect(inputLocked(state)).toBe(true);
  });

  it("empty input cannot send", () => {
    const state = onSessionCreated(initialState(), "abc");
    expect(canSend(state, "")).toBe(false);
    expect(canSend(state, "   ")).toBe(false);
    expect(canSend(state, "hello")).toBe(true);
  });
});

describe("reload reconstruction", () => {
  it("rebuilds the transcript from the server summary", () => {
    const summary: SessionSummary = {
      session_id: "abc",
      turn_count: 2,
      active_module: null,
      explored_topics: [],
      transcript: [
        { speaker: "user", text: "hello", timestamp: 0 },
        { speaker: "agent", text: "hi there", timestamp: 1 },
        { speaker: "user", text: "tell me a story", timestamp: 2 },
        { speaker: "agent", text: "once upon a time...", timestamp: 3 },
      ],
      ended: false,
    };
    const state = onSummaryLoaded(initialState(), summary);
    expect(state.sessionId).toBe("abc");
    expect(state.transcript.map((b) => b.text)).toEqual([
      "hello", "hi there", "tell me a story", "once upon a time...",
    ]);
    expect(state.status).toBe("idle");
  });

  it("marks ended sessions as ended", () => {
    const summary: SessionSummary = {
      session_id: "abc", turn_count: 0, active_module: null,
      explored_topics: [], transcript: [], ended: true,
    };
    expect(onSummaryLoaded(initialState(), summary).status).toBe("ended");
  });

  it("new session resets everything but keeps the id", () => {
    let state = onSessionCreated(initialState(), "abc");
    state = onTurnSuccess(state, "hi", turnResponse("hello!"));
    state = onSessionCreated(state, "def");
    expect(state.sessionId).toBe("def");
    expect(state.transcript).toEqual([]);
    expect(state.debug).toBeNull();
  });
});
