/** Thin typed client over the engine's HTTP JSON API. */

import type { SessionSummary, TurnResponse } from "./types.js";

declare global {
  interface Window {
    ENGINE_BASE_URL?: string;
  }
}

/** Same-origin by default; override via window.ENGINE_BASE_URL. */
export function engineBaseUrl(): string {
  if (typeof window !== "undefined" && window.ENGINE_BASE_URL) {
    return window.ENGINE_BASE_URL.replace(/\/$/, "");
  }
  return "";
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number | null) {
    super(message);
  }
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  let response: Response;
  try {
    response = await fetch(`${engineBaseUrl()}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError(`engine unreachable: ${String(err)}`, null);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const parsed = (await response.json()) as { detail?: string };
      if (parsed.detail) detail = parsed.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(`${response.status}: ${detail}`, response.status);
  }
  return (await response.json()) as T;
}

export function createSession(seed?: number): Promise<{ session_id: string }> {
  return request("POST", "/v1/sessions", seed === undefined ? {} : { seed });
}

export function sendTurn(sessionId: string, text: string): Promise<TurnResponse> {
  return request("POST", `/v1/sessions/${sessionId}/turns`, { text });
}

export function getSession(sessionId: string): Promise<SessionSummary> {
  return request("GET", `/v1/sessions/${sessionId}`);
}

export function endSession(sessionId: string): Promise<{ ended: boolean }> {
  return request("DELETE", `/v1/sessions/${sessionId}`);
}
