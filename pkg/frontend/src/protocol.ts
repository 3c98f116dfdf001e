/**
 * Wire protocol: one JSON object per line in each direction.
 *
 * Request:  {op, payload, request_id}
 * Response: {request_id, ok, result} or {request_id, ok: false, error}
 *
 * Every request line yields exactly one response line; responses may be
 * emitted in any order (request_id correlates). A malformed line produces an
 * error response and the stream keeps going.
 */

import * as mock from "./mock.js";

export type Mode = "real" | "mock";

export interface BridgeResponse {
  request_id: string | null;
  ok: boolean;
  result?: string | number;
  error?: string;
}

const OPS: Record<string, (payload: string) => string | number> = {
  text_to_amr: mock.textToAmr,
  amr_to_text: mock.amrToText,
  gruen: mock.gruen,
};

export function handleLine(line: string, mode: Mode): BridgeResponse | null {
  if (!line.trim()) return null;
  let request: unknown;
  try {
    request = JSON.parse(line);
  } catch (e) {
    return { request_id: null, ok: false, error: `malformed request line: ${(e as Error).message}` };
  }
  if (typeof request !== "object" || request === null) {
    return { request_id: null, ok: false, error: "request must be a JSON object" };
  }
  const { op, payload, request_id } = request as Record<string, unknown>;
  const id = typeof request_id === "string" ? request_id : null;
  if (typeof op !== "string" || !(op in OPS)) {
    return { request_id: id, ok: false, error: `unknown op: ${String(op)}` };
  }
  if (typeof payload !== "string") {
    return { request_id: id, ok: false, error: "payload must be a string" };
  }
  if (mode === "real") {
    // No neural backends ship with this build; refuse per-request instead of
    // crashing the stream.
    return { request_id: id, ok: false, error: "real mode unavailable: no model backend loaded" };
  }
  try {
    return { request_id: id, ok: true, result: OPS[op](payload) };
  } catch (e) {
    return { request_id: id, ok: false, error: (e as Error).message };
  }
}
