// View state and the staleness rules: one in-flight request per panel, and a
// payload is rendered only when it matches the current (day, alpha) selection.

import type { BandsPayload, RegionPayload, WhatIfPayload } from "./api.js";

export type Alpha = "0.25" | "0.5";

export interface WhatIfDraft {
  side: "offer" | "demand";
  price: number;
  qty: number;
}

export interface ViewState {
  days: string[];
  day: string | null;
  alpha: Alpha;
  bands: BandsPayload | null;
  region: RegionPayload | null;
  whatIf: WhatIfPayload | null;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    days: [],
    day: null,
    alpha: "0.25",
    bands: null,
    region: null,
    whatIf: null,
    error: null,
  };
}

export function selectionChanged(state: ViewState, day: string, alpha: Alpha): ViewState {
  // A new selection invalidates every fetched payload, including what-if.
  return { ...state, day, alpha, bands: null, region: null, whatIf: null, error: null };
}

export function matchesSelection(
  state: ViewState,
  payload: { day: string; alpha: number },
): boolean {
  return state.day === payload.day && Number(state.alpha) === payload.alpha;
}

export function withBands(state: ViewState, payload: BandsPayload): ViewState {
  if (!matchesSelection(state, payload)) return state; // stale payload, drop
  return { ...state, bands: payload };
}

export function withRegion(state: ViewState, payload: RegionPayload): ViewState {
  if (!matchesSelection(state, payload)) return state;
  return { ...state, region: payload };
}

export function withWhatIf(state: ViewState, payload: WhatIfPayload): ViewState {
  if (!matchesSelection(state, payload.base)) return state;
  // Last write wins: any previous what-if result is replaced outright.
  return { ...state, whatIf: payload };
}

export function withError(state: ViewState, message: string): ViewState {
  // Keep whatever is currently rendered; only surface the message.
  return { ...state, error: message };
}

export function validateDraft(draft: WhatIfDraft): string | null {
  if (draft.side !== "offer" && draft.side !== "demand") return "side must be offer or demand";
  if (!Number.isFinite(draft.price) || draft.price < 0) return "price must be a number >= 0";
  if (!Number.isFinite(draft.qty) || draft.qty <= 0) return "quantity must be > 0";
  return null;
}

// Per-panel monotone sequence numbers; a response is applied only if no newer
// request for that panel has been issued since.
export class RequestTracker {
  private issued = new Map<string, number>();

  next(panel: string): number {
    const seq = (this.issued.get(panel) ?? 0) + 1;
    this.issued.set(panel, seq);
    return seq;
  }

  isCurrent(panel: string, seq: number): boolean {
    return this.issued.get(panel) === seq;
  }
}
