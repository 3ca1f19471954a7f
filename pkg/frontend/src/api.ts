// Typed client for the band service. All payload shapes are validated at the
// boundary so charts never see malformed data.

export interface SidePayload {
  center: number[];
  lower: number[];
  upper: number[];
  observed?: number[];
}

export interface BandsPayload {
  day: string;
  alpha: number;
  k: number;
  grid: { lo: number; hi: number; n: number };
  contained: boolean | null;
  offer: SidePayload;
  demand: SidePayload;
}

export interface ObservedPoint {
  Q: number;
  P: number;
  inside: boolean;
}

export interface RegionPayload {
  day: string;
  alpha: number;
  empty: boolean;
  quantities: number[];
  lower: number[];
  upper: number[];
  observed: ObservedPoint | null;
}

export interface WhatIfPayload {
  base: RegionPayload;
  modified: RegionPayload;
  order: { side: string; price: number; qty: number };
}

export interface DaysPayload {
  days: string[];
  alphas: string[];
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

const isNumberArray = (x: unknown): x is number[] =>
  Array.isArray(x) && x.every((v) => typeof v === "number" && Number.isFinite(v));

function isSidePayload(x: unknown): x is SidePayload {
  if (typeof x !== "object" || x === null) return false;
  const side = x as Record<string, unknown>;
  if (!isNumberArray(side.center) || !isNumberArray(side.lower) || !isNumberArray(side.upper)) {
    return false;
  }
  const n = (side.center as number[]).length;
  if ((side.lower as number[]).length !== n || (side.upper as number[]).length !== n) return false;
  if (side.observed !== undefined && !isNumberArray(side.observed)) return false;
  return true;
}

export function isBandsPayload(x: unknown): x is BandsPayload {
  if (typeof x !== "object" || x === null) return false;
  const p = x as Record<string, unknown>;
  const grid = p.grid as Record<string, unknown> | undefined;
  return (
    typeof p.day === "string" &&
    typeof p.alpha === "number" &&
    typeof p.k === "number" &&
    grid !== undefined &&
    typeof grid.n === "number" &&
    isSidePayload(p.offer) &&
    isSidePayload(p.demand)
  );
}

export function isRegionPayload(x: unknown): x is RegionPayload {
  if (typeof x !== "object" || x === null) return false;
  const p = x as Record<string, unknown>;
  if (
    typeof p.day !== "string" ||
    typeof p.alpha !== "number" ||
    typeof p.empty !== "boolean" ||
    !isNumberArray(p.quantities) ||
    !isNumberArray(p.lower) ||
    !isNumberArray(p.upper)
  ) {
    return false;
  }
  const n = (p.quantities as number[]).length;
  if ((p.lower as number[]).length !== n || (p.upper as number[]).length !== n) return false;
  if (p.observed === null) return true;
  const obs = p.observed as Record<string, unknown> | undefined;
  return (
    obs !== undefined &&
    typeof obs.Q === "number" &&
    typeof obs.P === "number" &&
    typeof obs.inside === "boolean"
  );
}

export function isWhatIfPayload(x: unknown): x is WhatIfPayload {
  if (typeof x !== "object" || x === null) return false;
  const p = x as Record<string, unknown>;
  return isRegionPayload(p.base) && isRegionPayload(p.modified);
}

// The alpha=0.25 band must contain the alpha=0.5 band pointwise; used as a
// consistency assertion whenever both confidence levels are cached.
export function bandsNested(wide: BandsPayload, narrow: BandsPayload): boolean {
  for (const side of ["offer", "demand"] as const) {
    const w = wide[side];
    const nr = narrow[side];
    if (w.lower.length !== nr.lower.length) return false;
    for (let i = 0; i < w.lower.length; i++) {
      if (w.lower[i] > nr.lower[i] || nr.upper[i] > w.upper[i]) return false;
    }
  }
  return true;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class BandServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await res.json();
    } catch {
      // non-JSON error body; fall through with null
    }
    if (!res.ok) {
      const detail =
        body && typeof body === "object" && "detail" in (body as object)
          ? String((body as { detail: unknown }).detail)
          : `HTTP ${res.status}`;
      throw new ApiError(res.status, detail);
    }
    return body;
  }

  async days(): Promise<DaysPayload> {
    const body = (await this.request("/days")) as DaysPayload;
    if (!Array.isArray(body.days) || !Array.isArray(body.alphas)) {
      throw new ApiError(0, "malformed /days payload");
    }
    return body;
  }

  async bands(day: string, alpha: string): Promise<BandsPayload> {
    const body = await this.request(
      `/bands?day=${encodeURIComponent(day)}&alpha=${encodeURIComponent(alpha)}`,
    );
    if (!isBandsPayload(body)) throw new ApiError(0, "malformed /bands payload");
    return body;
  }

  async region(day: string, alpha: string): Promise<RegionPayload> {
    const body = await this.request(
      `/region?day=${encodeURIComponent(day)}&alpha=${encodeURIComponent(alpha)}`,
    );
    if (!isRegionPayload(body)) throw new ApiError(0, "malformed /region payload");
    return body;
  }

  async whatIf(
    day: string,
    alpha: string,
    side: "offer" | "demand",
    price: number,
    qty: number,
  ): Promise<WhatIfPayload> {
    const body = await this.request("/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ day, alpha, side, price, qty }),
    });
    if (!isWhatIfPayload(body)) throw new ApiError(0, "malformed /whatif payload");
    return body;
  }
}
