import type { BandsPayload, RegionPayload, WhatIfPayload } from "../src/api.js";

export function bandsFixture(overrides: Partial<BandsPayload> = {}): BandsPayload {
  const n = 5;
  const qs = [0, 1, 2, 3, 4];
  const center = qs.map((q) => 10 + q);
  const side = (width: number) => ({
    center,
    lower: center.map((v) => v - width),
    upper: center.map((v) => v + width),
    observed: center.map((v) => v + 0.1),
  });
  return {
    day: "2020-01-29",
    alpha: 0.25,
    k: 0.3,
    grid: { lo: 0, hi: 4, n },
    contained: true,
    offer: side(1.0),
    demand: side(1.2),
    ...overrides,
  };
}

export function regionFixture(overrides: Partial<RegionPayload> = {}): RegionPayload {
  return {
    day: "2020-01-29",
    alpha: 0.25,
    empty: false,
    quantities: [1, 2, 3],
    lower: [9, 10, 11],
    upper: [12, 13, 14],
    observed: { Q: 2, P: 11.5, inside: true },
    ...overrides,
  };
}

export function whatIfFixture(overrides: Partial<WhatIfPayload> = {}): WhatIfPayload {
  return {
    base: regionFixture(),
    modified: regionFixture({ quantities: [1, 2, 3, 4], lower: [9, 10, 11, 11], upper: [12, 13, 14, 14] }),
    order: { side: "demand", price: 12, qty: 20000 },
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
