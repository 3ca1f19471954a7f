import { describe, expect, it } from "vitest";

import {
  ApiError,
  BandServiceClient,
  bandsNested,
  isBandsPayload,
  isRegionPayload,
} from "../src/api.js";
import { bandsFixture, jsonResponse, regionFixture, whatIfFixture } from "./fixtures.js";

describe("payload guards", () => {
  it("accepts well-formed bands payloads", () => {
    expect(isBandsPayload(bandsFixture())).toBe(true);
  });

  it("rejects mismatched array lengths", () => {
    const bad = bandsFixture();
    (bad.offer.lower as number[]).pop();
    expect(isBandsPayload(bad)).toBe(false);
  });

  it("rejects non-finite numbers", () => {
    const bad = bandsFixture();
    (bad.offer.center as number[])[0] = Number.NaN;
    expect(isBandsPayload(bad)).toBe(false);
  });

  it("accepts regions with and without an observed point", () => {
    expect(isRegionPayload(regionFixture())).toBe(true);
    expect(isRegionPayload(regionFixture({ observed: null }))).toBe(true);
  });

  it("rejects regions with missing columns", () => {
    const bad = regionFixture() as unknown as Record<string, unknown>;
    delete bad.upper;
    expect(isRegionPayload(bad)).toBe(false);
  });
});

describe("bandsNested", () => {
  it("holds when the wide band contains the narrow one", () => {
    const wide = bandsFixture();
    const narrow = bandsFixture({ alpha: 0.5 });
    narrow.offer.lower = narrow.offer.lower.map((v) => v + 0.2);
    narrow.offer.upper = narrow.offer.upper.map((v) => v - 0.2);
    narrow.demand.lower = narrow.demand.lower.map((v) => v + 0.2);
    narrow.demand.upper = narrow.demand.upper.map((v) => v - 0.2);
    expect(bandsNested(wide, narrow)).toBe(true);
  });

  it("fails when the narrow band pokes out", () => {
    const wide = bandsFixture();
    const narrow = bandsFixture({ alpha: 0.5 });
    narrow.demand.upper = narrow.demand.upper.map((v) => v + 5);
    expect(bandsNested(wide, narrow)).toBe(false);
  });
});

describe("BandServiceClient", () => {
  it("fetches and validates bands", async () => {
    const calls: string[] = [];
    const client = new BandServiceClient("http://api", async (url) => {
      calls.push(url);
      return jsonResponse(bandsFixture());
    });
    const payload = await client.bands("2020-01-29", "0.25");
    expect(payload.day).toBe("2020-01-29");
    expect(calls[0]).toBe("http://api/bands?day=2020-01-29&alpha=0.25");
  });

  it("surfaces error details with status codes", async () => {
    const client = new BandServiceClient("", async () =>
      jsonResponse({ detail: "alpha=0.001 outside [b/(l+1), 1)" }, 422),
    );
    await expect(client.bands("d", "0.001")).rejects.toThrowError(ApiError);
    await expect(client.bands("d", "0.001")).rejects.toThrow(/outside/);
  });

  it("rejects malformed payloads", async () => {
    const client = new BandServiceClient("", async () => jsonResponse({ nope: 1 }));
    await expect(client.bands("d", "0.25")).rejects.toThrow(/malformed/);
  });

  it("posts what-if orders with the draft body", async () => {
    let body: unknown = null;
    const client = new BandServiceClient("", async (_url, init) => {
      body = JSON.parse(String(init?.body));
      return jsonResponse(whatIfFixture());
    });
    const out = await client.whatIf("2020-01-29", "0.25", "demand", 12, 20000);
    expect(out.modified.quantities.length).toBeGreaterThan(0);
    expect(body).toEqual({ day: "2020-01-29", alpha: "0.25", side: "demand", price: 12, qty: 20000 });
  });

  it("maps network failures to status 0", async () => {
    const client = new BandServiceClient("", async () => {
      throw new Error("connection refused");
    });
    await expect(client.days()).rejects.toMatchObject({ status: 0 });
  });
});
