import { describe, expect, it } from "vitest";

import {
  RequestTracker,
  initialState,
  matchesSelection,
  selectionChanged,
  validateDraft,
  withBands,
  withError,
  withRegion,
  withWhatIf,
} from "../src/state.js";
import { bandsFixture, regionFixture, whatIfFixture } from "./fixtures.js";


function selected() {
  return selectionChanged(initialState(), "2020-01-29", "0.25");
}

describe("selection and payload matching", () => {
  it("changing the selection drops every fetched payload", () => {
    let state = selected();
    state = withBands(state, bandsFixture());
    state = withRegion(state, regionFixture());
    state = withWhatIf(state, whatIfFixture());
    const next = selectionChanged(state, "2020-01-30", "0.5");
    expect(next.bands).toBeNull();
    expect(next.region).toBeNull();
    expect(next.whatIf).toBeNull();
  });

  it("payloads for another day or level are never rendered", () => {
    const state = selected();
    const stale = bandsFixture({ day: "2020-01-28" });
    expect(matchesSelection(state, stale)).toBe(false);
    expect(withBands(state, stale).bands).toBeNull();
    const wrongAlpha = regionFixture({ alpha: 0.5 });
    expect(withRegion(state, wrongAlpha).region).toBeNull();
  });

  it("matching payloads are stored", () => {
    const state = withBands(selected(), bandsFixture());
    expect(state.bands?.day).toBe("2020-01-29");
  });

  it("what-if results follow last-write-wins", () => {
    let state = selected();
    state = withWhatIf(state, whatIfFixture());
    const second = whatIfFixture();
    second.modified = regionFixture({ quantities: [9], lower: [1], upper: [2] });
    state = withWhatIf(state, second);
    expect(state.whatIf?.modified.quantities).toEqual([9]);
  });

  it("errors keep the prior view intact", () => {
    let state = withBands(selected(), bandsFixture());
    state = withError(state, "boom");
    expect(state.error).toBe("boom");
    expect(state.bands).not.toBeNull();
  });
});

describe("what-if draft validation", () => {
  it("blocks nonpositive quantities client-side", () => {
    expect(validateDraft({ side: "demand", price: 12, qty: 0 })).toMatch(/quantity/);
    expect(validateDraft({ side: "demand", price: 12, qty: -5 })).toMatch(/quantity/);
  });

  it("blocks negative or non-numeric prices", () => {
    expect(validateDraft({ side: "demand", price: -1, qty: 10 })).toMatch(/price/);
    expect(validateDraft({ side: "demand", price: Number.NaN, qty: 10 })).toMatch(/price/);
  });

  it("accepts the worked example order", () => {
    expect(validateDraft({ side: "demand", price: 12, qty: 20000 })).toBeNull();
  });
});

describe("RequestTracker", () => {
  it("discards stale responses per panel", () => {
    const tracker = new RequestTracker();
    const first = tracker.next("bands");
    const second = tracker.next("bands");
    expect(tracker.isCurrent("bands", first)).toBe(false);
    expect(tracker.isCurrent("bands", second)).toBe(true);
  });

  it("panels are independent", () => {
    const tracker = new RequestTracker();
    const bandsSeq = tracker.next("bands");
    tracker.next("region");
    expect(tracker.isCurrent("bands", bandsSeq)).toBe(true);
  });
});
