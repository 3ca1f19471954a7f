// Pure SVG builders: every chart is a string, so rendering is testable
// without a DOM and resizing is a re-render of cached payloads.

import type { BandsPayload, RegionPayload, SidePayload } from "./api.js";

export interface Scale {
  (x: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  return (x: number) => (span === 0 ? (r0 + r1) / 2 : r0 + ((x - d0) / span) * (r1 - r0));
}

export function polylinePath(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
  return xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${sx(x).toFixed(2)},${sy(ys[i]).toFixed(2)}`)
    .join("");
}

export function bandAreaPath(xs: number[], lower: number[], upper: number[], sx: Scale, sy: Scale): string {
  const up = polylinePath(xs, upper, sx, sy);
  const down = xs
    .map((x, i) => `L${sx(x).toFixed(2)},${sy(lower[i]).toFixed(2)}`)
    .reverse()
    .join("");
  return `${up}${down}Z`;
}

const FMT = new Intl.NumberFormat("en-US", { maximumFractionDigits: 1 });

function axisLabels(lo: number, hi: number, n: number): number[] {
  const out: number[] = [];
  for (let i = 0; i < n; i++) out.push(lo + ((hi - lo) * i) / (n - 1));
  return out;
}

export interface ChartSize {
  width: number;
  height: number;
}

const MARGIN = { left: 52, right: 14, top: 26, bottom: 30 };

function frame(size: ChartSize, title: string, inner: string, badge = ""): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${size.width} ${size.height}" ` +
    `width="100%" height="100%" role="img">` +
    `<text class="chart-title" x="${MARGIN.left}" y="16">${title}</text>` +
    badge +
    inner +
    `</svg>`
  );
}

function valueRange(values: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of values) {
    for (const v of arr) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  const pad = (hi - lo || 1) * 0.06;
  return [lo - pad, hi + pad];
}

function gridPoints(grid: { lo: number; hi: number; n: number }): number[] {
  return axisLabels(grid.lo, grid.hi, grid.n);
}

function axes(
  sx: Scale,
  sy: Scale,
  qLo: number,
  qHi: number,
  vLo: number,
  vHi: number,
  size: ChartSize,
): string {
  const ticksX = axisLabels(qLo, qHi, 5);
  const ticksY = axisLabels(vLo, vHi, 4);
  const xAxis = ticksX
    .map(
      (q) =>
        `<text class="tick" x="${sx(q).toFixed(2)}" y="${size.height - 10}" text-anchor="middle">` +
        `${FMT.format(q / 1000)}k</text>`,
    )
    .join("");
  const yAxis = ticksY
    .map(
      (v) =>
        `<text class="tick" x="${MARGIN.left - 6}" y="${(sy(v) + 3).toFixed(2)}" text-anchor="end">` +
        `${FMT.format(v)}</text>`,
    )
    .join("");
  return xAxis + yAxis;
}

export function bandChart(
  payload: BandsPayload,
  side: "offer" | "demand",
  size: ChartSize = { width: 560, height: 260 },
): string {
  const data: SidePayload = payload[side];
  const qs = gridPoints(payload.grid);
  const series = [data.lower, data.upper, data.center];
  if (data.observed) series.push(data.observed);
  const [vLo, vHi] = valueRange(series);
  const sx = linearScale(payload.grid.lo, payload.grid.hi, MARGIN.left, size.width - MARGIN.right);
  const sy = linearScale(vLo, vHi, size.height - MARGIN.bottom, MARGIN.top);
  const band = `<path class="band-area" d="${bandAreaPath(qs, data.lower, data.upper, sx, sy)}"/>`;
  const center = `<path class="center-line" d="${polylinePath(qs, data.center, sx, sy)}" fill="none"/>`;
  const observed = data.observed
    ? `<path class="observed-line" d="${polylinePath(qs, data.observed, sx, sy)}" fill="none"/>`
    : "";
  const badge =
    payload.contained === null
      ? ""
      : `<text class="badge ${payload.contained ? "badge-in" : "badge-out"}" ` +
        `x="${size.width - MARGIN.right}" y="16" text-anchor="end">` +
        `${payload.contained ? "pair inside band" : "pair outside band"}</text>`;
  const title = `${side} curve, level ${(1 - payload.alpha).toFixed(2)} (k=${payload.k.toFixed(3)})`;
  return frame(
    size,
    title,
    band + center + observed + axes(sx, sy, payload.grid.lo, payload.grid.hi, vLo, vHi, size),
    badge,
  );
}

export function regionChart(
  base: RegionPayload,
  modified: RegionPayload | null,
  size: ChartSize = { width: 560, height: 300 },
): string {
  if (base.empty && (!modified || modified.empty)) {
    return frame(
      size,
      "clearing-point region",
      `<text class="notice" x="${size.width / 2}" y="${size.height / 2}" text-anchor="middle">` +
        `no overlap between the offer and demand bands</text>`,
    );
  }
  const quantSets = [base.quantities];
  const valueSets = [base.lower, base.upper];
  if (modified && !modified.empty) {
    quantSets.push(modified.quantities);
    valueSets.push(modified.lower, modified.upper);
  }
  if (base.observed) {
    quantSets.push([base.observed.Q]);
    valueSets.push([base.observed.P]);
  }
  let qLo = Infinity;
  let qHi = -Infinity;
  for (const qs of quantSets) {
    for (const q of qs) {
      if (q < qLo) qLo = q;
      if (q > qHi) qHi = q;
    }
  }
  const qPad = (qHi - qLo || 1) * 0.08;
  qLo -= qPad;
  qHi += qPad;
  const [vLo, vHi] = valueRange(valueSets);
  const sx = linearScale(qLo, qHi, MARGIN.left, size.width - MARGIN.right);
  const sy = linearScale(vLo, vHi, size.height - MARGIN.bottom, MARGIN.top);
  let inner = "";
  if (modified && !modified.empty) {
    inner +=
      `<path class="region-modified" ` +
      `d="${bandAreaPath(modified.quantities, modified.lower, modified.upper, sx, sy)}"/>`;
  }
  if (!base.empty) {
    inner +=
      `<path class="region-base${modified ? " region-outline" : ""}" ` +
      `d="${bandAreaPath(base.quantities, base.lower, base.upper, sx, sy)}"/>`;
  }
  if (base.observed) {
    const cls = base.observed.inside ? "marker-in" : "marker-out";
    const cx = sx(base.observed.Q).toFixed(2);
    const cy = sy(base.observed.P).toFixed(2);
    inner +=
      `<g class="observed-marker ${cls}">` +
      `<line x1="${cx}" y1="${Number(cy) - 7}" x2="${cx}" y2="${Number(cy) + 7}"/>` +
      `<line x1="${Number(cx) - 7}" y1="${cy}" x2="${Number(cx) + 7}" y2="${cy}"/>` +
      `</g>`;
  }
  const legend =
    `<g class="legend">` +
    `<text class="legend-base" x="${MARGIN.left}" y="${size.height - 10}">base region</text>` +
    (modified && !modified.empty
      ? `<text class="legend-modified" x="${MARGIN.left + 110}" y="${size.height - 10}">with extra order</text>`
      : "") +
    `</g>`;
  return frame(size, "clearing-point region", inner + legend + axes(sx, sy, qLo, qHi, vLo, vHi, size));
}
