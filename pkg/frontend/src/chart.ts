// Sweep chart rendered as an SVG string: one polyline per model, gaps where
// a grid point failed validation, a horizontal 0.8 reference line, and
// clickable points carrying their parameter value in a data attribute.

import type { SweepResponsePoint } from "./types.js";
import { displayPower, fullPrecision } from "./format.js";

export interface ChartPoint {
  value: number;
  power: number | null;
  errorCode?: string;
  errorMessage?: string;
}

export interface ChartSeries {
  label: string;
  color: string;
  points: ChartPoint[];
}

export function toChartPoints(points: SweepResponsePoint[]): ChartPoint[] {
  return points.map((pt) =>
    pt.report
      ? { value: pt.value, power: pt.report.power }
      : {
          value: pt.value,
          power: null,
          errorCode: pt.error?.code,
          errorMessage: pt.error?.message,
        },
  );
}

export interface ChartScales {
  x(value: number): number;
  y(power: number): number;
  xMin: number;
  xMax: number;
}

export function chartScales(
  series: ChartSeries[],
  width: number,
  height: number,
  pad = 36,
): ChartScales {
  const values = series.flatMap((s) => s.points.map((p) => p.value));
  const xMin = Math.min(...values);
  const xMax = Math.max(...values);
  const span = xMax - xMin || 1;
  return {
    x: (v: number) => pad + ((v - xMin) / span) * (width - 2 * pad),
    y: (p: number) => height - pad - p * (height - 2 * pad),
    xMin,
    xMax,
  };
}

/** Split a series into polyline segments, breaking at failed points. */
export function segments(points: ChartPoint[]): ChartPoint[][] {
  const out: ChartPoint[][] = [];
  let current: ChartPoint[] = [];
  for (const pt of points) {
    if (pt.power === null) {
      if (current.length) out.push(current);
      current = [];
    } else {
      current.push(pt);
    }
  }
  if (current.length) out.push(current);
  return out;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function renderChart(
  series: ChartSeries[],
  width = 560,
  height = 300,
): string {
  if (series.every((s) => s.points.length === 0)) {
    return `<svg class="sweep-chart" width="${width}" height="${height}"></svg>`;
  }
  const sc = chartScales(series, width, height);
  const parts: string[] = [];
  parts.push(
    `<svg class="sweep-chart" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  // axes and the 0.8 target line
  parts.push(
    `<line x1="${sc.x(sc.xMin)}" y1="${sc.y(0)}" x2="${sc.x(sc.xMax)}" y2="${sc.y(0)}" stroke="#888"/>`,
    `<line x1="${sc.x(sc.xMin)}" y1="${sc.y(0)}" x2="${sc.x(sc.xMin)}" y2="${sc.y(1)}" stroke="#888"/>`,
    `<line class="target" x1="${sc.x(sc.xMin)}" y1="${sc.y(0.8)}" x2="${sc.x(sc.xMax)}" y2="${sc.y(0.8)}" stroke="#c33" stroke-dasharray="5,4"/>`,
    `<text x="${sc.x(sc.xMax) + 4}" y="${sc.y(0.8) + 4}" fill="#c33" font-size="11">0.8</text>`,
  );
  for (const s of series) {
    for (const seg of segments(s.points)) {
      if (seg.length > 1) {
        const pts = seg.map((p) => `${sc.x(p.value).toFixed(1)},${sc.y(p.power!).toFixed(1)}`);
        parts.push(
          `<polyline fill="none" stroke="${s.color}" stroke-width="2" points="${pts.join(" ")}"/>`,
        );
      }
    }
    for (const p of s.points) {
      if (p.power === null) {
        // failed point: hollow marker on the axis with the error as tooltip
        parts.push(
          `<circle class="gap" cx="${sc.x(p.value).toFixed(1)}" cy="${sc.y(0).toFixed(1)}" r="4" ` +
            `fill="none" stroke="${s.color}"><title>${esc(
              `${p.errorCode ?? "error"}: ${p.errorMessage ?? ""}`,
            )}</title></circle>`,
        );
      } else {
        parts.push(
          `<circle class="pt" data-value="${p.value}" data-series="${esc(s.label)}" ` +
            `cx="${sc.x(p.value).toFixed(1)}" cy="${sc.y(p.power).toFixed(1)}" r="4" fill="${s.color}">` +
            `<title>${esc(`${s.label}: power ${displayPower(p.power)} (${fullPrecision(p.power)})`)}</title></circle>`,
        );
      }
    }
  }
  let legendY = 16;
  for (const s of series) {
    parts.push(
      `<rect x="${width - 150}" y="${legendY - 9}" width="10" height="10" fill="${s.color}"/>`,
      `<text x="${width - 135}" y="${legendY}" font-size="12">${esc(s.label)}</text>`,
    );
    legendY += 16;
  }
  parts.push("</svg>");
  return parts.join("");
}
