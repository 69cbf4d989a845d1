// End-to-end round-trip against a live power service. Skipped unless
// SWDPWR_API points at a running `swdpwr serve` instance, e.g.
//   swdpwr serve --bind 127.0.0.1:8750 &
//   SWDPWR_API=http://127.0.0.1:8750 npm test

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { renderChart, toChartPoints, type ChartSeries } from "../src/chart.js";
import { displayPower } from "../src/format.js";
import { buildPowerRequest, defaultForm, fieldForErrorCode } from "../src/state.js";
import type { ScenarioForm } from "../src/types.js";

const API = process.env.SWDPWR_API;

function criterionOneForm(): ScenarioForm {
  return {
    ...defaultForm(),
    K: 50,
    meanresponse_start: 0.2,
    meanresponse_end0: 0.25,
    meanresponse_end1: 0.38,
    alpha0: 0.01,
    alpha1: 0.01,
  };
}

describe.skipIf(!API)("live service round-trip", () => {
  const client = new ApiClient(API ?? "");

  it("criterion-1 inputs display 0.899", async () => {
    const report = await client.power(buildPowerRequest(criterionOneForm()));
    expect(displayPower(report.power)).toBe("0.899");
    expect(report.total_sample_size).toBe(1800);
  }, 60_000);

  it("sweep chart renders the identity/no-time-effects configuration", async () => {
    const base: ScenarioForm = {
      ...defaultForm(),
      K: 40,
      design: [
        { count: 3, allocation: [0, 1, 1] },
        { count: 3, allocation: [0, 0, 1] },
      ],
      meanresponse_start: 0.05,
      meanresponse_end0: 0.05,
      alpha0: 0.02,
      alpha1: 0.02,
    };
    const grid = [0.02, 0.04, 0.06, 0.08, 0.1, 0.12];
    const series: ChartSeries[] = [];
    for (const model of ["conditional", "marginal"] as const) {
      const points = await client.sweep(
        buildPowerRequest({ ...base, model }),
        "risk_difference",
        grid,
      );
      const pts = toChartPoints(points);
      const powers = pts.map((p) => p.power);
      expect(powers.every((p) => p !== null)).toBe(true);
      for (let i = 1; i < powers.length; i++) {
        expect(powers[i]!).toBeGreaterThan(powers[i - 1]!);
      }
      series.push({ label: model, color: "#000", points: pts });
    }
    const svg = renderChart(series);
    expect(svg).toContain("<polyline");
    expect(svg).toContain('class="target"');
    expect(svg).toContain('data-series="conditional"');
    expect(svg).toContain('data-series="marginal"');
  }, 120_000);

  it("a 422 surfaces the service's error text at the offending field", async () => {
    const err = await client
      .power(buildPowerRequest({ ...criterionOneForm(), alpha0: 1.1 }))
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.code).toBe("E-ICC-RANGE");
    expect(err.message).toContain("must be between 0 and 1");
    expect(fieldForErrorCode(err.code)).toBe("alpha0");
  }, 60_000);
});
