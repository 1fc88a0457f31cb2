import { describe, expect, it } from "vitest";

import { buildHud, DEFAULT_BUDGET_US } from "../src/hud.js";
import {
  METRICS_WINDOW,
  MetricsReport,
  initialState,
  onConnected,
  onDisconnected,
  onMetrics,
  onResult,
  setToggleIntent,
} from "../src/state.js";
import { Metrics, ResultMsg } from "../src/protocol.js";

function metricsMsg(report: Partial<MetricsReport>): Metrics {
  return {
    kind: "metrics",
    reportJson: new TextEncoder().encode(JSON.stringify(report)),
  };
}

function sampleReport(totalP50 = 5000): MetricsReport {
  return {
    frames: 30,
    dropped: 2,
    bypass_rate: 0.9,
    reuse_rate: 0.95,
    stage_us: {
      gate2d: { p50: 300, p95: 500, p99: 600 },
      compose: { p50: 3000, p95: 4000, p99: 4100 },
    },
    total_us: { p50: totalP50, p95: 8000, p99: 9000 },
    gating: { frame_passer: true, early_stop: false },
    budget_us: 33333,
  };
}

describe("viewer state machine", () => {
  it("reflects only server-acknowledged toggle state", () => {
    let s = onConnected(initialState(), 4);
    s = setToggleIntent(s, { framePasser: false, earlyStop: false });
    expect(s.ackedToggles).toBeNull(); // nothing confirmed yet
    s = onMetrics(s, metricsMsg(sampleReport()));
    expect(s.ackedToggles).toEqual({ framePasser: true, earlyStop: false });
    expect(s.intendedToggles).toEqual({ framePasser: false, earlyStop: false });
  });

  it("keeps toggle intent through a disconnect", () => {
    let s = onConnected(initialState(), 4);
    s = setToggleIntent(s, { framePasser: false, earlyStop: true });
    s = onDisconnected(s);
    expect(s.status).toBe("reconnecting");
    expect(s.intendedToggles).toEqual({ framePasser: false, earlyStop: true });
    expect(s.ackedToggles).toBeNull();
  });

  it("caps the metrics window at 120 reports", () => {
    let s = onConnected(initialState(), 1);
    for (let i = 0; i < METRICS_WINDOW + 30; i++) {
      s = onMetrics(s, metricsMsg(sampleReport(1000 + i)));
    }
    expect(s.metricsWindow).toHaveLength(METRICS_WINDOW);
    expect(s.metricsWindow[0].total_us).toEqual({ p50: 1030, p95: 8000, p99: 9000 });
  });

  it("prefers the composed raster and tracks no_target", () => {
    const msg: ResultMsg = {
      kind: "result",
      frameId: 7,
      flags: 0x08,
      width: 2,
      height: 1,
      pose: null,
      placement: null,
      timings: {},
      inpaintedRgb: new Uint8Array([1, 1, 1, 2, 2, 2]),
      composedRgb: null,
    };
    let s = onResult(onConnected(initialState(), 1), msg);
    expect(s.noTarget).toBe(true);
    expect(s.lastFrame?.rgb).toEqual(msg.inpaintedRgb);
    const withComposed: ResultMsg = {
      ...msg,
      flags: 0,
      composedRgb: new Uint8Array([9, 9, 9, 8, 8, 8]),
    };
    s = onResult(s, withComposed);
    expect(s.noTarget).toBe(false);
    expect(s.lastFrame?.rgb).toEqual(withComposed.composedRgb);
  });
});

describe("latency HUD", () => {
  it("shows a placeholder with no NaNs when the window is empty", () => {
    const hud = buildHud([]);
    expect(hud.empty).toBe(true);
    expect(hud.budgetUs).toBe(DEFAULT_BUDGET_US);
    expect(hud.totalSeries).toEqual([]);
    expect(hud.stageBars).toEqual([]);
  });

  it("fixes the budget line at the session budget", () => {
    const hud = buildHud([sampleReport()]);
    expect(hud.budgetUs).toBe(33333);
    expect(hud.stageBars.map((b) => b.stage)).toEqual(["gate2d", "compose"]);
    expect(hud.rates).toEqual({ bypass: 0.9, reuse: 0.95, drop: 2 / 32 });
    expect(hud.overBudget).toBe(false);
  });

  it("tracks a sparkline across the window and flags budget misses", () => {
    const hud = buildHud([sampleReport(5000), sampleReport(40000)]);
    expect(hud.totalSeries).toEqual([5000, 40000]);
    expect(hud.overBudget).toBe(true);
  });

  it("renders a single report's values", () => {
    const hud = buildHud([sampleReport(1234)]);
    expect(hud.totalSeries).toEqual([1234]);
    expect(hud.stageBars[0]).toEqual({ stage: "gate2d", p50: 300, p95: 500 });
  });
});
