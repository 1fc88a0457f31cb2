/** Latency HUD model: pure computation from the metrics window. */

import { MetricsReport } from "./state.js";

export const DEFAULT_BUDGET_US = 33333;

export interface StageBar {
  stage: string;
  p50: number;
  p95: number;
}

export interface HudModel {
  empty: boolean;
  budgetUs: number;
  stageBars: StageBar[];
  /** one p50 total per report, oldest first — the sparkline series */
  totalSeries: number[];
  rates: { bypass: number; reuse: number; drop: number } | null;
  overBudget: boolean;
}

const STAGE_DISPLAY_ORDER = [
  "gate2d", "segment", "inpaint", "gate3d", "pose_coarse", "pose_refine",
  "compose", "transport_up", "transport_down",
];

export function buildHud(window: MetricsReport[], budgetUs?: number): HudModel {
  const latest = window.length ? window[window.length - 1] : null;
  const budget = budgetUs ?? latest?.budget_us ?? DEFAULT_BUDGET_US;
  if (!latest) {
    return {
      empty: true,
      budgetUs: budget,
      stageBars: [],
      totalSeries: [],
      rates: null,
      overBudget: false,
    };
  }
  const stageBars: StageBar[] = [];
  for (const stage of STAGE_DISPLAY_ORDER) {
    const entry = latest.stage_us?.[stage];
    if (entry && Number.isFinite(entry.p50) && Number.isFinite(entry.p95)) {
      stageBars.push({ stage, p50: entry.p50, p95: entry.p95 });
    }
  }
  const totalSeries = window
    .map((r) => (r.total_us && "p50" in r.total_us ? (r.total_us as { p50: number }).p50 : NaN))
    .filter((v) => Number.isFinite(v));
  const dropRate =
    latest.frames + latest.dropped > 0 ? latest.dropped / (latest.frames + latest.dropped) : 0;
  const lastTotal = totalSeries.length ? totalSeries[totalSeries.length - 1] : 0;
  return {
    empty: false,
    budgetUs: budget,
    stageBars,
    totalSeries,
    rates: { bypass: latest.bypass_rate, reuse: latest.reuse_rate, drop: dropRate },
    overBudget: lastTotal > budget,
  };
}
