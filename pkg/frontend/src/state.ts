/**
 * Viewer state: pure transitions, no sockets or DOM.
 *
 * Displayed toggle state is pessimistic — it reflects the gating flags the
 * server last reported in a Metrics message, never optimistic local state.
 * The user's intent is tracked separately so it survives reconnects.
 */

import { FLAG_NO_TARGET, Metrics, ResultMsg } from "./protocol.js";

export const METRICS_WINDOW = 120;

export type ConnectionStatus = "connecting" | "connected" | "reconnecting" | "closed";

export interface Toggles {
  framePasser: boolean;
  earlyStop: boolean;
}

export interface MetricsReport {
  frames: number;
  dropped: number;
  bypass_rate: number;
  reuse_rate: number;
  stage_us: Record<string, { p50: number; p95: number; p99: number }>;
  total_us: { p50: number; p95: number; p99: number } | Record<string, never>;
  gating?: { frame_passer: boolean; early_stop: boolean };
  budget_us?: number;
  session_id?: number;
  window_frames?: number;
}

export interface FrameImage {
  width: number;
  height: number;
  rgb: Uint8Array;
}

export interface ViewerState {
  status: ConnectionStatus;
  sessionId: number | null;
  ackedToggles: Toggles | null;
  intendedToggles: Toggles;
  selectedAsset: string;
  metricsWindow: MetricsReport[];
  lastFrame: FrameImage | null;
  lastFrameId: number | null;
  noTarget: boolean;
  resultCount: number;
  decodeErrors: number;
  lastError: string | null;
}

export function initialState(): ViewerState {
  return {
    status: "connecting",
    sessionId: null,
    ackedToggles: null,
    intendedToggles: { framePasser: true, earlyStop: true },
    selectedAsset: "box",
    metricsWindow: [],
    lastFrame: null,
    lastFrameId: null,
    noTarget: true,
    resultCount: 0,
    decodeErrors: 0,
    lastError: null,
  };
}

export function onConnected(s: ViewerState, sessionId: number): ViewerState {
  return { ...s, status: "connected", sessionId, lastError: null };
}

export function onDisconnected(s: ViewerState): ViewerState {
  // toggle intent survives; acked state is unknown until the server speaks again
  return { ...s, status: "reconnecting", sessionId: null, ackedToggles: null };
}

export function onClosed(s: ViewerState): ViewerState {
  return { ...s, status: "closed" };
}

export function onResult(s: ViewerState, msg: ResultMsg): ViewerState {
  const rgb = msg.composedRgb ?? msg.inpaintedRgb;
  return {
    ...s,
    lastFrame: { width: msg.width, height: msg.height, rgb },
    lastFrameId: msg.frameId,
    noTarget: (msg.flags & FLAG_NO_TARGET) !== 0,
    resultCount: s.resultCount + 1,
  };
}

export function onMetrics(s: ViewerState, msg: Metrics): ViewerState {
  let report: MetricsReport;
  try {
    report = JSON.parse(new TextDecoder().decode(msg.reportJson)) as MetricsReport;
  } catch {
    return { ...s, decodeErrors: s.decodeErrors + 1 };
  }
  const window = [...s.metricsWindow, report].slice(-METRICS_WINDOW);
  const acked = report.gating
    ? { framePasser: report.gating.frame_passer, earlyStop: report.gating.early_stop }
    : s.ackedToggles;
  return { ...s, metricsWindow: window, ackedToggles: acked };
}

export function onServerError(s: ViewerState, detail: string): ViewerState {
  return { ...s, lastError: detail };
}

export function onDecodeIssue(s: ViewerState, count: number): ViewerState {
  return count > 0 ? { ...s, decodeErrors: s.decodeErrors + count } : s;
}

export function setToggleIntent(s: ViewerState, toggles: Toggles): ViewerState {
  return { ...s, intendedToggles: toggles };
}

export function setAssetIntent(s: ViewerState, assetId: string): ViewerState {
  return { ...s, selectedAsset: assetId };
}
