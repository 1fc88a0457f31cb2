/** Browser wiring: canvas, toggles, click-to-select, latency HUD. */

import { ViewerClient, mapClickToFrame } from "./client.js";
import { buildHud } from "./hud.js";
import { ViewerState } from "./state.js";

function qs<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

function wsUrlFromQuery(): { url: string; attach?: number } {
  const params = new URLSearchParams(location.search);
  const hostport = params.get("ws") ?? "127.0.0.1:7402";
  const session = params.get("session");
  return {
    url: `ws://${hostport}/`,
    attach: session !== null ? Number(session) : undefined,
  };
}

function blit(canvas: HTMLCanvasElement, state: ViewerState): void {
  const frame = state.lastFrame;
  if (!frame) return;
  if (canvas.width !== frame.width || canvas.height !== frame.height) {
    canvas.width = frame.width;
    canvas.height = frame.height;
  }
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const img = ctx.createImageData(frame.width, frame.height);
  const rgba = img.data;
  const rgb = frame.rgb;
  for (let i = 0, j = 0; i < rgb.length; i += 3, j += 4) {
    rgba[j] = rgb[i];
    rgba[j + 1] = rgb[i + 1];
    rgba[j + 2] = rgb[i + 2];
    rgba[j + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

function drawHud(canvas: HTMLCanvasElement, state: ViewerState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, w, h);
  const hud = buildHud(state.metricsWindow);
  ctx.fillStyle = "#8fa";
  ctx.font = "11px monospace";
  if (hud.empty) {
    ctx.fillText("waiting for metrics…", 8, 16);
    return;
  }

  // stage bars, log-free linear scale against the budget
  const scale = (us: number) => Math.min(1, us / (hud.budgetUs * 1.2)) * (w - 140);
  let y = 16;
  for (const bar of hud.stageBars) {
    ctx.fillStyle = "#9ab";
    ctx.fillText(bar.stage, 6, y + 8);
    ctx.fillStyle = "#47e";
    ctx.fillRect(100, y, scale(bar.p95), 9);
    ctx.fillStyle = "#8cf";
    ctx.fillRect(100, y, scale(bar.p50), 9);
    y += 13;
  }
  // budget line across the bar area
  const budgetX = 100 + scale(hud.budgetUs);
  ctx.strokeStyle = "#f55";
  ctx.beginPath();
  ctx.moveTo(budgetX, 4);
  ctx.lineTo(budgetX, y);
  ctx.stroke();
  ctx.fillStyle = "#f88";
  ctx.fillText(`${(hud.budgetUs / 1000).toFixed(1)}ms budget`, budgetX + 4, 12);

  // total sparkline
  const sparkTop = y + 10;
  const sparkH = Math.max(20, h - sparkTop - 18);
  const series = hud.totalSeries;
  ctx.strokeStyle = "#5d5";
  ctx.beginPath();
  series.forEach((v, i) => {
    const x = 6 + (i / Math.max(1, series.length - 1)) * (w - 12);
    const yy = sparkTop + sparkH * (1 - Math.min(1, v / (hud.budgetUs * 1.2)));
    if (i === 0) ctx.moveTo(x, yy);
    else ctx.lineTo(x, yy);
  });
  ctx.stroke();
  const budgetY = sparkTop + sparkH * (1 - 1 / 1.2);
  ctx.strokeStyle = "#f55";
  ctx.beginPath();
  ctx.moveTo(6, budgetY);
  ctx.lineTo(w - 6, budgetY);
  ctx.stroke();

  if (hud.rates) {
    ctx.fillStyle = "#cde";
    ctx.fillText(
      `bypass ${(hud.rates.bypass * 100).toFixed(0)}%  reuse ${(hud.rates.reuse * 100).toFixed(0)}%  drop ${(hud.rates.drop * 100).toFixed(0)}%`,
      6,
      h - 6
    );
  }
}

function main(): void {
  const view = qs<HTMLCanvasElement>("view");
  const hudCanvas = qs<HTMLCanvasElement>("hud");
  const status = qs<HTMLSpanElement>("status");
  const fpToggle = qs<HTMLInputElement>("toggle-fp");
  const esToggle = qs<HTMLInputElement>("toggle-es");
  const assetSelect = qs<HTMLSelectElement>("asset");
  const errorLine = qs<HTMLSpanElement>("error-line");

  const { url, attach } = wsUrlFromQuery();
  const client = new ViewerClient({
    url,
    attach,
    socketFactory: (u) => new WebSocket(u) as unknown as import("./client.js").ViewerSocket,
    onState: (state) => {
      status.textContent =
        state.status === "connected"
          ? `connected (session ${state.sessionId})${state.noTarget ? " — click the object to substitute it" : ""}`
          : state.status;
      // pessimistic: checkboxes show what the server confirmed, not the intent
      if (state.ackedToggles) {
        fpToggle.checked = state.ackedToggles.framePasser;
        esToggle.checked = state.ackedToggles.earlyStop;
      }
      fpToggle.disabled = state.status !== "connected";
      esToggle.disabled = state.status !== "connected";
      errorLine.textContent = state.lastError ?? "";
      blit(view, state);
      drawHud(hudCanvas, state);
    },
  });

  view.addEventListener("click", (ev) => {
    const frame = client.state.lastFrame;
    if (!frame) return;
    const rect = view.getBoundingClientRect();
    const hit = mapClickToFrame(rect, frame.width, frame.height, ev.clientX, ev.clientY);
    if (hit) client.clickAt(hit.u, hit.v);
  });
  const sendToggles = () => client.setToggles(fpToggle.checked, esToggle.checked);
  fpToggle.addEventListener("change", sendToggles);
  esToggle.addEventListener("change", sendToggles);
  assetSelect.addEventListener("change", () => client.setAsset(assetSelect.value));
  window.addEventListener("beforeunload", () => client.stop());

  client.start();
}

main();
