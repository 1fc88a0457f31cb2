/**
 * Socket-agnostic viewer client: connect/reconnect lifecycle, message
 * handling, and the complete outbound surface (Hello, Control, Bye —
 * a viewer never sends frames).
 */

import { StreamDecoder } from "./decoder.js";
import {
  Bye,
  Message,
  encode,
  makeControl,
  makeViewerHello,
} from "./protocol.js";
import {
  ViewerState,
  initialState,
  onClosed,
  onConnected,
  onDecodeIssue,
  onDisconnected,
  onMetrics,
  onResult,
  onServerError,
  setAssetIntent,
  setToggleIntent,
} from "./state.js";

export interface ViewerSocket {
  binaryType: string;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: ArrayBuffer | Uint8Array }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err?: unknown) => void) | null;
  send(data: Uint8Array): void;
  close(): void;
}

export interface ClientOptions {
  url: string;
  attach?: number;
  scene?: unknown;
  socketFactory: (url: string) => ViewerSocket;
  scheduleReconnect?: (fn: () => void, delayMs: number) => void;
  onState?: (s: ViewerState) => void;
}

const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 5000;

export class ViewerClient {
  state: ViewerState = initialState();
  /** audit trail of every message kind this client has sent */
  sentKinds: string[] = [];
  backoffMs = BACKOFF_START_MS;

  private decoder = new StreamDecoder();
  private sock: ViewerSocket | null = null;
  private stopped = false;
  private togglesTouched = false;
  private assetTouched = false;

  constructor(private opts: ClientOptions) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.sock) {
      try {
        this.send({ kind: "bye" } as Bye);
      } catch {
        // already gone
      }
      this.sock.close();
      this.sock = null;
    }
    this.setState(onClosed(this.state));
  }

  private setState(next: ViewerState): void {
    this.state = next;
    this.opts.onState?.(next);
  }

  private connect(): void {
    this.decoder = new StreamDecoder(); // one decoder per connection
    const sock = this.opts.socketFactory(this.opts.url);
    this.sock = sock;
    sock.binaryType = "arraybuffer";
    sock.onopen = () => {
      this.send(makeViewerHello({ attach: this.opts.attach, scene: this.opts.scene }));
    };
    sock.onmessage = (ev) => {
      const bytes = ev.data instanceof Uint8Array ? ev.data : new Uint8Array(ev.data);
      this.handleBytes(bytes);
    };
    sock.onerror = () => {
      // onclose fires next; nothing to do here
    };
    sock.onclose = () => {
      if (this.stopped) return;
      this.setState(onDisconnected(this.state));
      const delay = this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
      const schedule = this.opts.scheduleReconnect ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => {
        if (!this.stopped) this.connect();
      }, delay);
    };
  }

  private handleBytes(bytes: Uint8Array): void {
    const before = this.decoder.issues.length;
    const msgs = this.decoder.feed(bytes);
    const badFrames = this.decoder.issues.length - before;
    let s = onDecodeIssue(this.state, badFrames);
    for (const msg of msgs) {
      switch (msg.kind) {
        case "hello_ack":
          s = onConnected(s, msg.sessionId);
          this.backoffMs = BACKOFF_START_MS;
          this.setState(s);
          this.replayIntent();
          s = this.state;
          break;
        case "result":
          s = onResult(s, msg);
          break;
        case "metrics":
          s = onMetrics(s, msg);
          break;
        case "error":
          s = onServerError(s, msg.detail);
          break;
        default:
          break;
      }
    }
    this.setState(s);
  }

  /** after a (re)connect, restore whatever the user had asked for */
  private replayIntent(): void {
    if (this.togglesTouched) {
      this.sendToggles();
    }
    if (this.assetTouched) {
      this.send(makeControl({ action: "set_asset", asset_id: this.state.selectedAsset }));
    }
  }

  clickAt(u: number, v: number): void {
    if (this.state.status !== "connected") return; // clicks while disconnected are ignored
    this.send(makeControl({ action: "select_object", u: Math.trunc(u), v: Math.trunc(v) }));
  }

  setToggles(framePasser: boolean, earlyStop: boolean): void {
    this.togglesTouched = true;
    this.setState(setToggleIntent(this.state, { framePasser, earlyStop }));
    if (this.state.status === "connected") {
      this.sendToggles();
    }
  }

  setAsset(assetId: string): void {
    this.assetTouched = true;
    this.setState(setAssetIntent(this.state, assetId));
    if (this.state.status === "connected") {
      this.send(makeControl({ action: "set_asset", asset_id: assetId }));
    }
  }

  requestMetrics(): void {
    if (this.state.status === "connected") {
      this.send(makeControl({ action: "get_metrics" }));
    }
  }

  private sendToggles(): void {
    const t = this.state.intendedToggles;
    this.send(
      makeControl({ action: "set_gating", frame_passer: t.framePasser, early_stop: t.earlyStop })
    );
  }

  private send(msg: Message): void {
    if (!this.sock) return;
    this.sock.send(encode(msg));
    this.sentKinds.push(msg.kind);
  }
}

/** Display coordinates -> frame pixel coordinates under CSS scaling. */
export function mapClickToFrame(
  rect: { left: number; top: number; width: number; height: number },
  frameW: number,
  frameH: number,
  clientX: number,
  clientY: number
): { u: number; v: number } | null {
  if (rect.width <= 0 || rect.height <= 0) return null;
  const u = Math.floor(((clientX - rect.left) / rect.width) * frameW);
  const v = Math.floor(((clientY - rect.top) / rect.height) * frameH);
  if (u < 0 || v < 0 || u >= frameW || v >= frameH) return null;
  return { u, v };
}
