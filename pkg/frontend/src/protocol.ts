/**
 * Binary wire protocol, byte-identical to the server's codec.
 *
 * Envelope: "DRM1" | msg_type u8 | payload_len u32 LE | payload |
 * crc32 u32 LE over type+len+payload (reflected 0xEDB88320 CRC).
 */

export const MAGIC = new Uint8Array([0x44, 0x52, 0x4d, 0x31]);
export const PROTO_VERSION = 1;
export const MAX_PAYLOAD = 64 * 1024 * 1024;
export const HEADER_LEN = 9;
export const TRAILER_LEN = 4;

export const MSG_HELLO = 1;
export const MSG_HELLO_ACK = 2;
export const MSG_FRAME = 3;
export const MSG_RESULT = 4;
export const MSG_CONTROL = 5;
export const MSG_METRICS = 6;
export const MSG_ERROR = 7;
export const MSG_BYE = 8;

export const FLAG_BYPASS = 0x01;
export const FLAG_REUSE = 0x02;
export const FLAG_KEYFRAME = 0x04;
export const FLAG_NO_TARGET = 0x08;

// canonical timing order keeps encodings deterministic across languages
const TIMING_ORDER = [
  "gate2d", "segment", "inpaint", "gate3d", "pose_coarse", "pose_refine",
  "compose", "transport_up", "transport_down", "total",
];

export interface Hello { kind: "hello"; protoVersion: number; sessionCfgJson: Uint8Array; }
export interface HelloAck { kind: "hello_ack"; sessionId: number; epochUs: number; }
export interface FrameMsg {
  kind: "frame";
  frameId: number;
  captureTs: number;
  width: number;
  height: number;
  intrinsics: number[];   // fx fy cx cy
  cameraPose: number[];   // tx ty tz qw qx qy qz
  rgb: Uint8Array;
  depth: Uint8Array | null;
}
export interface ResultMsg {
  kind: "result";
  frameId: number;
  flags: number;
  width: number;
  height: number;
  pose: number[] | null;        // 7 f32
  placement: number[] | null;   // 8 f32
  timings: Record<string, number>;
  inpaintedRgb: Uint8Array;
  composedRgb: Uint8Array | null;
}
export interface Control { kind: "control"; controlJson: Uint8Array; }
export interface Metrics { kind: "metrics"; reportJson: Uint8Array; }
export interface ErrorMsg { kind: "error"; code: number; detail: string; }
export interface Bye { kind: "bye"; }

export type Message =
  | Hello | HelloAck | FrameMsg | ResultMsg | Control | Metrics | ErrorMsg | Bye;

export class DecodeError extends Error {}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

class Writer {
  private parts: Uint8Array[] = [];
  private scratch = new DataView(new ArrayBuffer(8));

  u8(v: number) { this.parts.push(new Uint8Array([v & 0xff])); }
  u16(v: number) {
    this.scratch.setUint16(0, v, true);
    this.parts.push(new Uint8Array(this.scratch.buffer.slice(0, 2)));
  }
  u32(v: number) {
    this.scratch.setUint32(0, v >>> 0, true);
    this.parts.push(new Uint8Array(this.scratch.buffer.slice(0, 4)));
  }
  u64(v: number) {
    if (!Number.isSafeInteger(v) || v < 0) {
      throw new DecodeError(`u64 value out of safe range: ${v}`);
    }
    this.scratch.setBigUint64(0, BigInt(v), true);
    this.parts.push(new Uint8Array(this.scratch.buffer.slice(0, 8)));
  }
  f32(v: number) {
    this.scratch.setFloat32(0, v, true);
    this.parts.push(new Uint8Array(this.scratch.buffer.slice(0, 4)));
  }
  bytes(b: Uint8Array) { this.parts.push(b); }

  concat(): Uint8Array {
    const total = this.parts.reduce((n, p) => n + p.length, 0);
    const out = new Uint8Array(total);
    let off = 0;
    for (const p of this.parts) {
      out.set(p, off);
      off += p.length;
    }
    return out;
  }
}

class Reader {
  private view: DataView;
  pos = 0;

  constructor(private data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  }
  private need(n: number) {
    if (this.pos + n > this.data.length) {
      throw new DecodeError(`payload truncated at offset ${this.pos}`);
    }
  }
  u8(): number { this.need(1); return this.view.getUint8(this.pos++); }
  u16(): number { this.need(2); const v = this.view.getUint16(this.pos, true); this.pos += 2; return v; }
  u32(): number { this.need(4); const v = this.view.getUint32(this.pos, true); this.pos += 4; return v; }
  u64(): number {
    this.need(8);
    const v = this.view.getBigUint64(this.pos, true);
    this.pos += 8;
    if (v > BigInt(Number.MAX_SAFE_INTEGER)) throw new DecodeError("u64 beyond safe integer");
    return Number(v);
  }
  f32(): number { this.need(4); const v = this.view.getFloat32(this.pos, true); this.pos += 4; return v; }
  bytes(n: number): Uint8Array {
    this.need(n);
    const out = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }
  rest(): Uint8Array { return this.bytes(this.data.length - this.pos); }
  done() {
    if (this.pos !== this.data.length) {
      throw new DecodeError(`${this.data.length - this.pos} trailing payload bytes`);
    }
  }
}

function msgType(msg: Message): number {
  switch (msg.kind) {
    case "hello": return MSG_HELLO;
    case "hello_ack": return MSG_HELLO_ACK;
    case "frame": return MSG_FRAME;
    case "result": return MSG_RESULT;
    case "control": return MSG_CONTROL;
    case "metrics": return MSG_METRICS;
    case "error": return MSG_ERROR;
    case "bye": return MSG_BYE;
  }
}

export function encodePayload(msg: Message): Uint8Array {
  const w = new Writer();
  switch (msg.kind) {
    case "hello":
      w.u16(msg.protoVersion);
      w.bytes(msg.sessionCfgJson);
      break;
    case "hello_ack":
      w.u64(msg.sessionId);
      w.u64(msg.epochUs);
      break;
    case "frame": {
      w.u64(msg.frameId);
      w.u64(msg.captureTs);
      w.u32(msg.width);
      w.u32(msg.height);
      w.u8(msg.depth === null ? 0 : 1);
      for (const v of msg.intrinsics) w.f32(v);
      for (const v of msg.cameraPose) w.f32(v);
      w.bytes(msg.rgb);
      if (msg.depth !== null) w.bytes(msg.depth);
      break;
    }
    case "result": {
      w.u64(msg.frameId);
      w.u8(msg.flags);
      w.u32(msg.width);
      w.u32(msg.height);
      if (msg.pose === null) {
        w.u8(0);
      } else {
        w.u8(1);
        for (const v of msg.pose) w.f32(v);
      }
      if (msg.placement === null) {
        w.u8(0);
      } else {
        w.u8(1);
        for (const v of msg.placement) w.f32(v);
      }
      const names = TIMING_ORDER.filter((n) => n in msg.timings);
      for (const n of Object.keys(msg.timings).sort()) {
        if (!names.includes(n)) names.push(n);
      }
      w.u8(names.length);
      for (const name of names) {
        const raw = new TextEncoder().encode(name);
        w.u8(raw.length);
        w.bytes(raw);
        w.u64(msg.timings[name]);
      }
      w.bytes(msg.inpaintedRgb);
      if (msg.composedRgb === null) {
        w.u8(0);
      } else {
        w.u8(1);
        w.bytes(msg.composedRgb);
      }
      break;
    }
    case "control":
      w.bytes(msg.controlJson);
      break;
    case "metrics":
      w.bytes(msg.reportJson);
      break;
    case "error":
      w.u16(msg.code);
      w.bytes(new TextEncoder().encode(msg.detail));
      break;
    case "bye":
      break;
  }
  return w.concat();
}

export function encode(msg: Message): Uint8Array {
  const payload = encodePayload(msg);
  if (payload.length > MAX_PAYLOAD) {
    throw new DecodeError(`payload ${payload.length} exceeds ${MAX_PAYLOAD}`);
  }
  const body = new Uint8Array(5 + payload.length);
  body[0] = msgType(msg);
  new DataView(body.buffer).setUint32(1, payload.length, true);
  body.set(payload, 5);
  const out = new Uint8Array(4 + body.length + 4);
  out.set(MAGIC, 0);
  out.set(body, 4);
  new DataView(out.buffer).setUint32(4 + body.length, crc32(body), true);
  return out;
}

export function decodePayload(type: number, payload: Uint8Array): Message {
  const r = new Reader(payload);
  switch (type) {
    case MSG_HELLO: {
      const protoVersion = r.u16();
      return { kind: "hello", protoVersion, sessionCfgJson: r.rest() };
    }
    case MSG_HELLO_ACK: {
      const sessionId = r.u64();
      const epochUs = r.u64();
      r.done();
      return { kind: "hello_ack", sessionId, epochUs };
    }
    case MSG_FRAME: {
      const frameId = r.u64();
      const captureTs = r.u64();
      const width = r.u32();
      const height = r.u32();
      const hasDepth = r.u8();
      if (hasDepth !== 0 && hasDepth !== 1) throw new DecodeError("has_depth must be 0|1");
      if (width <= 0 || height <= 0 || width > 8192 || height > 8192) {
        throw new DecodeError(`bad frame dims ${width}x${height}`);
      }
      const intrinsics = [r.f32(), r.f32(), r.f32(), r.f32()];
      const cameraPose = Array.from({ length: 7 }, () => r.f32());
      const rgb = r.bytes(width * height * 3);
      const depth = hasDepth ? r.bytes(width * height * 4) : null;
      r.done();
      return { kind: "frame", frameId, captureTs, width, height, intrinsics, cameraPose, rgb, depth };
    }
    case MSG_RESULT: {
      const frameId = r.u64();
      const flags = r.u8();
      const width = r.u32();
      const height = r.u32();
      if (width <= 0 || height <= 0 || width > 8192 || height > 8192) {
        throw new DecodeError(`bad result dims ${width}x${height}`);
      }
      const pose = r.u8() ? Array.from({ length: 7 }, () => r.f32()) : null;
      const placement = r.u8() ? Array.from({ length: 8 }, () => r.f32()) : null;
      const count = r.u8();
      const timings: Record<string, number> = {};
      for (let i = 0; i < count; i++) {
        const nameLen = r.u8();
        const name = new TextDecoder().decode(r.bytes(nameLen));
        timings[name] = r.u64();
      }
      const inpaintedRgb = r.bytes(width * height * 3);
      const composedRgb = r.u8() ? r.bytes(width * height * 3) : null;
      r.done();
      return {
        kind: "result", frameId, flags, width, height, pose, placement,
        timings, inpaintedRgb, composedRgb,
      };
    }
    case MSG_CONTROL:
      return { kind: "control", controlJson: r.rest() };
    case MSG_METRICS:
      return { kind: "metrics", reportJson: r.rest() };
    case MSG_ERROR: {
      const code = r.u16();
      return { kind: "error", code, detail: new TextDecoder().decode(r.rest()) };
    }
    case MSG_BYE:
      r.done();
      return { kind: "bye" };
    default:
      throw new DecodeError(`unknown message type ${type}`);
  }
}

export function makeControl(action: Record<string, unknown>): Control {
  const sorted = Object.fromEntries(Object.entries(action).sort(([a], [b]) => (a < b ? -1 : 1)));
  return { kind: "control", controlJson: new TextEncoder().encode(JSON.stringify(sorted)) };
}

export function makeViewerHello(opts: { attach?: number; scene?: unknown }): Hello {
  const viewer: Record<string, unknown> =
    opts.attach !== undefined ? { attach: opts.attach } : { demo: true };
  if (opts.scene !== undefined) viewer.scene = opts.scene;
  return {
    kind: "hello",
    protoVersion: PROTO_VERSION,
    sessionCfgJson: new TextEncoder().encode(JSON.stringify({ viewer })),
  };
}
