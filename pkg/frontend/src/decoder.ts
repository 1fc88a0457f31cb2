/** Chunk-tolerant streaming decoder: same resync behavior as the server's. */

import {
  DecodeError,
  HEADER_LEN,
  MAGIC,
  MAX_PAYLOAD,
  Message,
  TRAILER_LEN,
  crc32,
  decodePayload,
} from "./protocol.js";

export interface DecodeIssue {
  kind: "bad_magic" | "crc_mismatch" | "oversized" | "bad_payload";
  detail: string;
}

function indexOfMagic(buf: Uint8Array, from: number): number {
  outer: for (let i = from; i + 4 <= buf.length; i++) {
    for (let k = 0; k < 4; k++) {
      if (buf[i + k] !== MAGIC[k]) continue outer;
    }
    return i;
  }
  return -1;
}

function magicPrefixSuffix(buf: Uint8Array): number {
  for (let k = Math.min(3, buf.length); k > 0; k--) {
    let match = true;
    for (let i = 0; i < k; i++) {
      if (buf[buf.length - k + i] !== MAGIC[i]) {
        match = false;
        break;
      }
    }
    if (match) return k;
  }
  return 0;
}

export class StreamDecoder {
  private buf = new Uint8Array(0);
  issues: DecodeIssue[] = [];

  feed(chunk: Uint8Array): Message[] {
    const joined = new Uint8Array(this.buf.length + chunk.length);
    joined.set(this.buf, 0);
    joined.set(chunk, this.buf.length);
    this.buf = joined;

    const out: Message[] = [];
    for (;;) {
      if (!this.resync()) break;
      if (this.buf.length < HEADER_LEN) break;
      const type = this.buf[4];
      const view = new DataView(this.buf.buffer, this.buf.byteOffset);
      const payloadLen = view.getUint32(5, true);
      if (payloadLen > MAX_PAYLOAD) {
        this.issues.push({ kind: "oversized", detail: `payload_len ${payloadLen}` });
        this.buf = this.buf.subarray(4);
        continue;
      }
      const frameLen = HEADER_LEN + payloadLen + TRAILER_LEN;
      if (this.buf.length < frameLen) break;
      const body = this.buf.subarray(4, HEADER_LEN + payloadLen);
      const crc = view.getUint32(HEADER_LEN + payloadLen, true);
      if (crc32(body) !== crc) {
        this.issues.push({ kind: "crc_mismatch", detail: `type ${type} len ${payloadLen}` });
        this.buf = this.buf.subarray(frameLen);
        continue;
      }
      const payload = this.buf.slice(HEADER_LEN, HEADER_LEN + payloadLen);
      this.buf = this.buf.subarray(frameLen);
      try {
        out.push(decodePayload(type, payload));
      } catch (err) {
        if (err instanceof DecodeError) {
          this.issues.push({ kind: "bad_payload", detail: err.message });
        } else {
          throw err;
        }
      }
    }
    return out;
  }

  private resync(): boolean {
    const buf = this.buf;
    if (buf.length >= 4) {
      if (buf[0] === MAGIC[0] && buf[1] === MAGIC[1] && buf[2] === MAGIC[2] && buf[3] === MAGIC[3]) {
        return true;
      }
      const idx = indexOfMagic(buf, 0);
      if (idx >= 0) {
        this.issues.push({ kind: "bad_magic", detail: `skipped ${idx} bytes` });
        this.buf = buf.subarray(idx);
        return true;
      }
      const keep = magicPrefixSuffix(buf);
      const skipped = buf.length - keep;
      if (skipped > 0) {
        this.issues.push({ kind: "bad_magic", detail: `skipped ${skipped} bytes` });
        this.buf = buf.subarray(skipped);
      }
      return false;
    }
    let prefixOk = true;
    for (let i = 0; i < buf.length; i++) {
      if (buf[i] !== MAGIC[i]) {
        prefixOk = false;
        break;
      }
    }
    if (prefixOk) return false;
    const keep = magicPrefixSuffix(buf);
    this.issues.push({ kind: "bad_magic", detail: `skipped ${buf.length - keep} bytes` });
    this.buf = buf.subarray(buf.length - keep);
    return false;
  }
}
