import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { StreamDecoder } from "../src/decoder.js";
import { Message, crc32, encode } from "../src/protocol.js";

const FIXTURES = fileURLToPath(new URL("../../fixtures/golden_wire/", import.meta.url));

interface ManifestEntry {
  file: string;
  type: string;
  [key: string]: unknown;
}

const manifest: ManifestEntry[] = JSON.parse(
  readFileSync(FIXTURES + "manifest.json", "utf-8")
);

function hexBytes(hex: string | null): Uint8Array | null {
  if (hex === null) return null;
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  }
  return out;
}

function messageFromEntry(e: ManifestEntry): Message {
  const enc = new TextEncoder();
  switch (e.type) {
    case "bye":
      return { kind: "bye" };
    case "hello":
      return {
        kind: "hello",
        protoVersion: e.proto_version as number,
        sessionCfgJson: enc.encode(e.session_cfg_json as string),
      };
    case "hello_ack":
      return {
        kind: "hello_ack",
        sessionId: e.session_id as number,
        epochUs: e.epoch_us as number,
      };
    case "control":
      return { kind: "control", controlJson: enc.encode(e.control_json as string) };
    case "metrics":
      return { kind: "metrics", reportJson: enc.encode(e.report_json as string) };
    case "error":
      return { kind: "error", code: e.code as number, detail: e.detail as string };
    case "frame_rgb":
    case "frame_rgbd":
      return {
        kind: "frame",
        frameId: e.frame_id as number,
        captureTs: e.capture_ts as number,
        width: e.width as number,
        height: e.height as number,
        intrinsics: e.intrinsics as number[],
        cameraPose: e.camera_pose as number[],
        rgb: hexBytes(e.rgb_hex as string)!,
        depth: hexBytes(e.depth_hex as string | null),
      };
    case "result_minimal":
    case "result_full":
      return {
        kind: "result",
        frameId: e.frame_id as number,
        flags: e.flags as number,
        width: e.width as number,
        height: e.height as number,
        pose: (e.pose as number[] | null) ?? null,
        placement: (e.placement as number[] | null) ?? null,
        timings: e.timings as Record<string, number>,
        inpaintedRgb: hexBytes(e.inpainted_hex as string)!,
        composedRgb: hexBytes(e.composed_hex as string | null),
      };
    default:
      throw new Error(`unknown fixture type ${e.type}`);
  }
}

describe("golden wire fixtures", () => {
  for (const entry of manifest) {
    it(`re-encodes ${entry.file} byte-identically`, () => {
      const golden = new Uint8Array(readFileSync(FIXTURES + entry.file));
      const encoded = encode(messageFromEntry(entry));
      expect(Buffer.from(encoded).toString("hex")).toBe(
        Buffer.from(golden).toString("hex")
      );
    });

    it(`decodes ${entry.file} to the manifest fields`, () => {
      const golden = new Uint8Array(readFileSync(FIXTURES + entry.file));
      const dec = new StreamDecoder();
      const msgs = dec.feed(golden);
      expect(dec.issues).toEqual([]);
      expect(msgs).toHaveLength(1);
      expect(msgs[0]).toEqual(messageFromEntry(entry));
    });
  }

  it("decodes the concatenated fixture stream in order", () => {
    const blob = Buffer.concat(
      manifest.map((e) => readFileSync(FIXTURES + e.file))
    );
    const dec = new StreamDecoder();
    const msgs = dec.feed(new Uint8Array(blob));
    expect(msgs.map((m) => m.kind)).toEqual([
      "bye", "hello", "hello_ack", "control", "metrics", "error",
      "frame", "frame", "result", "result",
    ]);
  });
});

describe("crc32", () => {
  it("matches the framing contract for the empty Bye body", () => {
    // crc over type=8, len=0 — the value baked into 00_bye.bin
    const golden = new Uint8Array(readFileSync(FIXTURES + "00_bye.bin"));
    const body = golden.subarray(4, 9);
    const stored = new DataView(golden.buffer, golden.byteOffset + 9, 4).getUint32(0, true);
    expect(crc32(body)).toBe(stored);
  });
});
