// Wire protocol: key-value text bodies, shared verbatim with the service.
// A body is "type <name>" followed by "key value" lines; over WebSocket each
// body is one text frame, over raw TCP it is length-prefixed (decimal byte
// count + "\n"). See docs/protocol.md in the repository root.

export const PROTOCOL_VERSION = 1;

export type Overlay = "color" | "depth" | "normals" | "labels";
export const OVERLAYS: Overlay[] = ["color", "depth", "normals", "labels"];

export type KnobKey =
  | "render_scale"
  | "mip_bias"
  | "shadow_samples"
  | "reflection_depth"
  | "aa_samples"
  | "lod_index";

export interface HelloMsg {
  type: "hello";
  version: string;
  scene?: string;
  width?: string;
  height?: string;
  overlays?: string;
  profiles?: string;
}

export interface FrameMsg {
  type: "frame";
  seq: string;
  overlay: Overlay;
  lighting: string;
  width: string;
  height: string;
  pose: string; // "x z height yaw pitch"
  waypoints: string;
  rejected: string;
  png: string; // base64
  trajectory_file?: string;
  captured?: string;
}

export interface TrajectoryMsg {
  type: "trajectory";
  name: string;
  count: string;
  text: string; // base64 of the exact file bytes
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = HelloMsg | FrameMsg | TrajectoryMsg | ErrorMsg;

export type ClientMsg =
  | { type: "hello"; version: number; seq?: number }
  | { type: "input"; move?: string; yaw?: number; pitch?: number; seq?: number }
  | { type: "set"; key: string; value: string | number; seq?: number }
  | { type: "waypoint"; seq?: number }
  | { type: "export_trajectory"; seq?: number }
  | { type: "capture"; seq?: number };

export function encodeBody(msg: Record<string, unknown>): string {
  if (typeof msg.type !== "string") throw new Error("message needs a type");
  const lines = [`type ${msg.type}`];
  for (const [key, value] of Object.entries(msg)) {
    if (key !== "type" && value !== undefined) lines.push(`${key} ${value}`);
  }
  return lines.join("\n") + "\n";
}

export function decodeBody(body: string): Record<string, string> {
  const msg: Record<string, string> = {};
  for (const raw of body.split("\n")) {
    const line = raw.trim();
    if (!line) continue;
    const sp = line.indexOf(" ");
    if (sp < 0) msg[line] = "";
    else msg[line.slice(0, sp)] = line.slice(sp + 1);
  }
  if (!("type" in msg)) throw new Error("message missing type line");
  return msg;
}

export function parsePose(pose: string): { x: number; z: number; height: number; yaw: number; pitch: number } {
  const [x, z, height, yaw, pitch] = pose.split(" ").map(Number);
  return { x, z, height, yaw, pitch };
}

// --- raw (length-delimited) framing, used by non-browser clients ----------

/** Incremental decoder for the raw framing: feed bytes, pull messages. */
export class RawFrameDecoder {
  private buffer = new Uint8Array(0);

  feed(chunk: Uint8Array): Record<string, string>[] {
    const joined = new Uint8Array(this.buffer.length + chunk.length);
    joined.set(this.buffer);
    joined.set(chunk, this.buffer.length);
    this.buffer = joined;
    const out: Record<string, string>[] = [];
    for (;;) {
      const nl = this.buffer.indexOf(0x0a);
      if (nl < 0) break;
      const header = new TextDecoder().decode(this.buffer.slice(0, nl));
      const length = parseInt(header, 10);
      if (!Number.isFinite(length) || length < 0) throw new Error(`bad length header ${header}`);
      if (this.buffer.length < nl + 1 + length) break;
      const body = new TextDecoder().decode(this.buffer.slice(nl + 1, nl + 1 + length));
      this.buffer = this.buffer.slice(nl + 1 + length);
      out.push(decodeBody(body));
    }
    return out;
  }
}

export function encodeRawFrame(msg: Record<string, unknown>): Uint8Array {
  const body = new TextEncoder().encode(encodeBody(msg));
  const header = new TextEncoder().encode(`${body.length}\n`);
  const out = new Uint8Array(header.length + body.length);
  out.set(header);
  out.set(body, header.length);
  return out;
}

export function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  return Uint8Array.from(Buffer.from(b64, "base64"));
}
