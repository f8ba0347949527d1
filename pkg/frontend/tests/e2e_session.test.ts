// End-to-end: a scripted protocol session against the real capture service
// (connect, 5 moves, overlay toggle, 3 waypoints, export), then the exported
// trajectory is fed to the batch CLI. Requires the Python package installed
// (`pip install -e .` in the repository root).

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { Socket } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { RawFrameDecoder, base64ToBytes, encodeRawFrame } from "../src/protocol.js";

const PYTHON = process.env.AIP_PYTHON ?? "python3";

let serverProc: ChildProcess | null = null;
let serverPort = 0;
let outDir = "";

class TestClient {
  private socket: Socket;
  private decoder = new RawFrameDecoder();
  private queue: Record<string, string>[] = [];
  private waiters: ((msg: Record<string, string>) => void)[] = [];

  constructor(port: number) {
    this.socket = new Socket();
    this.socket.connect(port, "127.0.0.1");
    this.socket.on("data", (chunk) => {
      for (const msg of this.decoder.feed(new Uint8Array(chunk))) {
        const waiter = this.waiters.shift();
        if (waiter) waiter(msg);
        else this.queue.push(msg);
      }
    });
  }

  send(msg: Record<string, unknown>): void {
    this.socket.write(encodeRawFrame(msg));
  }

  recv(timeoutMs = 60000): Promise<Record<string, string>> {
    const queued = this.queue.shift();
    if (queued) return Promise.resolve(queued);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("recv timeout")), timeoutMs);
      this.waiters.push((msg) => {
        clearTimeout(timer);
        resolve(msg);
      });
    });
  }

  close(): void {
    this.socket.destroy();
  }
}

beforeAll(async () => {
  outDir = mkdtempSync(join(tmpdir(), "aip-viewer-e2e-"));
  serverProc = spawn(
    PYTHON,
    [
      "-u", "-m", "aip.cli", "serve",
      "--scene", "builtin:brown_room",
      "--port", "0",
      "--out", outDir,
      "--preview-width", "64",
      "--preview-height", "48",
    ],
    { stdio: ["ignore", "pipe", "inherit"] }
  );
  serverPort = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("service did not start")), 120000);
    serverProc!.stdout!.on("data", (data: Buffer) => {
      const match = data.toString().match(/port (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    serverProc!.on("exit", (code) => reject(new Error(`service exited early (${code})`)));
  });
}, 150000);

afterAll(() => {
  serverProc?.kill();
});

describe("scripted viewer session against the live service", () => {
  it("moves, toggles overlays, records waypoints, exports, and the CLI replays", async () => {
    const client = new TestClient(serverPort);

    client.send({ type: "hello", version: 1 });
    const ack = await client.recv();
    expect(ack.type).toBe("hello");
    expect(ack.scene).toBe("brown_room");
    let frame = await client.recv();
    expect(frame.type).toBe("frame");

    // five moves; each acknowledged with a frame carrying the new pose
    const moves = ["0 0 0.4", "0 0 0.4", "0.3 0 0", "-0.15 0 0", "0 0 -0.2"];
    const poses: string[] = [];
    for (const move of moves) {
      client.send({ type: "input", move });
      frame = await client.recv();
      expect(frame.type).toBe("frame");
      poses.push(frame.pose);
    }
    expect(new Set(poses).size).toBeGreaterThan(1);

    // overlay toggle is reflected in the next frame's tag
    client.send({ type: "set", key: "overlay", value: "normals" });
    frame = await client.recv();
    expect(frame.overlay).toBe("normals");

    // three waypoints
    for (let i = 0; i < 3; i++) {
      client.send({ type: "waypoint" });
      frame = await client.recv();
    }
    expect(frame.waypoints).toBe("3");

    // export: the message payload and the server-side copy are identical
    client.send({ type: "export_trajectory" });
    const traj = await client.recv();
    expect(traj.type).toBe("trajectory");
    const confirming = await client.recv();
    expect(confirming.trajectory_file).toBe(traj.name);

    const exported = base64ToBytes(traj.text);
    const serverCopy = readFileSync(join(outDir, traj.name));
    expect(Buffer.from(exported).equals(serverCopy)).toBe(true);
    expect(Buffer.from(exported).toString().startsWith("aiptraj v1\n")).toBe(true);

    client.close();

    // the exported file drives the batch capture CLI
    const trajPath = join(outDir, "exported_by_client.traj");
    writeFileSync(trajPath, exported);
    const captureOut = join(outDir, "replay");
    const result = spawnSync(
      PYTHON,
      [
        "-m", "aip.cli", "capture",
        "--scene", "builtin:brown_room",
        "--lighting", "day",
        "--fidelity", "low",
        "--trajectory", trajPath,
        "--out", captureOut,
        "--width", "64",
        "--height", "48",
      ],
      { encoding: "utf-8", timeout: 300000 }
    );
    expect(result.status).toBe(0);
    const manifest = join(captureOut, "brown_room", "day", "low", "manifest.txt");
    expect(existsSync(manifest)).toBe(true);
    const text = readFileSync(manifest, "utf-8");
    expect(text.split("\n").filter((l) => l.startsWith("frame ")).length).toBe(3);
  }, 300000);
});
