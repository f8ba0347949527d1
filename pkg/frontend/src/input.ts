// Keyboard / mouse to protocol messages. WASD moves in the camera's yaw
// frame, Q/E move vertically, mouse drag turns (yaw/pitch scaled by the
// look sensitivity), and number keys 1-4 pick the overlay. Every outgoing
// message carries a monotonically increasing seq so ordering is checkable.

import { ClientMsg, OVERLAYS } from "./protocol.js";

export interface InputConfig {
  stepSize: number; // meters per keypress
  lookSensitivity: number; // degrees per pixel of drag
}

export const DEFAULT_INPUT: InputConfig = { stepSize: 0.25, lookSensitivity: 0.2 };

const MOVES: Record<string, [number, number, number]> = {
  w: [0, 0, 1],
  s: [0, 0, -1],
  a: [-1, 0, 0],
  d: [1, 0, 0],
  q: [0, -1, 0],
  e: [0, 1, 0],
};

export class InputMapper {
  private seq = 0;

  constructor(private config: InputConfig = DEFAULT_INPUT) {}

  private stamp<T extends ClientMsg>(msg: T): T {
    this.seq += 1;
    return { ...msg, seq: this.seq };
  }

  get lastSeq(): number {
    return this.seq;
  }

  /** A key press; returns the message to send, or null for unbound keys. */
  keyMessage(key: string): ClientMsg | null {
    const k = key.toLowerCase();
    if (k in MOVES) {
      const [mx, my, mz] = MOVES[k];
      const s = this.config.stepSize;
      return this.stamp({
        type: "input",
        move: `${mx * s} ${my * s} ${mz * s}`,
      });
    }
    const overlayIndex = Number(k) - 1;
    if (overlayIndex >= 0 && overlayIndex < OVERLAYS.length && /^[1-9]$/.test(k)) {
      return this.stamp({ type: "set", key: "overlay", value: OVERLAYS[overlayIndex] });
    }
    if (k === " ") return this.stamp({ type: "waypoint" });
    return null; // unbound keys are ignored
  }

  /** A mouse drag of (dx, dy) pixels; dragging right turns right. */
  dragMessage(dxPixels: number, dyPixels: number): ClientMsg {
    const yaw = dxPixels * this.config.lookSensitivity;
    const pitch = -dyPixels * this.config.lookSensitivity;
    return this.stamp({ type: "input", yaw, pitch });
  }

  settingMessage(key: string, value: string | number): ClientMsg {
    return this.stamp({ type: "set", key, value });
  }

  waypointMessage(): ClientMsg {
    return this.stamp({ type: "waypoint" });
  }

  exportMessage(): ClientMsg {
    return this.stamp({ type: "export_trajectory" });
  }

  captureMessage(): ClientMsg {
    return this.stamp({ type: "capture" });
  }

  helloMessage(version: number): ClientMsg {
    return this.stamp({ type: "hello", version });
  }
}
