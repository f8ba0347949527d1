import { describe, expect, it } from "vitest";

import { FrameMsg } from "../src/protocol.js";
import { applyFrame, clampKnob, initialState, KNOB_RANGES } from "../src/state.js";

function frame(overrides: Partial<FrameMsg> = {}): FrameMsg {
  return {
    type: "frame",
    seq: "1",
    overlay: "color",
    lighting: "day",
    width: "320",
    height: "240",
    pose: "0 0 1.6 0 0",
    waypoints: "0",
    rejected: "0",
    png: "",
    ...overrides,
  };
}

describe("knob clamping (client never sends out-of-range values)", () => {
  it("clamps every knob into its range", () => {
    for (const key of Object.keys(KNOB_RANGES) as (keyof typeof KNOB_RANGES)[]) {
      const r = KNOB_RANGES[key];
      expect(clampKnob(key, -999)).toBeGreaterThanOrEqual(r.min);
      expect(clampKnob(key, 999)).toBeLessThanOrEqual(r.max);
    }
  });

  it("aa_samples snaps to 1 or 4", () => {
    expect(clampKnob("aa_samples", 2)).toBe(1);
    expect(clampKnob("aa_samples", 4)).toBe(4);
    expect(clampKnob("aa_samples", 99)).toBe(4);
  });

  it("integer knobs round", () => {
    expect(clampKnob("shadow_samples", 2.7)).toBe(3);
    expect(clampKnob("render_scale", 0.55)).toBeCloseTo(0.55);
  });
});

describe("frame folding", () => {
  it("tracks the server-acknowledged pose and overlay tag", () => {
    const s1 = applyFrame(initialState(), frame({ seq: "5", overlay: "depth", pose: "1 2 1.6 90 -5" }));
    expect(s1.frameSeq).toBe(5);
    expect(s1.frameOverlay).toBe("depth"); // the UI label follows the frame, not the request
    expect(s1.pose).toEqual({ x: 1, z: 2, height: 1.6, yaw: 90, pitch: -5 });
  });

  it("drops stale frames (latest wins)", () => {
    const fresh = applyFrame(initialState(), frame({ seq: "7", lighting: "night" }));
    const after = applyFrame(fresh, frame({ seq: "3", lighting: "day" }));
    expect(after).toBe(fresh); // unchanged object: stale frame ignored
  });

  it("records rejection and side-effect echoes", () => {
    const s = applyFrame(
      initialState(),
      frame({ seq: "2", rejected: "1", trajectory_file: "trajectory_000.traj", captured: "0" })
    );
    expect(s.rejected).toBe(true);
    expect(s.lastTrajectoryFile).toBe("trajectory_000.traj");
    expect(s.lastCaptured).toBe(0);
  });
});
