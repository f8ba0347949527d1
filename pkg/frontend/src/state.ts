// Client-side session state: the single source of truth for what the panel
// shows. Knob values are clamped here BEFORE they are sent, so the client
// can never emit an out-of-range setting; the displayed pose is always the
// last server-acknowledged one (frames echo the authoritative pose).

import { FrameMsg, KnobKey, Overlay, parsePose } from "./protocol.js";

export interface KnobValues {
  render_scale: number;
  mip_bias: number;
  shadow_samples: number;
  reflection_depth: number;
  aa_samples: number;
  lod_index: number;
}

export const PREVIEW_KNOBS: KnobValues = {
  render_scale: 1.0,
  mip_bias: 1,
  shadow_samples: 1,
  reflection_depth: 1,
  aa_samples: 1,
  lod_index: 0,
};

export const KNOB_RANGES: Record<KnobKey, { min: number; max: number; step: number }> = {
  render_scale: { min: 0.1, max: 1.0, step: 0.05 },
  mip_bias: { min: 0, max: 6, step: 1 },
  shadow_samples: { min: 1, max: 16, step: 1 },
  reflection_depth: { min: 0, max: 3, step: 1 },
  aa_samples: { min: 1, max: 4, step: 3 }, // only 1 or 4 are valid
  lod_index: { min: 0, max: 255, step: 1 },
};

export function clampKnob(key: KnobKey, value: number): number {
  const range = KNOB_RANGES[key];
  let v = Math.min(range.max, Math.max(range.min, value));
  if (key === "aa_samples") return v >= 4 ? 4 : 1;
  if (key !== "render_scale") v = Math.round(v);
  return v;
}

export type ConnectionStatus = "disconnected" | "connecting" | "connected" | "error";

export interface ViewerState {
  status: ConnectionStatus;
  statusDetail: string;
  scene: string;
  profiles: string[];
  overlay: Overlay; // what we asked for
  frameOverlay: Overlay | null; // what the latest frame actually carries
  lighting: string;
  knobs: KnobValues;
  pose: ReturnType<typeof parsePose> | null;
  frameSeq: number;
  waypoints: number;
  rejected: boolean;
  lastTrajectoryFile: string | null;
  lastCaptured: number | null;
}

export function initialState(): ViewerState {
  return {
    status: "disconnected",
    statusDetail: "",
    scene: "",
    profiles: [],
    overlay: "color",
    frameOverlay: null,
    lighting: "day",
    knobs: { ...PREVIEW_KNOBS },
    pose: null,
    frameSeq: 0,
    waypoints: 0,
    rejected: false,
    lastTrajectoryFile: null,
    lastCaptured: null,
  };
}

/** Fold a frame message into the state (authoritative server echo). */
export function applyFrame(state: ViewerState, frame: FrameMsg): ViewerState {
  const seq = Number(frame.seq);
  if (seq <= state.frameSeq) return state; // stale frame: latest wins
  return {
    ...state,
    frameSeq: seq,
    frameOverlay: frame.overlay,
    lighting: frame.lighting,
    pose: parsePose(frame.pose),
    waypoints: Number(frame.waypoints),
    rejected: frame.rejected === "1",
    lastTrajectoryFile: frame.trajectory_file ?? state.lastTrajectoryFile,
    lastCaptured: frame.captured !== undefined ? Number(frame.captured) : state.lastCaptured,
  };
}
