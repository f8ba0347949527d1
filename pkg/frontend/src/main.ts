// Wiring: connection + input mapping + state + panel.

import { Connection } from "./connection.js";
import { InputMapper } from "./input.js";
import {
  FrameMsg,
  HelloMsg,
  KnobKey,
  Overlay,
  PROTOCOL_VERSION,
  ServerMsg,
  TrajectoryMsg,
  base64ToBytes,
} from "./protocol.js";
import { ViewerState, applyFrame, clampKnob, initialState } from "./state.js";
import { buildUi, triggerDownload, updateUi } from "./ui.js";

let state: ViewerState = initialState();
let lastPng: string | null = null;
const input = new InputMapper();

const connection = new Connection({
  onOpen: () => {
    state = { ...state, status: "connecting", statusDetail: "handshake" };
    connection.send(input.helloMessage(PROTOCOL_VERSION));
    render();
  },
  onClose: (reason) => {
    state = { ...initialState(), status: "disconnected", statusDetail: reason };
    lastPng = null;
    render();
  },
  onMessage: (msg) => handleMessage(msg),
});

function handleMessage(msg: ServerMsg): void {
  switch (msg.type) {
    case "hello": {
      const hello = msg as HelloMsg;
      state = {
        ...state,
        status: "connected",
        statusDetail: "",
        scene: hello.scene ?? "",
        profiles: (hello.profiles ?? "").split(",").filter(Boolean),
      };
      break;
    }
    case "frame": {
      const frame = msg as FrameMsg;
      const next = applyFrame(state, frame);
      if (next !== state) {
        state = next;
        lastPng = frame.png; // latest frame wins for display
      }
      break;
    }
    case "trajectory": {
      const traj = msg as TrajectoryMsg;
      // pass-through: download exactly the bytes the server wrote
      triggerDownload(traj.name, base64ToBytes(traj.text));
      break;
    }
    case "error":
      state = { ...state, status: "error", statusDetail: msg.message };
      break;
  }
  render();
}

const refs = buildUi(document.getElementById("app")!, {
  onConnect: (url) => {
    state = { ...initialState(), status: "connecting" };
    render();
    connection.connect(url);
  },
  onOverlay: (overlay) => {
    state = { ...state, overlay: overlay as Overlay };
    connection.send(input.settingMessage("overlay", overlay));
    render();
  },
  onLighting: (profile) => {
    connection.send(input.settingMessage("lighting", profile));
  },
  onKnob: (key: KnobKey, value: number) => {
    const clamped = clampKnob(key, value); // never send out-of-range values
    state = { ...state, knobs: { ...state.knobs, [key]: clamped } };
    connection.send(input.settingMessage(key, clamped));
    render();
  },
  onWaypoint: () => void connection.send(input.waypointMessage()),
  onExport: () => void connection.send(input.exportMessage()),
  onCapture: () => void connection.send(input.captureMessage()),
  onDrag: (dx, dy) => void connection.send(input.dragMessage(dx, dy)),
  onKey: (key) => {
    const msg = input.keyMessage(key);
    if (msg) {
      if (msg.type === "set" && msg.key === "overlay") {
        state = { ...state, overlay: msg.value as Overlay };
      }
      connection.send(msg);
      render();
    }
  },
});

function render(): void {
  updateUi(refs, state, lastPng);
}

render();
