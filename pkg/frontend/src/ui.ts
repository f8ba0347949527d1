// DOM panel: viewport image, status line, overlay/lighting dropdowns,
// fidelity sliders, waypoint/export/capture buttons. No framework; the
// page is rebuilt from ViewerState by update().

import { KnobKey, OVERLAYS } from "./protocol.js";
import { KNOB_RANGES, ViewerState } from "./state.js";

export interface UiHandlers {
  onConnect: (url: string) => void;
  onOverlay: (overlay: string) => void;
  onLighting: (profile: string) => void;
  onKnob: (key: KnobKey, value: number) => void;
  onWaypoint: () => void;
  onExport: () => void;
  onCapture: () => void;
  onDrag: (dx: number, dy: number) => void;
  onKey: (key: string) => void;
}

export interface UiRefs {
  root: HTMLElement;
  viewport: HTMLImageElement;
  status: HTMLElement;
  poseLabel: HTMLElement;
  overlayLabel: HTMLElement;
  overlaySelect: HTMLSelectElement;
  lightingSelect: HTMLSelectElement;
  knobInputs: Map<KnobKey, HTMLInputElement>;
  waypointButton: HTMLButtonElement;
  exportButton: HTMLButtonElement;
  captureButton: HTMLButtonElement;
  urlInput: HTMLInputElement;
}

export function buildUi(container: HTMLElement, handlers: UiHandlers): UiRefs {
  container.innerHTML = "";
  const root = el("div", "aip-root");

  const viewportWrap = el("div", "viewport-wrap");
  const viewport = document.createElement("img");
  viewport.className = "viewport";
  viewport.draggable = false;
  viewport.tabIndex = 0;
  viewportWrap.appendChild(viewport);
  const overlayLabel = el("div", "overlay-label");
  viewportWrap.appendChild(overlayLabel);
  root.appendChild(viewportWrap);

  const panel = el("div", "panel");

  const connectRow = el("div", "row");
  const urlInput = document.createElement("input");
  urlInput.value = defaultUrl();
  const connectBtn = button("connect", () => handlers.onConnect(urlInput.value));
  connectRow.append(urlInput, connectBtn);
  panel.appendChild(connectRow);

  const status = el("div", "status");
  panel.appendChild(status);
  const poseLabel = el("div", "pose");
  panel.appendChild(poseLabel);

  const overlaySelect = select(OVERLAYS, (v) => handlers.onOverlay(v));
  panel.appendChild(labeled("overlay (keys 1-4)", overlaySelect));
  const lightingSelect = select([], (v) => handlers.onLighting(v));
  panel.appendChild(labeled("lighting", lightingSelect));

  const knobInputs = new Map<KnobKey, HTMLInputElement>();
  const sliderKeys: KnobKey[] = ["render_scale", "mip_bias", "shadow_samples", "reflection_depth", "lod_index"];
  for (const key of sliderKeys) {
    const range = KNOB_RANGES[key];
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(range.min);
    input.max = String(range.max);
    input.step = String(range.step);
    input.addEventListener("input", () => handlers.onKnob(key, Number(input.value)));
    knobInputs.set(key, input);
    panel.appendChild(labeled(key.replace(/_/g, " "), input));
  }
  const aa = document.createElement("input");
  aa.type = "checkbox";
  aa.addEventListener("change", () => handlers.onKnob("aa_samples", aa.checked ? 4 : 1));
  knobInputs.set("aa_samples", aa);
  panel.appendChild(labeled("4x anti-aliasing", aa));

  const buttons = el("div", "row");
  const waypointButton = button("waypoint (space)", handlers.onWaypoint);
  const exportButton = button("export trajectory", handlers.onExport);
  const captureButton = button("capture full frame", handlers.onCapture);
  buttons.append(waypointButton, exportButton, captureButton);
  panel.appendChild(buttons);

  const help = el("div", "help");
  help.textContent = "WASD move, Q/E down/up, drag to look, 1-4 overlays, space waypoint";
  panel.appendChild(help);

  root.appendChild(panel);
  container.appendChild(root);

  // pointer look: drag on the viewport
  let dragging = false;
  let last = [0, 0];
  viewport.addEventListener("pointerdown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
    viewport.setPointerCapture(ev.pointerId);
  });
  viewport.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    handlers.onDrag(ev.clientX - last[0], ev.clientY - last[1]);
    last = [ev.clientX, ev.clientY];
  });
  viewport.addEventListener("pointerup", () => {
    dragging = false;
  });
  window.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement && ev.target.type === "text") return;
    handlers.onKey(ev.key);
  });

  return {
    root, viewport, status, poseLabel, overlayLabel, overlaySelect, lightingSelect,
    knobInputs, waypointButton, exportButton, captureButton, urlInput,
  };
}

export function updateUi(refs: UiRefs, state: ViewerState, framePng: string | null): void {
  refs.status.textContent =
    state.status === "connected"
      ? `connected to ${state.scene} (frame ${state.frameSeq}` +
        `${state.rejected ? ", move rejected" : ""})`
      : `${state.status}${state.statusDetail ? ": " + state.statusDetail : ""}`;
  refs.status.className = `status status-${state.status}`;
  if (state.pose) {
    const p = state.pose;
    refs.poseLabel.textContent =
      `x ${p.x.toFixed(2)}  z ${p.z.toFixed(2)}  h ${p.height.toFixed(2)}  ` +
      `yaw ${p.yaw.toFixed(1)}  pitch ${p.pitch.toFixed(1)}  waypoints ${state.waypoints}`;
  }
  // the on-image label always names the overlay of the frame being shown
  refs.overlayLabel.textContent = state.frameOverlay ?? "";
  refs.overlaySelect.value = state.overlay;
  if (state.profiles.length && refs.lightingSelect.options.length !== state.profiles.length) {
    refs.lightingSelect.innerHTML = "";
    for (const name of state.profiles) {
      const opt = document.createElement("option");
      opt.value = opt.textContent = name;
      refs.lightingSelect.appendChild(opt);
    }
  }
  refs.lightingSelect.value = state.lighting;
  for (const [key, input] of refs.knobInputs) {
    if (input.type === "checkbox") input.checked = state.knobs[key] >= 4;
    else input.value = String(state.knobs[key]);
  }
  refs.exportButton.disabled = state.waypoints === 0; // nothing to export yet
  refs.waypointButton.disabled = state.status !== "connected";
  refs.captureButton.disabled = state.status !== "connected";
  if (framePng) refs.viewport.src = `data:image/png;base64,${framePng}`;
}

export function triggerDownload(name: string, bytes: Uint8Array): void {
  const blob = new Blob([bytes.buffer as ArrayBuffer], { type: "application/octet-stream" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

function el(tag: string, cls: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  return node;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.addEventListener("click", onClick);
  return b;
}

function select(options: readonly string[], onChange: (v: string) => void): HTMLSelectElement {
  const s = document.createElement("select");
  for (const name of options) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    s.appendChild(opt);
  }
  s.addEventListener("change", () => onChange(s.value));
  return s;
}

function labeled(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "labeled");
  const span = document.createElement("span");
  span.textContent = text;
  wrap.append(span, control);
  return wrap;
}

function defaultUrl(): string {
  if (typeof location !== "undefined" && location.host) return `ws://${location.host}`;
  return "ws://127.0.0.1:7465";
}
