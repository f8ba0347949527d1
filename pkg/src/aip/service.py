"""Live capture service: a single-session socket server driving the renderer.

Wire format: length-delimited UTF-8 text messages — ASCII decimal body
length, a newline, then the body.  A body is "type <name>" followed by
"key value" lines.  Preview frames travel as base64 PNG inside ``frame``
messages.  The same bodies are also spoken over WebSocket (for browsers);
the server sniffs the first bytes of each connection: an HTTP request either
upgrades to WebSocket or is served from the static assets directory, and
anything else is treated as the raw framing.  See docs/protocol.md.

One session at a time; concurrent connects receive an ``error busy``.
Movement is validated against the scene; an invalid move keeps the prior
position and flags ``rejected 1`` in the next frame.  If further input is
already queued, intermediate renders are skipped (latest state wins).
"""

from __future__ import annotations

import base64
import hashlib
import select
import socket
import struct
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .ablation import HIGH, FidelityPreset
from .builtins import builtin_scene
from .dataset import display_palette, export_frame, png_bytes
from .errors import ProtocolError
from .probe import Trajectory, TrajectoryConfig, canonical_pose, serialize_trajectory, validate_pose
from .render import Pose, RenderSettings, render_frame
from .scene import CameraIntrinsics, Scene

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7465
PORT_ENV_VAR = "AIP_PORT"

OVERLAYS = ("color", "depth", "normals", "labels")
PREVIEW = FidelityPreset("preview", 1.0, 1, 1, 1, 1, 0)
_KNOB_KEYS = ("render_scale", "mip_bias", "shadow_samples", "reflection_depth", "aa_samples", "lod_index")

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


# ---------------------------------------------------------------------------
# message codec (shared by both framings)


def encode_body(msg: dict) -> str:
    if "type" not in msg:
        raise ProtocolError("message needs a type")
    lines = [f"type {msg['type']}"]
    for key, value in msg.items():
        if key != "type":
            lines.append(f"{key} {value}")
    return "\n".join(lines) + "\n"


def decode_body(body: str) -> dict:
    msg = {}
    for ln in body.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        key, _, value = ln.partition(" ")
        msg[key] = value
    if "type" not in msg:
        raise ProtocolError("message missing type line")
    return msg


def send_raw(sock: socket.socket, msg: dict) -> None:
    body = encode_body(msg).encode("utf-8")
    sock.sendall(str(len(body)).encode("ascii") + b"\n" + body)


def recv_raw(sock_file) -> dict | None:
    header = sock_file.readline()
    if not header:
        return None
    try:
        length = int(header.strip())
    except ValueError:
        raise ProtocolError(f"bad length header {header!r}")
    if length < 0 or length > 64 * 1024 * 1024:
        raise ProtocolError("unreasonable message length")
    body = sock_file.read(length)
    if len(body) != length:
        raise ProtocolError("truncated message body")
    return decode_body(body.decode("utf-8"))


# ---------------------------------------------------------------------------
# session state


@dataclass
class SessionState:
    scene: Scene
    profile: str = "day"
    overlay: str = "color"
    pose: Pose = None
    knobs: FidelityPreset = PREVIEW
    waypoints: list = field(default_factory=list)
    frame_counter: int = 0
    session_seed: int = 0
    margin: float = 0.1
    rejected: bool = False

    def settings(self) -> RenderSettings:
        mode = "unlit" if self.profile == "unlit" else "lit"
        return self.knobs.to_settings(mode)


def default_start_pose(scene: Scene, height: float = 1.6, margin: float = 0.1) -> Pose:
    """First valid pose from a deterministic sweep around the scene center."""
    center = (scene.bounds.lo + scene.bounds.hi) * 0.5
    heights = [height, float(center[1])]
    offsets = [(0.0, 0.0)]
    for radius in (0.5, 1.0, 1.5, 2.0):
        offsets += [(radius, 0.0), (-radius, 0.0), (0.0, radius), (0.0, -radius),
                    (radius, radius), (-radius, -radius)]
    for h in heights:
        for dx, dz in offsets:
            pose = Pose(position=[center[0] + dx, h, center[2] + dz], yaw=0.0, pitch=0.0)
            if validate_pose(pose, scene, margin):
                return pose
    raise ProtocolError("no valid start pose in scene")


def apply_input(state: SessionState, move, yaw_delta: float, pitch_delta: float) -> SessionState:
    """Move in the yaw frame (planar) and turn; invalid moves keep position.

    Rotation always applies; pitch clamps to [-89, 89], yaw wraps.
    """
    yaw = (state.pose.yaw + yaw_delta) % 360.0
    pitch = min(89.0, max(-89.0, state.pose.pitch + pitch_delta))
    rad = np.radians(state.pose.yaw)
    fwd = np.array([np.sin(rad), 0.0, np.cos(rad)])
    right = np.array([np.cos(rad), 0.0, -np.sin(rad)])
    mx, my, mz = (float(v) for v in move)
    new_pos = state.pose.position + mx * right + np.array([0.0, my, 0.0]) + mz * fwd
    candidate = Pose(position=new_pos, yaw=yaw, pitch=pitch)
    if validate_pose(candidate, state.scene, state.margin):
        return replace(state, pose=candidate, rejected=False)
    kept = Pose(position=state.pose.position.copy(), yaw=yaw, pitch=pitch)
    return replace(state, pose=kept, rejected=(mx, my, mz) != (0.0, 0.0, 0.0))


def _overlay_image(state: SessionState, frame) -> np.ndarray:
    if state.overlay == "color":
        return frame.color
    if state.overlay == "depth":
        return (frame.depth_persp >> 8).astype(np.uint8)
    if state.overlay == "normals":
        return frame.normals
    if state.overlay == "labels":
        return display_palette()[frame.labels]
    raise ProtocolError(f"unknown overlay {state.overlay!r}")


# ---------------------------------------------------------------------------
# websocket framing (server side, text frames only)


def _ws_accept_key(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def ws_send(sock: socket.socket, body: str) -> None:
    payload = body.encode("utf-8")
    n = len(payload)
    if n < 126:
        header = struct.pack("!BB", 0x81, n)
    elif n < 65536:
        header = struct.pack("!BBH", 0x81, 126, n)
    else:
        header = struct.pack("!BBQ", 0x81, 127, n)
    sock.sendall(header + payload)


def ws_recv(sock_file) -> str | None:
    while True:
        head = sock_file.read(2)
        if len(head) < 2:
            return None
        b0, b1 = head
        opcode = b0 & 0x0F
        masked = b1 & 0x80
        length = b1 & 0x7F
        if length == 126:
            length = struct.unpack("!H", sock_file.read(2))[0]
        elif length == 127:
            length = struct.unpack("!Q", sock_file.read(8))[0]
        mask = sock_file.read(4) if masked else b"\x00\x00\x00\x00"
        data = bytearray(sock_file.read(length))
        if masked:
            for i in range(len(data)):
                data[i] ^= mask[i % 4]
        if opcode == 0x8:  # close
            return None
        if opcode in (0x9, 0xA):  # ping/pong: ignore
            continue
        return bytes(data).decode("utf-8")


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


# ---------------------------------------------------------------------------
# server


class Server:
    """Capture service bound to a TCP port; start()/stop() for embedding."""

    def __init__(
        self,
        scene: Scene | str,
        port: int = 0,
        host: str = "127.0.0.1",
        out_dir: str | Path = ".",
        static_dir: str | Path | None = None,
        preview: CameraIntrinsics | None = None,
        capture_intrinsics: CameraIntrinsics | None = None,
        margin: float = 0.1,
        session_seed: int = 0,
        start_pose: Pose | None = None,
    ):
        self.scene = builtin_scene(scene) if isinstance(scene, str) else scene
        self.out_dir = Path(out_dir)
        self.static_dir = Path(static_dir) if static_dir else None
        self.preview = preview or CameraIntrinsics(320, 240, 60.0, 0.05)
        self.capture_intrinsics = capture_intrinsics or self.scene.camera_defaults
        self.margin = margin
        self.session_seed = session_seed
        self.start_pose = start_pose or default_start_pose(self.scene, margin=margin)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self.port = self._sock.getsockname()[1]
        self._stop = threading.Event()
        self._session_lock = threading.Lock()
        self._thread = None
        self._export_counter = 0
        self._capture_counter = 0

    # -- lifecycle

    def start(self) -> "Server":
        self._sock.listen(4)
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stop.is_set():
                self._stop.wait(0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            threading.Thread(target=self._dispatch, args=(conn,), daemon=True).start()

    # -- connection dispatch

    def _dispatch(self, conn: socket.socket) -> None:
        try:
            first = conn.recv(4, socket.MSG_PEEK)
            if first.startswith(b"GET") or first.startswith(b"HEAD"):
                self._handle_http(conn)
            else:
                self._run_session(conn, ws=False)
        except (OSError, ProtocolError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def _handle_http(self, conn: socket.socket) -> None:
        f = conn.makefile("rb")
        request = f.readline().decode("latin-1").strip()
        headers = {}
        while True:
            ln = f.readline().decode("latin-1").strip()
            if not ln:
                break
            key, _, value = ln.partition(":")
            headers[key.strip().lower()] = value.strip()
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            accept = _ws_accept_key(key)
            conn.sendall(
                (
                    "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
                ).encode("ascii")
            )
            self._run_session(conn, ws=True, sock_file=f)
            return
        path = request.split()[1] if len(request.split()) >= 2 else "/"
        self._serve_static(conn, path)

    def _serve_static(self, conn: socket.socket, path: str) -> None:
        if self.static_dir is None:
            body = b"capture service is running; connect a viewer over WebSocket\n"
            conn.sendall(
                b"HTTP/1.1 200 OK\r\nContent-Type: text/plain\r\n"
                + f"Content-Length: {len(body)}\r\n\r\n".encode("ascii")
                + body
            )
            return
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            conn.sendall(b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\n\r\n")
            return
        data = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        conn.sendall(
            f"HTTP/1.1 200 OK\r\nContent-Type: {ctype}\r\nContent-Length: {len(data)}\r\n\r\n".encode("ascii")
            + data
        )

    # -- the session protocol

    def _run_session(self, conn: socket.socket, ws: bool, sock_file=None) -> None:
        if not self._session_lock.acquire(blocking=False):
            self._send(conn, ws, {"type": "error", "message": "busy: another session is active"})
            return
        try:
            f = sock_file or conn.makefile("rb")
            state = SessionState(
                scene=self.scene,
                pose=self.start_pose,
                session_seed=self.session_seed,
                margin=self.margin,
            )
            msg = self._recv(f, ws)
            if msg is None:
                return
            if msg.get("type") != "hello" or msg.get("version") != str(PROTOCOL_VERSION):
                self._send(conn, ws, {
                    "type": "error",
                    "message": f"version mismatch: server speaks {PROTOCOL_VERSION}",
                })
                return
            self._send(conn, ws, {
                "type": "hello",
                "version": PROTOCOL_VERSION,
                "scene": self.scene.name,
                "width": self.preview.width,
                "height": self.preview.height,
                "overlays": ",".join(OVERLAYS),
                "profiles": ",".join(self.scene.profile_names),
            })
            self._send_frame(conn, ws, state)

            while True:
                msg = self._recv(f, ws)
                if msg is None:
                    return
                try:
                    state, reply_needed, extra, meta = self._apply_message(state, msg)
                except ProtocolError as exc:
                    self._send(conn, ws, {"type": "error", "message": str(exc)})
                    return
                for m in extra:
                    self._send(conn, ws, m)
                # latest-state-wins: skip the render if more input is queued
                if reply_needed or not self._input_pending(conn, f, ws):
                    self._send_frame(conn, ws, state, extra_meta=meta)
        finally:
            self._session_lock.release()

    def _apply_message(self, state: SessionState, msg: dict):
        """Returns (new_state, reply_required, extra_messages, frame_meta)."""
        kind = msg.get("type")
        extra = []
        meta = {}
        if kind == "input":
            move = [float(v) for v in msg.get("move", "0 0 0").split()]
            if len(move) != 3:
                raise ProtocolError("input move needs three numbers")
            yaw = float(msg.get("yaw", "0"))
            pitch = float(msg.get("pitch", "0"))
            state = apply_input(state, move, yaw, pitch)
            return state, False, extra, meta
        if kind == "set":
            key = msg.get("key", "")
            value = msg.get("value", "")
            if key == "overlay":
                if value not in OVERLAYS:
                    raise ProtocolError(f"unknown overlay {value!r}")
                state = replace(state, overlay=value)
            elif key == "lighting":
                if value not in state.scene.lights:
                    raise ProtocolError(f"unknown lighting profile {value!r}")
                state = replace(state, profile=value)
            elif key in _KNOB_KEYS:
                knobs = _set_knob(state.knobs, key, value)
                state = replace(state, knobs=knobs)
            else:
                raise ProtocolError(f"unknown setting {key!r}")
            return state, True, extra, meta
        if kind == "waypoint":
            p = state.pose
            wp = canonical_pose(p.position[0], p.position[2], p.position[1], p.yaw, p.pitch)
            state.waypoints.append(wp)
            return state, True, extra, meta
        if kind == "export_trajectory":
            if not state.waypoints:
                raise ProtocolError("no waypoints recorded")
            traj = Trajectory(
                config=TrajectoryConfig(
                    seed=state.session_seed,
                    count=len(state.waypoints),
                    mode="manual",
                    height=float(state.waypoints[0].position[1]),
                    margin=state.margin,
                ),
                poses=list(state.waypoints),
                scene_name=state.scene.name,
            )
            text = serialize_trajectory(traj)
            self.out_dir.mkdir(parents=True, exist_ok=True)
            name = f"trajectory_{self._export_counter:03d}.traj"
            self._export_counter += 1
            (self.out_dir / name).write_text(text, encoding="utf-8")
            extra.append({
                "type": "trajectory",
                "name": name,
                "count": len(state.waypoints),
                "text": base64.b64encode(text.encode("utf-8")).decode("ascii"),
            })
            meta["trajectory_file"] = name
            return state, True, extra, meta
        if kind == "capture":
            cap_dir = self.out_dir / "captures"
            seed = (state.session_seed ^ self._capture_counter) & 0xFFFFFFFFFFFFFFFF
            settings = HIGH.to_settings("unlit" if state.profile == "unlit" else "lit")
            frame = render_frame(
                state.scene, state.pose, state.profile, settings,
                self.capture_intrinsics, seed,
            )
            export_frame(frame, cap_dir, index=self._capture_counter)
            meta["captured"] = self._capture_counter
            self._capture_counter += 1
            return state, True, extra, meta
        raise ProtocolError(f"unknown message type {kind!r}")

    # -- plumbing

    def _send(self, conn, ws: bool, msg: dict) -> None:
        if ws:
            ws_send(conn, encode_body(msg))
        else:
            send_raw(conn, msg)

    def _recv(self, f, ws: bool) -> dict | None:
        if ws:
            body = ws_recv(f)
            return None if body is None else decode_body(body)
        return recv_raw(f)

    def _input_pending(self, conn, f, ws: bool) -> bool:
        try:
            readable, _, _ = select.select([conn], [], [], 0)
        except (OSError, ValueError):
            return False
        return bool(readable)

    def _send_frame(self, conn, ws: bool, state: SessionState, extra_meta=None) -> None:
        seed = (state.session_seed ^ state.frame_counter) & 0xFFFFFFFFFFFFFFFF
        frame = render_frame(
            state.scene, state.pose, state.profile, state.settings(), self.preview, seed
        )
        state.frame_counter += 1
        img = _overlay_image(state, frame)
        p = state.pose
        msg = {
            "type": "frame",
            "seq": state.frame_counter,
            "overlay": state.overlay,
            "lighting": state.profile,
            "width": img.shape[1],
            "height": img.shape[0],
            "pose": "%.9g %.9g %.9g %.9g %.9g"
            % (p.position[0], p.position[2], p.position[1], p.yaw, p.pitch),
            "waypoints": len(state.waypoints),
            "rejected": 1 if state.rejected else 0,
            "png": base64.b64encode(png_bytes(img)).decode("ascii"),
        }
        if extra_meta:
            msg.update(extra_meta)
        self._send(conn, ws, msg)


def _set_knob(knobs: FidelityPreset, key: str, value: str) -> FidelityPreset:
    try:
        if key == "render_scale":
            v = min(1.0, max(0.05, float(value)))
            return replace(knobs, name="custom", render_scale=v)
        iv = int(value)
        if key == "mip_bias":
            return replace(knobs, name="custom", mip_bias=max(0, iv))
        if key == "shadow_samples":
            return replace(knobs, name="custom", shadow_samples=max(1, iv))
        if key == "reflection_depth":
            return replace(knobs, name="custom", reflection_depth=max(0, iv))
        if key == "aa_samples":
            return replace(knobs, name="custom", aa_samples=4 if iv >= 4 else 1)
        if key == "lod_index":
            return replace(knobs, name="custom", lod_index=max(0, iv))
    except ValueError:
        raise ProtocolError(f"bad value {value!r} for {key}")
    raise ProtocolError(f"unknown knob {key!r}")
