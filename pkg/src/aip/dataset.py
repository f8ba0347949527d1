"""Frame export, manifests, and deterministic train/test splitting.

All buffers are stored as PNG (lossless): color and normals as 8-bit RGB,
both depths as 16-bit grayscale, labels as 8-bit grayscale plus a palette
legend mapping class ids to names and display colors.  The manifest is
line-delimited text (header ``aipman v1``) carrying per-frame poses, relative
paths, and SHA-256 digests, so any single-byte corruption is detectable.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ManifestError
from .render import FrameOutput
from .rng import SplitMix64
from .annotate import round_half_away

MANIFEST_HEADER = "aipman v1"
MANIFEST_NAME = "manifest.txt"
LEGEND_NAME = "legend.txt"
SPLIT_HEADER = "aipsplit v1"

_CHANNEL_SUFFIX = {
    "color": "color",
    "depth_persp": "depth_persp",
    "depth_ortho": "depth_ortho",
    "normals": "normals",
    "labels": "labels",
}

PNG_COMPRESS_LEVEL = 6  # pinned for byte-stable output


def frame_basename(index: int) -> str:
    return f"frame_{index:05d}"


def _save_png(path: Path, arr: np.ndarray) -> None:
    if arr.dtype == np.uint16:
        im = Image.fromarray(arr)
        if im.mode != "I;16":
            im = im.convert("I;16")
    else:
        im = Image.fromarray(arr)
    im.save(path, format="PNG", compress_level=PNG_COMPRESS_LEVEL)


def _load_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.dtype == np.int32:  # PIL mode "I" for some 16-bit files
        arr = arr.astype(np.uint16)
    return arr


def png_bytes(arr: np.ndarray) -> bytes:
    """Encode an image array to PNG bytes (same settings as file export)."""
    buf = io.BytesIO()
    if arr.dtype == np.uint16:
        im = Image.fromarray(arr)
        if im.mode != "I;16":
            im = im.convert("I;16")
    else:
        im = Image.fromarray(arr)
    im.save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def decode_png_bytes(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im)
    if arr.dtype == np.int32:
        arr = arr.astype(np.uint16)
    return arr


def display_palette(n: int = 256) -> np.ndarray:
    """Deterministic label display colors; id 0 ("other") is gray."""
    pal = np.zeros((n, 3), dtype=np.uint8)
    pal[0] = (90, 90, 90)
    for i in range(1, n):
        hue = (i * 0.6180339887498949) % 1.0  # golden-ratio spacing
        sat = 0.65 if i % 2 else 0.85
        val = 0.95 if i % 3 else 0.70
        pal[i] = _hsv_to_rgb8(hue, sat, val)
    return pal


def _hsv_to_rgb8(h, s, v):
    i = int(h * 6.0) % 6
    f = h * 6.0 - int(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return tuple(int(round_half_away(255.0 * c)) for c in rgb)


def write_legend(path: Path, class_names) -> None:
    pal = display_palette(max(256, len(class_names)))
    lines = ["# id name r g b"]
    for i, name in enumerate(class_names):
        c = pal[i]
        lines.append(f"{i} {name} {c[0]} {c[1]} {c[2]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_frame(frame: FrameOutput, directory: str | Path, index: int = 0) -> dict:
    """Write the five buffers as PNGs; returns {channel: path}.

    Also writes the label legend once per directory.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    base = frame_basename(index)
    paths = {}
    buffers = {
        "color": frame.color,
        "depth_persp": frame.depth_persp,
        "depth_ortho": frame.depth_ortho,
        "normals": frame.normals,
        "labels": frame.labels,
    }
    for channel, arr in buffers.items():
        p = directory / f"{base}_{_CHANNEL_SUFFIX[channel]}.png"
        _save_png(p, arr)
        paths[channel] = p
    legend = directory / LEGEND_NAME
    class_names = frame.meta.get("class_names")
    if class_names and not legend.exists():
        write_legend(legend, class_names)
    return paths


def load_frame_buffers(directory: str | Path, index: int) -> dict:
    directory = Path(directory)
    base = frame_basename(index)
    out = {}
    for channel, suffix in _CHANNEL_SUFFIX.items():
        out[channel] = _load_png(directory / f"{base}_{suffix}.png")
    return out


# ---------------------------------------------------------------------------
# manifest


@dataclass
class Manifest:
    header: dict
    records: list  # per frame: {"frame", "pose_fields", channel: (relpath, sha256)}
    path: Path | None = None


def _pose_fields(pose) -> tuple:
    return (
        "%.9g" % pose.position[0],
        "%.9g" % pose.position[2],
        "%.9g" % pose.position[1],
        "%.9g" % pose.yaw,
        "%.9g" % pose.pitch,
    )


def write_manifest(path: str | Path, header: dict, records: list) -> Path:
    path = Path(path)
    lines = [MANIFEST_HEADER]
    for key in ("scene", "scenario", "trajectory_digest", "tool_version"):
        if key in header:
            lines.append(f"{key} {header[key]}")
    for r in sorted(records, key=lambda r: r["frame"]):
        pose = r["pose"]
        fields = _pose_fields(pose) if not isinstance(pose, tuple) else pose
        parts = [f"frame {r['frame']}", "pose " + " ".join(fields)]
        for channel in _CHANNEL_SUFFIX:
            rel, sha = r[channel]
            parts.append(f"{channel} {rel} {sha}")
        lines.append(" ".join(parts))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ManifestError(f"expected header {MANIFEST_HEADER!r}")
    header = {}
    records = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "frame":
            try:
                rec: dict = {"frame": int(parts[1])}
                if parts[2] != "pose":
                    raise ValueError("missing pose")
                rec["pose_fields"] = tuple(parts[3:8])
                [float(v) for v in rec["pose_fields"]]
                rest = parts[8:]
                if len(rest) != 3 * len(_CHANNEL_SUFFIX):
                    raise ValueError("wrong channel count")
                for i in range(0, len(rest), 3):
                    channel, rel, sha = rest[i : i + 3]
                    if channel not in _CHANNEL_SUFFIX or len(sha) != 64:
                        raise ValueError(f"bad channel entry {channel!r}")
                    rec[channel] = (rel, sha)
                records.append(rec)
            except (ValueError, IndexError) as exc:
                raise ManifestError(f"bad manifest record {ln!r} ({exc})")
        elif len(parts) >= 2:
            header[parts[0]] = " ".join(parts[1:])
        else:
            raise ManifestError(f"bad manifest line {ln!r}")
    if not records:
        raise ManifestError("manifest has no frame records")
    return Manifest(header=header, records=records, path=path)


@dataclass
class VerifyReport:
    ok: bool
    missing: list  # (frame, channel, relpath)
    corrupt: list  # (frame, channel, relpath)
    checked: int


def verify_manifest(path: str | Path) -> VerifyReport:
    """Re-hash every referenced file; reports missing and corrupt entries."""
    manifest = read_manifest(path)
    root = Path(path).parent
    missing, corrupt = [], []
    checked = 0
    for rec in manifest.records:
        for channel in _CHANNEL_SUFFIX:
            rel, sha = rec[channel]
            p = root / rel
            if not p.exists():
                missing.append((rec["frame"], channel, rel))
                continue
            checked += 1
            if hashlib.sha256(p.read_bytes()).hexdigest() != sha:
                corrupt.append((rec["frame"], channel, rel))
    return VerifyReport(ok=not missing and not corrupt, missing=missing, corrupt=corrupt, checked=checked)


# ---------------------------------------------------------------------------
# train/test split


@dataclass
class Split:
    train: list
    test: list
    ratio: float
    seed: int


def split(manifest_or_n, ratio: float, seed: int) -> Split:
    """Deterministic Fisher-Yates split of frame indices.

    ``round(ratio * N)`` indices (halves away from zero) go to train.
    """
    if isinstance(manifest_or_n, Manifest):
        n = len(manifest_or_n.records)
    else:
        n = int(manifest_or_n)
    if n < 2:
        raise ManifestError("split needs at least 2 records")
    if not (0.0 < ratio < 1.0):
        raise ManifestError("ratio must be in (0, 1)")
    idx = list(range(n))
    rng = SplitMix64(seed)
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    n_train = int(round_half_away(ratio * n))
    return Split(train=idx[:n_train], test=idx[n_train:], ratio=ratio, seed=seed)


def save_split(s: Split, path: str | Path) -> Path:
    path = Path(path)
    lines = [SPLIT_HEADER, "ratio %.9g" % s.ratio, f"seed {s.seed}"]
    lines += [f"train {i}" for i in s.train]
    lines += [f"test {i}" for i in s.test]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_split(path: str | Path) -> Split:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0] != SPLIT_HEADER:
        raise ManifestError(f"expected header {SPLIT_HEADER!r}")
    ratio, seed = 0.0, 0
    train, test = [], []
    for ln in lines[1:]:
        key, val = ln.split()
        if key == "ratio":
            ratio = float(val)
        elif key == "seed":
            seed = int(val)
        elif key == "train":
            train.append(int(val))
        elif key == "test":
            test.append(int(val))
        else:
            raise ManifestError(f"bad split line {ln!r}")
    return Split(train=train, test=test, ratio=ratio, seed=seed)
