"""Scenario matrix expansion and cross-scenario capture.

A scenario is (map, lighting profile, fidelity preset); the core contract is
that capturing the same trajectory under any two scenarios over the same map
yields byte-identical ground-truth files, while color files track the
lighting/fidelity knobs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .builtins import builtin_scene
from .dataset import (
    MANIFEST_NAME,
    export_frame,
    load_frame_buffers,
    read_manifest,
    write_manifest,
)
from .errors import MatrixError, TrajectoryError
from .probe import Trajectory, serialize_trajectory, validate_pose
from .render import RenderSettings, render_frame
from .scene import CameraIntrinsics, Scene

MATRIX_HEADER = "aipmatrix v1"
LOD_LAST = 255  # requested LOD beyond any object's list selects its coarsest

CHANNELS = ("color", "depth_persp", "depth_ortho", "normals", "labels")
GT_CHANNELS = CHANNELS[1:]


@dataclass(frozen=True)
class FidelityPreset:
    name: str
    render_scale: float
    mip_bias: int
    shadow_samples: int
    reflection_depth: int
    aa_samples: int
    lod_index: int

    def to_settings(self, shading_mode: str = "lit") -> RenderSettings:
        return RenderSettings(
            render_scale=self.render_scale,
            mip_bias=self.mip_bias,
            shadow_samples=self.shadow_samples,
            reflection_depth=self.reflection_depth,
            aa_samples=self.aa_samples,
            lod_index=self.lod_index,
            shading_mode=shading_mode,
        )


HIGH = FidelityPreset("high", 1.0, 0, 16, 2, 4, 0)
LOW = FidelityPreset("low", 0.5, 2, 1, 0, 1, LOD_LAST)
PRESETS = {"high": HIGH, "low": LOW}


@dataclass(frozen=True)
class Scenario:
    map: str
    lighting: str
    fidelity: FidelityPreset

    @property
    def id(self) -> str:
        return f"{self.map}/{self.lighting}/{self.fidelity.name}"

    def settings(self) -> RenderSettings:
        mode = "unlit" if self.lighting == "unlit" else "lit"
        return self.fidelity.to_settings(mode)


def _resolve_fidelity(f, presets=None) -> FidelityPreset:
    if isinstance(f, FidelityPreset):
        return f
    table = dict(PRESETS)
    if presets:
        table.update(presets)
    if f not in table:
        raise MatrixError(f"unknown fidelity preset {f!r}")
    return table[f]


def expand_matrix(maps, lightings, fidelities, presets=None) -> list:
    """Full cross product, maps outer / lighting / fidelity inner.

    The unlit lighting pairs only with the high preset.  Duplicate scenario
    ids raise.
    """
    if not maps or not lightings or not fidelities:
        raise MatrixError("maps, lightings, and fidelities must be non-empty")
    resolved = [_resolve_fidelity(f, presets) for f in fidelities]
    out = []
    seen = set()
    for m in maps:
        for l in lightings:
            for f in resolved:
                if l == "unlit" and f.name != "high":
                    continue
                sc = Scenario(map=m, lighting=l, fidelity=f)
                if sc.id in seen:
                    raise MatrixError(f"duplicate scenario id {sc.id!r}")
                seen.add(sc.id)
                out.append(sc)
    return out


def parse_matrix_config(text: str):
    """Matrix config file -> (maps, lightings, fidelities, presets)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != MATRIX_HEADER:
        raise MatrixError(f"expected header {MATRIX_HEADER!r}")
    maps, lightings, fidelities = [], [], []
    presets = {}
    for ln in lines[1:]:
        parts = ln.split()
        key = parts[0]
        if key == "maps":
            maps = parts[1:]
        elif key == "lightings":
            lightings = parts[1:]
        elif key == "fidelities":
            fidelities = parts[1:]
        elif key == "preset":
            if len(parts) != 8:
                raise MatrixError(
                    "preset: expected name render_scale mip_bias shadow_samples "
                    "reflection_depth aa_samples lod_index"
                )
            presets[parts[1]] = FidelityPreset(
                name=parts[1],
                render_scale=float(parts[2]),
                mip_bias=int(parts[3]),
                shadow_samples=int(parts[4]),
                reflection_depth=int(parts[5]),
                aa_samples=int(parts[6]),
                lod_index=int(parts[7]),
            )
        else:
            raise MatrixError(f"unknown matrix directive {key!r}")
    return maps, lightings, fidelities, presets


@dataclass
class CaptureReport:
    scenario_id: str
    directory: Path
    frames: int
    files: int
    digest: str  # sha256 over the manifest records (tree content digest)


def scenario_dir(out_root: str | Path, scenario: Scenario) -> Path:
    return Path(out_root) / scenario.map / scenario.lighting / scenario.fidelity.name


def capture_scenario(
    scenario: Scenario,
    trajectory: Trajectory,
    intrinsics: CameraIntrinsics | None = None,
    out_root: str | Path = ".",
    scene: Scene | None = None,
) -> CaptureReport:
    """Render every trajectory pose under the scenario and export frames.

    frame_seed = trajectory seed XOR pose index.  Returns counts plus a
    content digest that is bit-stable across runs.
    """
    if scene is None:
        scene = builtin_scene(scenario.map)
    if intrinsics is None:
        intrinsics = scene.camera_defaults
    margin = trajectory.config.margin
    for i, pose in enumerate(trajectory.poses):
        if not validate_pose(pose, scene, margin):
            raise TrajectoryError(f"pose {i} invalid for scene {scene.name!r}")

    out_dir = scenario_dir(out_root, scenario)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = scenario.settings()
    traj_digest = hashlib.sha256(serialize_trajectory(trajectory).encode()).hexdigest()

    records = []
    file_count = 0
    for i, pose in enumerate(trajectory.poses):
        frame_seed = (trajectory.config.seed ^ i) & 0xFFFFFFFFFFFFFFFF
        frame = render_frame(scene, pose, scenario.lighting, settings, intrinsics, frame_seed)
        frame.meta["scenario"] = scenario.id
        paths = export_frame(frame, out_dir, index=i)
        file_count += len(paths)
        record = {"frame": i, "pose": pose}
        for channel, p in paths.items():
            data = Path(p).read_bytes()
            record[channel] = (Path(p).name, hashlib.sha256(data).hexdigest())
        records.append(record)

    header = {
        "scene": scene.name,
        "scenario": scenario.id,
        "trajectory_digest": traj_digest,
        "tool_version": _tool_version(),
    }
    write_manifest(out_dir / MANIFEST_NAME, header, records)
    digest = hashlib.sha256()
    for r in records:
        for channel in CHANNELS:
            digest.update(r[channel][1].encode())
    return CaptureReport(
        scenario_id=scenario.id,
        directory=out_dir,
        frames=len(records),
        files=file_count,
        digest=digest.hexdigest(),
    )


def _tool_version() -> str:
    from . import __version__

    return __version__


@dataclass
class GtDiffReport:
    frames: int
    gt_equal: dict  # channel -> bool (byte equality over all frames)
    color_mad: float  # mean absolute difference of color, [0,1] units
    mismatched_frames: dict  # channel -> list of frame indices that differ

    @property
    def all_gt_equal(self) -> bool:
        return all(self.gt_equal.values())


def diff_ground_truth(dir_a: str | Path, dir_b: str | Path) -> GtDiffReport:
    """Byte-compare GT channels and measure color MAD between two captures."""
    man_a = read_manifest(Path(dir_a) / MANIFEST_NAME)
    man_b = read_manifest(Path(dir_b) / MANIFEST_NAME)
    if len(man_a.records) != len(man_b.records):
        raise MatrixError(
            f"mismatched manifests: {len(man_a.records)} vs {len(man_b.records)} frames"
        )
    for ra, rb in zip(man_a.records, man_b.records):
        if ra["pose_fields"] != rb["pose_fields"]:
            raise MatrixError(f"mismatched manifests: frame {ra['frame']} poses differ")

    mismatched = {ch: [] for ch in GT_CHANNELS}
    mad_sum = 0.0
    mad_n = 0
    for ra, rb in zip(man_a.records, man_b.records):
        for ch in GT_CHANNELS:
            if ra[ch][1] != rb[ch][1]:  # digests differ -> bytes differ
                mismatched[ch].append(ra["frame"])
        a = load_frame_buffers(dir_a, ra["frame"])["color"].astype(np.float64)
        b = load_frame_buffers(dir_b, rb["frame"])["color"].astype(np.float64)
        mad_sum += float(np.abs(a - b).mean()) / 255.0
        mad_n += 1
    return GtDiffReport(
        frames=len(man_a.records),
        gt_equal={ch: not bad for ch, bad in mismatched.items()},
        color_mad=mad_sum / mad_n if mad_n else 0.0,
        mismatched_frames=mismatched,
    )
