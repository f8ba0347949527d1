"""Seeded, replayable camera trajectories.

Poses are drawn from a single splitmix64 stream with a documented draw
order — random mode: x, z, yaw, pitch per candidate; group mode adds walk
steps drawing (angle, yaw-u, pitch-u).  Rejected candidates advance the
stream and are redrawn, bounded at 10000 rejections per pose.  Every pose
component is canonicalized to 9 significant decimal digits at creation, so
save -> load is lossless and re-serialization is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .accel import build_accel
from .errors import TrajectoryError
from .render import Pose
from .rng import SplitMix64
from .scene import Scene

TRAJ_HEADER = "aiptraj v1"
MAX_REJECTIONS = 10000
RANDOM_PITCH_RANGE = 30.0  # random-mode pitch is uniform in [-30, 30]

_AXES = np.array(
    [
        [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0], [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
    ]
)


@dataclass
class TrajectoryConfig:
    seed: int = 0
    count: int = 1
    mode: str = "random"  # "random" | "group" ("manual" for recorded files)
    step_size: float = 0.3  # meters
    look_sensitivity: float = 15.0  # degrees
    group_size: int = 1
    height: float = 1.6  # fixed eye height, meters
    margin: float = 0.3  # min distance from bounds/geometry, meters

    def __post_init__(self):
        if self.count < 1:
            raise TrajectoryError("count must be >= 1")
        if self.mode not in ("random", "group", "manual"):
            raise TrajectoryError(f"unknown mode {self.mode!r}")
        if self.step_size <= 0:
            raise TrajectoryError("step_size must be > 0")
        if self.look_sensitivity <= 0:
            raise TrajectoryError("look_sensitivity must be > 0")
        if self.group_size < 1:
            raise TrajectoryError("group_size must be >= 1")
        if self.mode == "group" and self.group_size > self.count:
            raise TrajectoryError("group mode requires group_size <= count")
        if self.margin < 0:
            raise TrajectoryError("margin must be >= 0")


@dataclass
class Trajectory:
    config: TrajectoryConfig
    poses: list
    scene_name: str
    version: str = TRAJ_HEADER


def _canon(x: float) -> float:
    """Canonical 9-significant-digit value (what the file stores)."""
    return float("%.9g" % float(x))


def canonical_pose(x, z, height, yaw, pitch) -> Pose:
    return Pose(
        position=[_canon(x), _canon(height), _canon(z)],
        yaw=_canon(yaw % 360.0),
        pitch=_canon(min(89.0, max(-89.0, pitch))),
    )


def validate_pose(pose: Pose, scene: Scene, margin: float = 0.1) -> bool:
    """Inside bounds minus margin and clear of geometry by a 6-axis probe."""
    lo = scene.bounds.lo + margin
    hi = scene.bounds.hi - margin
    p = pose.position
    if np.any(p < lo) or np.any(p > hi):
        return False
    if margin > 0:
        accel = build_accel(scene, 0)
        for axis in _AXES:
            if accel.occluded(p, axis, 0.0, margin):
                return False
    return True


def generate(config: TrajectoryConfig, scene: Scene) -> Trajectory:
    """Generate a validated trajectory; same (config, scene) -> same poses."""
    if config.mode == "manual":
        raise TrajectoryError("manual trajectories are recorded, not generated")
    rng = SplitMix64(config.seed)
    lo = scene.bounds.lo + config.margin
    hi = scene.bounds.hi - config.margin
    if np.any(lo >= hi):
        raise TrajectoryError("margin leaves no walkable region")

    def draw_anchor():
        rejections = 0
        while True:
            x = rng.uniform(lo[0], hi[0])
            z = rng.uniform(lo[2], hi[2])
            yaw = rng.uniform(0.0, 360.0)
            pitch = rng.uniform(-RANDOM_PITCH_RANGE, RANDOM_PITCH_RANGE)
            pose = canonical_pose(x, z, config.height, yaw, pitch)
            if validate_pose(pose, scene, config.margin):
                return pose
            rejections += 1
            if rejections >= MAX_REJECTIONS:
                raise TrajectoryError("no valid pose found (rejection bound reached)")

    def draw_step(prev: Pose):
        rejections = 0
        while True:
            theta = rng.uniform(0.0, 2.0 * np.pi)
            u_yaw = rng.uniform(-1.0, 1.0)
            u_pitch = rng.uniform(-1.0, 1.0)
            x = prev.position[0] + config.step_size * np.sin(theta)
            z = prev.position[2] + config.step_size * np.cos(theta)
            yaw = prev.yaw + config.look_sensitivity * u_yaw
            pitch = prev.pitch + config.look_sensitivity * u_pitch / 2.0
            pose = canonical_pose(x, z, config.height, yaw, pitch)
            if validate_pose(pose, scene, config.margin):
                return pose
            rejections += 1
            if rejections >= MAX_REJECTIONS:
                raise TrajectoryError("no valid pose found (rejection bound reached)")

    poses = []
    if config.mode == "random":
        for _ in range(config.count):
            poses.append(draw_anchor())
    else:
        while len(poses) < config.count:
            anchor = draw_anchor()
            poses.append(anchor)
            prev = anchor
            for _ in range(config.group_size - 1):
                if len(poses) >= config.count:
                    break
                prev = draw_step(prev)
                poses.append(prev)
    return Trajectory(config=config, poses=poses, scene_name=scene.name)


def serialize_trajectory(t: Trajectory) -> str:
    c = t.config
    lines = [
        TRAJ_HEADER,
        f"scene {t.scene_name}",
        f"seed {c.seed}",
        f"count {c.count}",
        f"mode {c.mode}",
        "step_size %.9g" % c.step_size,
        "look_sensitivity %.9g" % c.look_sensitivity,
        f"group_size {c.group_size}",
        "height %.9g" % c.height,
        "margin %.9g" % c.margin,
    ]
    for p in t.poses:
        lines.append(
            "pose %.9g %.9g %.9g %.9g %.9g"
            % (p.position[0], p.position[2], p.position[1], p.yaw, p.pitch)
        )
    return "\n".join(lines) + "\n"


def save_trajectory(t: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(serialize_trajectory(t), encoding="utf-8")
    return path


def parse_trajectory(text: str) -> Trajectory:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != TRAJ_HEADER:
        raise TrajectoryError(f"expected header {TRAJ_HEADER!r}")
    fields = {}
    poses = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "pose":
            if len(parts) != 6:
                raise TrajectoryError(f"bad pose record: {ln!r}")
            try:
                x, z, h, yaw, pitch = (float(v) for v in parts[1:])
            except ValueError:
                raise TrajectoryError(f"bad pose record: {ln!r}")
            poses.append(Pose(position=[x, h, z], yaw=yaw, pitch=pitch))
        elif len(parts) == 2:
            fields[parts[0]] = parts[1]
        else:
            raise TrajectoryError(f"bad trajectory line: {ln!r}")
    try:
        config = TrajectoryConfig(
            seed=int(fields["seed"]),
            count=int(fields["count"]),
            mode=fields["mode"],
            step_size=float(fields["step_size"]),
            look_sensitivity=float(fields["look_sensitivity"]),
            group_size=int(fields["group_size"]),
            height=float(fields["height"]),
            margin=float(fields["margin"]),
        )
        scene_name = fields["scene"]
    except KeyError as exc:
        raise TrajectoryError(f"trajectory file missing field {exc}")
    if len(poses) != config.count:
        raise TrajectoryError(f"expected {config.count} poses, file has {len(poses)}")
    return Trajectory(config=config, poses=poses, scene_name=scene_name)


def load_trajectory(path: str | Path, scene: Scene | None = None) -> Trajectory:
    """Parse a trajectory file; if a scene is given, validate every pose."""
    t = parse_trajectory(Path(path).read_text(encoding="utf-8"))
    if scene is not None:
        for i, pose in enumerate(t.poses):
            if not validate_pose(pose, scene, t.config.margin):
                raise TrajectoryError(
                    f"pose {i} is invalid in scene {scene.name!r} "
                    f"(margin {t.config.margin})"
                )
    return t
