"""Synthetic indoor-scene rendering for data-ablation studies.

The package renders identical camera trajectories through triangle-mesh
scenes under switchable lighting profiles and fidelity presets, emitting a
color image plus four pixel-aligned ground-truth buffers (perspective depth,
orthographic depth, surface normals, semantic labels) per pose.  Captures are
reproducible bit-for-bit from seeds, datasets are exported as PNG + manifest,
and an evaluation module scores depth / normal / segmentation predictions.
"""

__version__ = "0.1.0"

from .errors import AipError
from .scene import Scene, SceneObject, Material, Texture, Light, CameraIntrinsics
from .scene import parse_scene, serialize_scene
from .builtins import builtin_scene, builtin_scene_text, BUILTIN_NAMES
from .accel import build_accel, AccelStructure, Hit
from .render import Pose, RenderSettings, FrameOutput, render_frame, primary_ray, shade
from .annotate import (
    DepthEncoding,
    perspective_depth,
    orthographic_depth,
    encode_depth,
    decode_depth,
    encode_normal,
    decode_normal,
    label_of,
)
from .probe import TrajectoryConfig, Trajectory, generate, save_trajectory, load_trajectory, validate_pose
from .ablation import FidelityPreset, Scenario, expand_matrix, capture_scenario, diff_ground_truth
from .dataset import export_frame, split, Split, Manifest, read_manifest, verify_manifest
from .metrics import depth_metrics, normal_metrics, seg_metrics, DepthMetrics, NormalMetrics, SegMetrics

__all__ = [
    "AipError",
    "Scene", "SceneObject", "Material", "Texture", "Light", "CameraIntrinsics",
    "parse_scene", "serialize_scene",
    "builtin_scene", "builtin_scene_text", "BUILTIN_NAMES",
    "build_accel", "AccelStructure", "Hit",
    "Pose", "RenderSettings", "FrameOutput", "render_frame", "primary_ray", "shade",
    "DepthEncoding", "perspective_depth", "orthographic_depth",
    "encode_depth", "decode_depth", "encode_normal", "decode_normal", "label_of",
    "TrajectoryConfig", "Trajectory", "generate", "save_trajectory", "load_trajectory", "validate_pose",
    "FidelityPreset", "Scenario", "expand_matrix", "capture_scenario", "diff_ground_truth",
    "export_frame", "split", "Split", "Manifest", "read_manifest", "verify_manifest",
    "depth_metrics", "normal_metrics", "seg_metrics",
    "DepthMetrics", "NormalMetrics", "SegMetrics",
    "__version__",
]
