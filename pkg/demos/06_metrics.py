"""Scoring predictions: depth, surface normals, and segmentation metrics.

There is no trained network here, so we fake "predictions" by corrupting
the ground truth in controlled ways and watch each metric respond.
"""

import numpy as np

from aip import builtin_scene, render_frame, Pose, RenderSettings
from aip.annotate import decode_normal_image
from aip.metrics import depth_metrics, normal_metrics, seg_metrics, report_row, report_table
from aip.scene import CameraIntrinsics

scene = builtin_scene("brown_room")
intr = CameraIntrinsics(160, 120, 60.0, 0.05)
frame = render_frame(
    scene, Pose(position=[0.3, 1.6, -1.0], yaw=25.0, pitch=-5.0),
    "day", RenderSettings(shadow_samples=2), intr,
)

rng = np.random.default_rng(0)

# --- depth: multiply by lognormal noise and report the Eigen-style suite
gt_depth = frame.depth_persp.astype(np.float64) / 65535.0 * scene.depth_range
noise = np.exp(rng.normal(0.0, 0.08, gt_depth.shape))
pred_depth = np.clip(gt_depth * noise, 1e-3, None)
mask = gt_depth > 0
m = depth_metrics(pred_depth, gt_depth, mask)
rows = [report_row(m, "noisy-depth", "gt", goal="-")]
print(report_table(rows, "depth"))

# --- normals: rotate every normal a few degrees around a random axis
vecs, valid = decode_normal_image(frame.normals)
axis = rng.normal(size=3)
axis /= np.linalg.norm(axis)
angle = np.radians(8.0)
k = axis
rotated = (
    vecs * np.cos(angle)
    + np.cross(k, vecs) * np.sin(angle)
    + k[None, None, :] * (vecs @ k)[..., None] * (1 - np.cos(angle))
)
mn = normal_metrics(rotated, vecs, valid)
print()
print(report_table([report_row(mn, "rotated-8deg", "gt", goal="-")], "normal"))

# --- segmentation: relabel a horizontal band as "other"
pred_labels = frame.labels.copy()
pred_labels[50:70, :] = 0
ms = seg_metrics(pred_labels, frame.labels, len(scene.classes))
print()
print(report_table([report_row(ms, "banded-labels", "gt", goal="-")], "seg"))
present = [
    f"{scene.classes[c]}={v:.2f}"
    for c, v in enumerate(ms.iou)
    if v is not None and v < 1.0
]
print("classes hurt by the band:", ", ".join(present))
