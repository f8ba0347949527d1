"""The two depth definitions, normal color coding, and label palettes.

Perspective depth measures the true ray distance to each pixel's surface
point; orthographic depth projects that point onto the camera's forward
axis (what most depth sensors record).  Away from the image center the two
disagree, and the gap grows with the field of view.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from aip import builtin_scene, Pose
from aip.render import render_gt_hits, gt_plane_dirs
from aip.scene import CameraIntrinsics
from aip.annotate import encode_depth, decode_normal_image
from aip.dataset import display_palette
from aip import render_frame, RenderSettings

out = Path(__file__).parent / "out" / "ground_truths"
out.mkdir(parents=True, exist_ok=True)

scene = builtin_scene("brown_room")
pose = Pose(position=[0.0, 1.6, 0.0], yaw=180.0, pitch=0.0)

# a wide 90-degree lens exaggerates the perspective/orthographic split
intr = CameraIntrinsics(321, 241, 90.0, 0.05)

tri, t, _, _ = render_gt_hits(scene, pose, intr)
dirs = gt_plane_dirs(pose, intr)
dlen = np.linalg.norm(dirs, axis=-1)
persp = t * dlen
ortho = t * np.minimum(dirs @ pose.forward(), dlen)

ratio = persp / ortho
print(f"persp/ortho ratio: center {ratio[120, 160]:.4f}, corner {ratio[0, 0]:.4f}")
print(f"largest gap: {(persp - ortho).max():.3f} m")

# color-band the difference like a contour plot: 1 band per 10 cm
bands = ((persp - ortho) / 0.10).astype(np.int64) % 2
Image.fromarray((bands * 255).astype(np.uint8)).save(out / "persp_vs_ortho_bands.png")

# the same frame through the normal renderer, for the remaining channels
frame = render_frame(scene, pose, "day", RenderSettings(shadow_samples=4), intr)

# normals: six axis directions map to six saturated colors
vecs, valid = decode_normal_image(frame.normals)
up_facing = valid & (vecs[..., 1] > 0.9)
print(f"pixels with an up-facing normal (floor, table top): {up_facing.mean():.1%}")
Image.fromarray(frame.normals).save(out / "normals.png")

# labels: paint with the display palette from the legend
palette = display_palette()
Image.fromarray(palette[frame.labels]).save(out / "labels_colored.png")
print(f"wrote visualizations to {out}")

assert (ortho <= persp).all()
assert int(encode_depth(5.0)) == 32768  # 16-bit encoding, halves away from zero
