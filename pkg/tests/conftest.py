import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aip.scene import parse_scene


MINIMAL_SCENE = """\
aipscene v1
scene testbox
bounds -5 -5 -5 5 5 5
camera 64 64 90.0 0.01
classes thing

material plain
  albedo 0.5 0.4 0.3

object tri
  class thing
  material plain
  mesh inline
    v -1.0 -1.0 3.0
    v 1.0 -1.0 3.0
    v 0.0 1.0 3.0
    f 0 1 2
  endmesh

profile day
  ambient 0.2 0.2 0.2
  light directional 0.0 0.0 1.0 1.0 1.0 1.0 1.0 0.0
"""


@pytest.fixture
def minimal_scene():
    return parse_scene(MINIMAL_SCENE)


def random_triangle_soup(rng, n_tris, extent=4.0, min_area=1e-6):
    """Random non-degenerate triangles inside a box around the origin."""
    tris = []
    while len(tris) < n_tris:
        pts = rng.uniform(-extent, extent, size=(3, 3))
        area = 0.5 * np.linalg.norm(np.cross(pts[1] - pts[0], pts[2] - pts[0]))
        if area > min_area:
            tris.append(pts)
    return np.array(tris)


def soup_scene_text(tris, bounds=8.0):
    """Scene file with each triangle as its own object (ids in order)."""
    lines = [
        "aipscene v1",
        "scene soup",
        f"bounds -{bounds} -{bounds} -{bounds} {bounds} {bounds} {bounds}",
        "camera 64 64 90.0 0.001",
        "classes thing",
        "material plain",
        "  albedo 0.5 0.5 0.5",
    ]
    for i, t in enumerate(tris):
        lines.append(f"object t{i:04d}")
        lines.append("  class thing")
        lines.append("  material plain")
        lines.append("  mesh inline")
        for p in t:
            lines.append(f"    v {float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
        lines.append("    f 0 1 2")
        lines.append("  endmesh")
    lines += [
        "profile day",
        "  ambient 0.3 0.3 0.3",
        "  light directional 0.0 -1.0 0.0 1.0 1.0 1.0 1.0 0.0",
    ]
    return "\n".join(lines) + "\n"
