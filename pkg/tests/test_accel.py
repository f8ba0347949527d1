import numpy as np
import pytest

from aip.accel import build_accel, build_pack
from aip.render import Pose, primary_ray
from aip.scene import CameraIntrinsics, parse_scene
from conftest import random_triangle_soup, soup_scene_text
from oracles import brute_force_nearest


def _soup_scene(rng, n_tris):
    return parse_scene(soup_scene_text(random_triangle_soup(rng, n_tris)))


def _oracle_arrays(scene):
    """Triangle arrays in the scene's object/triangle id order (pre-BVH)."""
    v0, v1, v2, obj, tri = [], [], [], [], []
    for oi, o in enumerate(scene.objects):
        mesh = o.lods[0]
        w = mesh.positions  # identity transforms in these tests
        for ti, f in enumerate(mesh.indices):
            v0.append(w[f[0]])
            v1.append(w[f[1]])
            v2.append(w[f[2]])
            obj.append(oi)
            tri.append(ti)
    return (
        np.array(v0), np.array(v1), np.array(v2),
        np.array(obj, dtype=np.int64), np.array(tri, dtype=np.int64),
    )


def test_single_triangle_centroid_hit(minimal_scene):
    accel = build_accel(minimal_scene, 0)
    mesh = minimal_scene.objects[0].lods[0]
    centroid = mesh.positions.mean(axis=0)
    origin = np.array([0.0, 0.0, 0.0])
    direction = centroid / np.linalg.norm(centroid)
    hit = accel.nearest(origin, direction, t_min=0.0)
    assert hit is not None
    v0, v1, v2, obj, tri = _oracle_arrays(minimal_scene)
    idx, t, u, v = brute_force_nearest(origin, direction, v0, v1, v2, obj, tri, 0.0)
    assert idx == 0
    assert hit.t == t  # bitwise agreement with the oracle
    assert hit.object_id == "tri"


def test_miss_returns_none(minimal_scene):
    accel = build_accel(minimal_scene, 0)
    assert accel.nearest([0, 0, 0], [0, 0, -1.0], t_min=0.0) is None


@pytest.mark.parametrize("seed", range(5))
def test_bvh_matches_brute_force_on_ray_grid(seed):
    rng = np.random.default_rng(seed)
    scene = _soup_scene(rng, 50)
    accel = build_accel(scene, 0)
    pack = accel.pack
    v0, v1, v2, obj, tri = _oracle_arrays(scene)

    intr = CameraIntrinsics(64, 64, 90.0, 0.001)
    pose = Pose(position=rng.uniform(-1, 1, 3), yaw=rng.uniform(0, 360), pitch=rng.uniform(-30, 30))
    mismatches = 0
    for py in range(64):
        for px in range(64):
            origin, d = primary_ray(intr, pose, (px, py))
            oi, ot, ou, ov = brute_force_nearest(origin, d, v0, v1, v2, obj, tri, intr.near)
            hit = accel.nearest(origin, d, t_min=intr.near)
            if oi < 0:
                if hit is not None:
                    mismatches += 1
                continue
            if (
                hit is None
                or hit.obj_index != obj[oi]
                or hit.tri_local != tri[oi]
                or hit.t != ot
            ):
                mismatches += 1
    assert mismatches == 0


def test_bvh_matches_brute_force_large_scene():
    # the agreement contract covers scenes up to 1000 triangles
    rng = np.random.default_rng(77)
    scene = _soup_scene(rng, 400)
    accel = build_accel(scene, 0)
    v0, v1, v2, obj, tri = _oracle_arrays(scene)
    intr = CameraIntrinsics(32, 32, 90.0, 0.001)
    pose = Pose(position=[0.2, -0.3, 0.1], yaw=123.0, pitch=-10.0)
    for py in range(32):
        for px in range(32):
            origin, d = primary_ray(intr, pose, (px, py))
            oi, ot, _, _ = brute_force_nearest(origin, d, v0, v1, v2, obj, tri, intr.near)
            hit = accel.nearest(origin, d, t_min=intr.near)
            if oi < 0:
                assert hit is None
            else:
                assert hit is not None
                assert (hit.obj_index, hit.tri_local, hit.t) == (obj[oi], tri[oi], ot)


def test_coincident_triangles_tie_break():
    # two identical triangles in two objects; the lower object id must win
    tris = np.array([
        [[-1.0, -1.0, 2.0], [1.0, -1.0, 2.0], [0.0, 1.0, 2.0]],
        [[-1.0, -1.0, 2.0], [1.0, -1.0, 2.0], [0.0, 1.0, 2.0]],
    ])
    scene = parse_scene(soup_scene_text(tris))
    accel = build_accel(scene, 0)
    hit = accel.nearest([0.0, -0.2, 0.0], [0.0, 0.0, 1.0], t_min=0.0)
    assert hit.obj_index == 0 and hit.object_id == "t0000"


def test_lod_fallback_uses_coarsest():
    text = """\
aipscene v1
scene lods
bounds -5 -5 -5 5 5 5
camera 8 8 90.0 0.01
classes thing
material plain
  albedo 0.5 0.5 0.5
object two_lods
  class thing
  material plain
  mesh inline
    v -1.0 -1.0 2.0
    v 1.0 -1.0 2.0
    v 0.0 1.0 2.0
    f 0 1 2
  endmesh
  mesh inline
    v -1.0 -1.0 4.0
    v 1.0 -1.0 4.0
    v 0.0 1.0 4.0
    f 0 1 2
  endmesh
profile day
  ambient 0.2 0.2 0.2
  light directional 0.0 0.0 1.0 1.0 1.0 1.0 1.0 0.0
"""
    scene = parse_scene(text)
    near = build_accel(scene, 0).nearest([0, 0, 0], [0, 0, 1.0], t_min=0.0)
    far = build_accel(scene, 7).nearest([0, 0, 0], [0, 0, 1.0], t_min=0.0)
    assert near.t == pytest.approx(2.0)
    assert far.t == pytest.approx(4.0)  # falls back to the last LOD


def test_occluded_queries(minimal_scene):
    accel = build_accel(minimal_scene, 0)
    assert accel.occluded([0, 0, 0], [0, 0, 1.0], 0.0, 10.0)
    assert not accel.occluded([0, 0, 0], [0, 0, 1.0], 0.0, 1.0)  # triangle at z=3
    assert not accel.occluded([0, 0, 0], [0, 0, -1.0], 0.0, 10.0)


def test_empty_scene_pack():
    text = """\
aipscene v1
scene void
bounds -1 -1 -1 1 1 1
camera 8 8 90.0 0.01
profile day
  ambient 0.5 0.5 0.5
"""
    scene = parse_scene(text)
    accel = build_accel(scene, 0)
    assert accel.nearest([0, 0, 0], [0, 0, 1.0]) is None
    assert accel.pack.triangle_count == 0
