import numpy as np
import pytest

from aip.builtins import BUILTIN_NAMES, builtin_scene, builtin_scene_text
from aip.render import Pose, RenderSettings, render_frame
from aip.scene import CameraIntrinsics, parse_scene, serialize_scene, transform_points


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_parses_and_validates(name):
    scene = builtin_scene(name)
    assert scene.name == name
    for profile in ("day", "night", "unlit"):
        assert profile in scene.lights


def test_room_has_fifteen_classes_plus_other():
    scene = builtin_scene("brown_room")
    assert len(scene.classes) == 16
    assert scene.classes[0] == "other"
    for expected in ("wall", "couch", "table", "TV", "plant", "lamp"):
        assert expected in scene.classes


def test_brown_blue_share_geometry_differ_in_palette():
    brown = builtin_scene("brown_room")
    blue = builtin_scene("blue_room")
    assert len(brown.objects) == len(blue.objects)
    diffs = 0
    for ob, bl in zip(brown.objects, blue.objects):
        assert ob.id == bl.id
        assert len(ob.lods) == len(bl.lods)
        for lo, lb in zip(ob.lods, bl.lods):
            np.testing.assert_array_equal(lo.positions, lb.positions)
            np.testing.assert_array_equal(lo.indices, lb.indices)
        if ob.material.albedo != bl.material.albedo:
            diffs += 1
    assert diffs > 5  # palettes genuinely differ


def test_room_fits_ten_meter_depth_range():
    scene = builtin_scene("brown_room")
    pts = np.concatenate(
        [transform_points(o.transform, lod.positions) for o in scene.objects for lod in o.lods]
    )
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    assert float(np.linalg.norm(hi - lo)) <= 10.0  # depth never clips


def test_abstract_shapes_distinct_class_ids():
    scene = builtin_scene("abstract_shapes")
    ids = [o.class_id for o in scene.objects]
    assert len(ids) == len(set(ids))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_every_class_id_used_by_an_object(name):
    scene = builtin_scene(name)
    used = {o.class_id for o in scene.objects}
    for cid in range(1, len(scene.classes)):
        assert cid in used, f"class {scene.classes[cid]} unused"


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_text_roundtrip(name):
    text = builtin_scene_text(name)
    assert text.startswith("aipscene v1")
    scene = parse_scene(text)
    assert serialize_scene(scene) == text


def test_room_render_smoke():
    scene = builtin_scene("brown_room")
    intr = CameraIntrinsics(96, 72, 60.0, 0.05)
    pose = Pose(position=[0.0, 1.6, -1.2], yaw=0.0, pitch=-5.0)
    settings = RenderSettings(shadow_samples=1, aa_samples=1, reflection_depth=1)
    day = render_frame(scene, pose, "day", settings, intr, frame_seed=3)
    night = render_frame(scene, pose, "night", settings, intr, frame_seed=3)
    unlit = render_frame(
        scene, pose, "unlit",
        RenderSettings(shadow_samples=1, aa_samples=1, shading_mode="unlit"),
        intr, frame_seed=3,
    )
    # closed room: every GT ray hits something
    assert (day.depth_persp < 65535).all()
    # the view covers several semantic classes
    assert len(np.unique(day.labels)) >= 4
    # lighting changes color but never ground truth
    assert np.abs(day.color.astype(int) - night.color.astype(int)).mean() > 2.0
    np.testing.assert_array_equal(day.depth_persp, night.depth_persp)
    np.testing.assert_array_equal(day.normals, unlit.normals)
    np.testing.assert_array_equal(day.labels, night.labels)


def test_unknown_builtin_rejected():
    from aip.errors import AipError

    with pytest.raises(AipError, match="unknown builtin"):
        builtin_scene("green_room")
