import numpy as np
import pytest

from aip.errors import SceneParseError, SceneValidationError
from aip.scene import (
    TriangleMesh,
    build_mip_chain,
    make_texture,
    parse_scene,
    read_mesh_sidecar,
    serialize_scene,
    write_mesh_sidecar,
)
from conftest import MINIMAL_SCENE


def test_minimal_scene_parses(minimal_scene):
    scene = minimal_scene
    assert scene.name == "testbox"
    assert len(scene.objects) == 1
    assert scene.classes == ["other", "thing"]  # "other" implicit at id 0
    assert scene.objects[0].class_id == 1
    assert "day" in scene.lights and len(scene.lights["day"]) == 1


def test_header_required():
    with pytest.raises(SceneParseError):
        parse_scene("scene foo\n")


def test_syntax_error_reports_line():
    bad = MINIMAL_SCENE.replace("albedo 0.5 0.4 0.3", "albedo 0.5 oops 0.3")
    with pytest.raises(SceneParseError, match=r"line \d+"):
        parse_scene(bad)


def test_unknown_class_name():
    bad = MINIMAL_SCENE.replace("class thing", "class sofa")
    with pytest.raises(SceneParseError, match="unknown class name"):
        parse_scene(bad)


def test_class_id_out_of_range():
    bad = MINIMAL_SCENE.replace("class thing", "class_id 300")
    with pytest.raises(SceneParseError, match="class id out of range"):
        parse_scene(bad)


def test_degenerate_triangle_rejected():
    bad = MINIMAL_SCENE.replace("v 0.0 1.0 3.0", "v 1.0 -1.0 3.0")
    with pytest.raises(SceneValidationError, match="degenerate"):
        parse_scene(bad)


def test_non_invertible_transform_rejected():
    zeros = " ".join(["0"] * 16)
    bad = MINIMAL_SCENE.replace("  material plain\n  mesh", f"  material plain\n  transform {zeros}\n  mesh")
    with pytest.raises(SceneValidationError, match="non-invertible"):
        parse_scene(bad)


def test_missing_profile_rejected():
    bad = MINIMAL_SCENE.split("profile day")[0]
    with pytest.raises(SceneValidationError, match="lighting profile"):
        parse_scene(bad)


def test_vertex_outside_bounds_rejected():
    bad = MINIMAL_SCENE.replace("v 1.0 -1.0 3.0", "v 99.0 -1.0 3.0")
    with pytest.raises(SceneValidationError, match="outside bounds"):
        parse_scene(bad)


def test_roundtrip_is_identity(minimal_scene):
    text1 = serialize_scene(minimal_scene)
    scene2 = parse_scene(text1)
    text2 = serialize_scene(scene2)
    assert text1 == text2
    assert scene2.classes == minimal_scene.classes
    np.testing.assert_array_equal(
        scene2.objects[0].lods[0].positions, minimal_scene.objects[0].lods[0].positions
    )


def test_roundtrip_with_textures_and_lods():
    text = """\
aipscene v1
scene fancy
bounds -5 -5 -5 5 5 5
camera 32 32 70.0 0.01
depth_range 8.0
classes rug

texture weave checker 8 6 2 0.8 0.2 0.2 0.1 0.1 0.7

material cloth
  albedo 0.5 0.5 0.5
  specular 0.25 32.0
  reflectivity 0.125
  texture weave

object mat
  class rug
  material cloth
  mesh inline
    v -1.0 0.0 -1.0 0.0 1.0 0.0 0.0 0.0
    v 1.0 0.0 -1.0 0.0 1.0 0.0 1.0 0.0
    v 0.0 0.0 1.0 0.0 1.0 0.0 0.5 1.0
    f 0 1 2
  endmesh
  mesh inline
    v -1.0 0.0 -1.0
    v 1.0 0.0 -1.0
    v 0.0 0.0 1.0
    f 0 1 2
  endmesh

profile day
  ambient 0.1 0.1 0.1
  light point 0.0 3.0 0.0 1.0 1.0 1.0 2.0 0.25
"""
    s1 = parse_scene(text)
    assert len(s1.objects[0].lods) == 2
    assert s1.objects[0].material.texture.level_count == 4  # 8x6 -> 4x3 -> 2x2 -> 1x1
    t1 = serialize_scene(s1)
    t2 = serialize_scene(parse_scene(t1))
    assert t1 == t2


@pytest.mark.parametrize(
    "w,h,expected",
    [
        (1, 1, [(1, 1)]),
        (8, 8, [(8, 8), (4, 4), (2, 2), (1, 1)]),
        (5, 3, [(5, 3), (3, 2), (2, 1), (1, 1)]),
        (7, 1, [(7, 1), (4, 1), (2, 1), (1, 1)]),
    ],
)
def test_mip_chain_ceil_halving(w, h, expected):
    chain = build_mip_chain(np.zeros((h, w, 3)))
    assert [(lvl.shape[1], lvl.shape[0]) for lvl in chain] == expected


def test_mip_chain_box_filter_average():
    img = np.zeros((2, 2, 3))
    img[0, 0] = (1.0, 0.0, 0.0)
    img[1, 1] = (0.0, 0.0, 1.0)
    chain = build_mip_chain(img)
    np.testing.assert_allclose(chain[1][0, 0], (0.25, 0.0, 0.25))


def test_checker_texture_pattern():
    tex = make_texture("t", ("checker", 4, 4, 2, (1, 0, 0), (0, 1, 0)))
    lvl = tex.levels[0]
    np.testing.assert_array_equal(lvl[0, 0], (1, 0, 0))
    np.testing.assert_array_equal(lvl[0, 2], (0, 1, 0))
    np.testing.assert_array_equal(lvl[2, 2], (1, 0, 0))


def test_mesh_sidecar_roundtrip(tmp_path):
    mesh = TriangleMesh(
        positions=np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=np.float64),
        indices=np.array([[0, 1, 2]]),
        normals=np.array([[0, 0, 1], [0, 0, 1], [0, 0, 1]], dtype=np.float64),
        uvs=np.array([[0, 0], [1, 0], [0, 1]], dtype=np.float64),
    )
    lo = TriangleMesh(
        positions=np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0]], dtype=np.float64),
        indices=np.array([[0, 1, 2]]),
    )
    path = tmp_path / "m.aipm"
    write_mesh_sidecar(path, [mesh, lo])
    assert path.read_bytes()[:4] == b"AIPM"
    back = read_mesh_sidecar(path)
    assert len(back) == 2
    np.testing.assert_array_equal(back[0].positions, mesh.positions)
    np.testing.assert_array_equal(back[0].uvs, mesh.uvs)
    assert back[1].normals is None


def test_mesh_ref_in_scene(tmp_path):
    mesh = TriangleMesh(
        positions=np.array([[-1, -1, 3], [1, -1, 3], [0, 1, 3]], dtype=np.float64),
        indices=np.array([[0, 1, 2]]),
    )
    write_mesh_sidecar(tmp_path / "tri.aipm", [mesh])
    text = MINIMAL_SCENE.replace(
        "  mesh inline\n    v -1.0 -1.0 3.0\n    v 1.0 -1.0 3.0\n    v 0.0 1.0 3.0\n    f 0 1 2\n  endmesh",
        "  mesh ref tri.aipm",
    )
    scene = parse_scene(text, base_dir=tmp_path)
    np.testing.assert_array_equal(scene.objects[0].lods[0].positions, mesh.positions)


def test_truncated_sidecar(tmp_path):
    mesh = TriangleMesh(
        positions=np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=np.float64),
        indices=np.array([[0, 1, 2]]),
    )
    path = tmp_path / "m.aipm"
    write_mesh_sidecar(path, [mesh])
    path.write_bytes(path.read_bytes()[:20])
    with pytest.raises(SceneParseError, match="truncated"):
        read_mesh_sidecar(path)
