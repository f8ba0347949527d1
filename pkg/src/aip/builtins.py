"""Built-in scenes.

``brown_room`` and ``blue_room`` share identical geometry — a closed 5 x 2.6
x 4 m living room with fifteen semantic classes — and differ only in their
material palette.  ``abstract_shapes`` is an open ground plane with one
primitive per class.  All three define day / night / unlit lighting profiles.

Scenes are authored here as Python geometry, serialized to the canonical
text form, and parsed back, so ``builtin_scene_text`` is a real, parseable
source file for each scene.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AipError
from .scene import (
    Aabb,
    CameraIntrinsics,
    Light,
    Material,
    Scene,
    SceneObject,
    TriangleMesh,
    make_texture,
    parse_scene,
    serialize_scene,
)

BUILTIN_NAMES = ("brown_room", "blue_room", "abstract_shapes")

_text_cache: dict = {}
_scene_cache: dict = {}


# ---------------------------------------------------------------------------
# mesh builders


def _quad(a, b, c, d, uv=False):
    """Two triangles spanning a-b-c-d (counter-clockwise winding -> normal)."""
    pos = np.array([a, b, c, d], dtype=np.float64)
    idx = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    if not uv:
        return TriangleMesh(positions=pos, indices=idx)
    e1 = pos[1] - pos[0]
    e2 = pos[3] - pos[0]
    n = np.cross(e1, e2)
    n = n / np.linalg.norm(n)
    normals = np.tile(n, (4, 1))
    uvs = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.float64)
    return TriangleMesh(positions=pos, indices=idx, normals=normals, uvs=uvs)


def _box(lo, hi):
    """Axis-aligned box with outward-facing winding."""
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    pos = np.array(
        [
            [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],  # z0 face
            [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],  # z1 face
        ],
        dtype=np.float64,
    )
    faces = [
        (1, 0, 3, 2),  # -z
        (4, 5, 6, 7),  # +z
        (0, 4, 7, 3),  # -x
        (5, 1, 2, 6),  # +x
        (0, 1, 5, 4),  # -y
        (3, 7, 6, 2),  # +y
    ]
    idx = []
    for a, b, c, d in faces:
        idx.append([a, b, c])
        idx.append([a, c, d])
    return TriangleMesh(positions=pos, indices=np.array(idx, dtype=np.int32))


def _sphere(center, radius, segments, rings):
    """UV sphere with exact smooth vertex normals."""
    cx, cy, cz = center
    verts = [[cx, cy + radius, cz]]
    normals = [[0.0, 1.0, 0.0]]
    for r in range(1, rings):
        phi = math.pi * r / rings
        for s in range(segments):
            theta = 2.0 * math.pi * s / segments
            nx = math.sin(phi) * math.cos(theta)
            ny = math.cos(phi)
            nz = math.sin(phi) * math.sin(theta)
            normals.append([nx, ny, nz])
            verts.append([cx + radius * nx, cy + radius * ny, cz + radius * nz])
    verts.append([cx, cy - radius, cz])
    normals.append([0.0, -1.0, 0.0])
    bottom = len(verts) - 1

    idx = []
    ring0 = 1
    for s in range(segments):
        idx.append([0, ring0 + (s + 1) % segments, ring0 + s])
    for r in range(rings - 2):
        a = 1 + r * segments
        b = a + segments
        for s in range(segments):
            s2 = (s + 1) % segments
            idx.append([a + s, a + s2, b + s2])
            idx.append([a + s, b + s2, b + s])
    last = 1 + (rings - 2) * segments
    for s in range(segments):
        idx.append([bottom, last + s, last + (s + 1) % segments])
    return TriangleMesh(
        positions=np.array(verts),
        indices=np.array(idx, dtype=np.int32),
        normals=np.array(normals),
    )


def _pyramid(center_base, base, height):
    cx, y0, cz = center_base
    h = base / 2.0
    pos = np.array(
        [
            [cx - h, y0, cz - h], [cx + h, y0, cz - h],
            [cx + h, y0, cz + h], [cx - h, y0, cz + h],
            [cx, y0 + height, cz],
        ]
    )
    idx = np.array(
        [[0, 2, 1], [0, 3, 2], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
        dtype=np.int32,
    )
    return TriangleMesh(positions=pos, indices=idx)


def _wedge(center_base, size, height):
    """Triangular prism lying on the ground."""
    cx, y0, cz = center_base
    h = size / 2.0
    pos = np.array(
        [
            [cx - h, y0, cz - h], [cx + h, y0, cz - h], [cx, y0 + height, cz - h],
            [cx - h, y0, cz + h], [cx + h, y0, cz + h], [cx, y0 + height, cz + h],
        ]
    )
    idx = np.array(
        [
            [0, 2, 1], [3, 4, 5],  # caps
            [0, 1, 4], [0, 4, 3],  # bottom
            [1, 2, 5], [1, 5, 4],  # right slope
            [2, 0, 3], [2, 3, 5],  # left slope
        ],
        dtype=np.int32,
    )
    return TriangleMesh(positions=pos, indices=idx)


def _column(center_base, radius, height, sides=12):
    cx, y0, cz = center_base
    ring0, ring1 = [], []
    for s in range(sides):
        a = 2.0 * math.pi * s / sides
        ring0.append([cx + radius * math.cos(a), y0, cz + radius * math.sin(a)])
        ring1.append([cx + radius * math.cos(a), y0 + height, cz + radius * math.sin(a)])
    pos = np.array(ring0 + ring1)
    idx = []
    for s in range(sides):
        s2 = (s + 1) % sides
        idx.append([s, sides + s, sides + s2])
        idx.append([s, sides + s2, s2])
    for s in range(1, sides - 1):  # caps as fans
        idx.append([0, s, s + 1])
        idx.append([sides, sides + s + 1, sides + s])
    return TriangleMesh(positions=pos, indices=np.array(idx, dtype=np.int32))


def _merge(*meshes):
    pos, idx = [], []
    offset = 0
    for m in meshes:
        pos.append(m.positions)
        idx.append(m.indices + offset)
        offset += len(m.positions)
    return TriangleMesh(positions=np.concatenate(pos), indices=np.concatenate(idx))


# ---------------------------------------------------------------------------
# the living room (brown / blue palettes)

_ROOM_CLASSES = [
    "wall", "floor", "ceiling", "couch", "table", "TV", "plant", "lamp",
    "window", "door", "chair", "rug", "shelf", "picture", "curtain",
]

# x right, y up, z into the back wall; the room is 5 x 2.6 x 4 meters
_X0, _X1 = -2.5, 2.5
_Y0, _Y1 = 0.0, 2.6
_Z0, _Z1 = -2.0, 2.0

_PALETTES = {
    "brown_room": {
        "wall": (0.62, 0.52, 0.42),
        "floor1": (0.48, 0.33, 0.20),
        "floor2": (0.38, 0.25, 0.15),
        "ceiling": (0.85, 0.82, 0.78),
        "couch": (0.50, 0.30, 0.18),
        "table": (0.40, 0.26, 0.14),
        "tv": (0.05, 0.05, 0.06),
        "plant": (0.20, 0.45, 0.18),
        "pot": (0.45, 0.28, 0.18),
        "lamp": (0.70, 0.62, 0.45),
        "window": (0.55, 0.70, 0.85),
        "door": (0.42, 0.27, 0.15),
        "chair": (0.55, 0.38, 0.22),
        "rug1": (0.60, 0.42, 0.25),
        "rug2": (0.32, 0.20, 0.12),
        "shelf": (0.36, 0.24, 0.14),
        "pic1": (0.75, 0.55, 0.30),
        "pic2": (0.25, 0.15, 0.10),
        "curt1": (0.55, 0.40, 0.28),
        "curt2": (0.42, 0.30, 0.20),
    },
    "blue_room": {
        "wall": (0.45, 0.52, 0.62),
        "floor1": (0.30, 0.34, 0.42),
        "floor2": (0.22, 0.26, 0.34),
        "ceiling": (0.80, 0.83, 0.88),
        "couch": (0.20, 0.32, 0.55),
        "table": (0.25, 0.28, 0.38),
        "tv": (0.05, 0.05, 0.06),
        "plant": (0.18, 0.42, 0.22),
        "pot": (0.30, 0.32, 0.40),
        "lamp": (0.55, 0.60, 0.70),
        "window": (0.55, 0.70, 0.85),
        "door": (0.25, 0.30, 0.42),
        "chair": (0.32, 0.38, 0.52),
        "rug1": (0.28, 0.38, 0.58),
        "rug2": (0.14, 0.18, 0.30),
        "shelf": (0.22, 0.26, 0.36),
        "pic1": (0.35, 0.55, 0.78),
        "pic2": (0.10, 0.15, 0.28),
        "curt1": (0.30, 0.40, 0.58),
        "curt2": (0.20, 0.28, 0.44),
    },
}


def _room_scene(name: str) -> Scene:
    pal = _PALETTES[name]

    tex_floor = make_texture("floor_tiles", ("checker", 128, 128, 16, pal["floor1"], pal["floor2"]))
    tex_rug = make_texture("rug_weave", ("checker", 64, 64, 8, pal["rug1"], pal["rug2"]))
    tex_pic = make_texture("picture_art", ("gradient", 32, 32, pal["pic1"], pal["pic2"]))
    tex_curtain = make_texture("curtain_cloth", ("checker", 32, 32, 5, pal["curt1"], pal["curt2"]))

    m_wall = Material("wall_paint", albedo=pal["wall"], specular_strength=0.05, shininess=8)
    m_floor = Material("floor_wood", albedo=pal["floor1"], specular_strength=0.15, shininess=24, texture=tex_floor)
    m_ceiling = Material("ceiling_paint", albedo=pal["ceiling"])
    m_couch = Material("couch_fabric", albedo=pal["couch"])
    m_table = Material("table_wood", albedo=pal["table"], specular_strength=0.25, shininess=32)
    m_tv = Material("tv_screen", albedo=pal["tv"], specular_strength=0.6, shininess=96, reflectivity=0.45)
    m_plant = Material("plant_leaf", albedo=pal["plant"])
    m_pot = Material("plant_pot", albedo=pal["pot"])
    m_lamp = Material("lamp_metal", albedo=pal["lamp"], specular_strength=0.5, shininess=48, reflectivity=0.25)
    m_window = Material("window_glass", albedo=pal["window"], specular_strength=0.5, shininess=64, reflectivity=0.35)
    m_door = Material("door_wood", albedo=pal["door"], specular_strength=0.1, shininess=16)
    m_chair = Material("chair_wood", albedo=pal["chair"])
    m_rug = Material("rug_cloth", albedo=pal["rug1"], texture=tex_rug)
    m_shelf = Material("shelf_wood", albedo=pal["shelf"])
    m_picture = Material("picture_print", albedo=pal["pic1"], texture=tex_pic)
    m_curtain = Material("curtain_fabric", albedo=pal["curt1"], texture=tex_curtain)

    classes = ["other"] + _ROOM_CLASSES
    cid = {c: i for i, c in enumerate(classes)}

    def obj(oid, mesh_or_lods, material, cname):
        lods = mesh_or_lods if isinstance(mesh_or_lods, list) else [mesh_or_lods]
        return SceneObject(
            id=oid, lods=lods, transform=np.eye(4), material=material, class_id=cid[cname]
        )

    # room shell: quads wound to face the interior
    walls = _merge(
        _quad([_X0, _Y0, _Z1], [_X1, _Y0, _Z1], [_X1, _Y1, _Z1], [_X0, _Y1, _Z1]),  # back, -z in
        _quad([_X1, _Y0, _Z0], [_X0, _Y0, _Z0], [_X0, _Y1, _Z0], [_X1, _Y1, _Z0]),  # front, +z in
        _quad([_X1, _Y0, _Z1], [_X1, _Y0, _Z0], [_X1, _Y1, _Z0], [_X1, _Y1, _Z1]),  # east, -x in
        _quad([_X0, _Y0, _Z0], [_X0, _Y0, _Z1], [_X0, _Y1, _Z1], [_X0, _Y1, _Z0]),  # west, +x in
    )
    floor = _quad([_X0, _Y0, _Z0], [_X1, _Y0, _Z0], [_X1, _Y0, _Z1], [_X0, _Y0, _Z1], uv=True)
    ceiling = _quad([_X0, _Y1, _Z1], [_X1, _Y1, _Z1], [_X1, _Y1, _Z0], [_X0, _Y1, _Z0])

    couch = _merge(
        _box([-1.1, 0.0, 1.25], [1.1, 0.42, 1.95]),   # seat
        _box([-1.1, 0.42, 1.72], [1.1, 1.05, 1.95]),  # back
        _box([-1.35, 0.0, 1.25], [-1.1, 0.65, 1.95]),
        _box([1.1, 0.0, 1.25], [1.35, 0.65, 1.95]),
    )
    table_hi = _merge(
        _box([-0.55, 0.42, -0.35], [0.55, 0.50, 0.35]),
        _box([-0.52, 0.0, -0.32], [-0.44, 0.42, -0.24]),
        _box([0.44, 0.0, -0.32], [0.52, 0.42, -0.24]),
        _box([-0.52, 0.0, 0.24], [-0.44, 0.42, 0.32]),
        _box([0.44, 0.0, 0.24], [0.52, 0.42, 0.32]),
    )
    table_lo = _box([-0.55, 0.0, -0.35], [0.55, 0.50, 0.35])
    tv = _box([-0.75, 1.0, 1.93], [0.75, 1.85, 1.99])
    plant_hi = _sphere([2.05, 1.05, -1.55], 0.38, 12, 6)
    plant_lo = _sphere([2.05, 1.05, -1.55], 0.38, 6, 4)
    pot = _box([1.88, 0.0, -1.72], [2.22, 0.70, -1.38])
    lamp_pole = _box([-2.02, 0.0, 1.48], [-1.98, 1.30, 1.52])
    lamp_shade_hi = _sphere([-2.0, 1.52, 1.5], 0.16, 10, 5)
    lamp_shade_lo = _sphere([-2.0, 1.52, 1.5], 0.16, 6, 3)
    window = _quad(
        [2.49, 0.9, -1.1], [2.49, 0.9, 0.5], [2.49, 2.1, 0.5], [2.49, 2.1, -1.1]
    )
    door = _quad(
        [-0.5, 0.0, -1.99], [0.4, 0.0, -1.99], [0.4, 2.1, -1.99], [-0.5, 2.1, -1.99]
    )
    chair_hi = _merge(
        _box([-1.9, 0.40, -0.9], [-1.4, 0.48, -0.4]),
        _box([-1.9, 0.48, -0.58], [-1.4, 1.15, -0.4]),
        _box([-1.88, 0.0, -0.88], [-1.80, 0.40, -0.80]),
        _box([-1.50, 0.0, -0.88], [-1.42, 0.40, -0.80]),
        _box([-1.88, 0.0, -0.50], [-1.80, 0.40, -0.42]),
        _box([-1.50, 0.0, -0.50], [-1.42, 0.40, -0.42]),
    )
    chair_lo = _merge(
        _box([-1.9, 0.0, -0.9], [-1.4, 0.48, -0.4]),
        _box([-1.9, 0.48, -0.58], [-1.4, 1.15, -0.4]),
    )
    shelf = _merge(
        _box([-2.48, 0.5, -1.8], [-2.1, 0.56, -0.9]),
        _box([-2.48, 1.1, -1.8], [-2.1, 1.16, -0.9]),
        _box([-2.48, 1.7, -1.8], [-2.1, 1.76, -0.9]),
    )
    rug = _quad(
        [-1.3, 0.012, -1.0], [1.3, 0.012, -1.0], [1.3, 0.012, 0.9], [-1.3, 0.012, 0.9], uv=True
    )
    picture = _quad(
        [-1.5, 1.2, 1.985], [-0.6, 1.2, 1.985], [-0.6, 1.9, 1.985], [-1.5, 1.9, 1.985], uv=True
    )
    curtain = _quad(
        [2.47, 0.75, 0.6], [2.47, 0.75, 1.5], [2.47, 2.2, 1.5], [2.47, 2.2, 0.6], uv=True
    )

    objects = [
        obj("walls", walls, m_wall, "wall"),
        obj("floor", floor, m_floor, "floor"),
        obj("ceiling", ceiling, m_ceiling, "ceiling"),
        obj("couch", couch, m_couch, "couch"),
        obj("coffee_table", [table_hi, table_lo], m_table, "table"),
        obj("tv_unit", tv, m_tv, "TV"),
        obj("plant_foliage", [plant_hi, plant_lo], m_plant, "plant"),
        obj("plant_pot", pot, m_pot, "plant"),
        obj("lamp_pole", lamp_pole, m_lamp, "lamp"),
        obj("lamp_shade", [lamp_shade_hi, lamp_shade_lo], m_lamp, "lamp"),
        obj("window_pane", window, m_window, "window"),
        obj("door_panel", door, m_door, "door"),
        obj("armchair", [chair_hi, chair_lo], m_chair, "chair"),
        obj("rug_main", rug, m_rug, "rug"),
        obj("wall_shelf", shelf, m_shelf, "shelf"),
        obj("picture_frame", picture, m_picture, "picture"),
        obj("curtain_panel", curtain, m_curtain, "curtain"),
    ]

    lights = {
        "day": [
            Light("point", np.array([2.2, 1.7, 0.4]), color=(1.0, 0.96, 0.88), intensity=9.0, radius=0.25),
        ],
        "night": [
            Light("point", np.array([-2.0, 1.33, 1.5]), color=(1.0, 0.75, 0.45), intensity=2.8, radius=0.09),
            Light("point", np.array([0.6, 1.3, 1.7]), color=(0.5, 0.65, 1.0), intensity=1.6, radius=0.18),
        ],
        "unlit": [],
    }
    ambient = {
        "day": (0.36, 0.37, 0.40),
        "night": (0.07, 0.07, 0.11),
        "unlit": (1.0, 1.0, 1.0),
    }

    return Scene(
        name=name,
        objects=objects,
        lights=lights,
        ambient=ambient,
        classes=classes,
        camera_defaults=CameraIntrinsics(640, 480, 60.0, 0.05),
        bounds=Aabb(lo=[_X0, _Y0, _Z0], hi=[_X1, _Y1, _Z1]),
        depth_range=10.0,
    )


def _abstract_scene() -> Scene:
    classes = ["other", "plane", "box", "sphere", "pyramid", "wedge", "column"]
    cid = {c: i for i, c in enumerate(classes)}

    m_plane = Material("ground_mat", albedo=(0.55, 0.55, 0.58), specular_strength=0.1, shininess=16)
    m_box = Material("box_mat", albedo=(0.75, 0.25, 0.20))
    m_sphere = Material("sphere_mat", albedo=(0.20, 0.45, 0.75), specular_strength=0.5, shininess=64, reflectivity=0.2)
    m_pyramid = Material("pyramid_mat", albedo=(0.85, 0.70, 0.20))
    m_wedge = Material("wedge_mat", albedo=(0.30, 0.65, 0.35))
    m_column = Material("column_mat", albedo=(0.65, 0.60, 0.80))

    def obj(oid, mesh_or_lods, material, cname):
        lods = mesh_or_lods if isinstance(mesh_or_lods, list) else [mesh_or_lods]
        return SceneObject(
            id=oid, lods=lods, transform=np.eye(4), material=material, class_id=cid[cname]
        )

    objects = [
        obj("ground", _quad([-3, 0, -3], [3, 0, -3], [3, 0, 3], [-3, 0, 3]), m_plane, "plane"),
        obj("box_prim", _box([-2.0, 0.0, -1.5], [-1.0, 1.0, -0.5]), m_box, "box"),
        obj(
            "sphere_prim",
            [_sphere([0.8, 0.6, -0.8], 0.6, 14, 8), _sphere([0.8, 0.6, -0.8], 0.6, 7, 4)],
            m_sphere,
            "sphere",
        ),
        obj("pyramid_prim", _pyramid([1.6, 0.0, 1.3], 1.0, 1.2), m_pyramid, "pyramid"),
        obj("wedge_prim", _wedge([-1.3, 0.0, 1.5], 1.0, 0.9), m_wedge, "wedge"),
        obj("column_prim", _column([0.0, 0.0, 0.3], 0.3, 1.8), m_column, "column"),
    ]

    lights = {
        "day": [
            Light("directional", np.array([-0.35, -0.8, 0.3]), color=(1.0, 0.97, 0.9), intensity=1.1, radius=0.04),
        ],
        "night": [
            Light("point", np.array([0.0, 2.4, 0.0]), color=(0.7, 0.75, 1.0), intensity=4.0, radius=0.2),
        ],
        "unlit": [],
    }
    ambient = {
        "day": (0.30, 0.31, 0.34),
        "night": (0.05, 0.05, 0.09),
        "unlit": (1.0, 1.0, 1.0),
    }

    return Scene(
        name="abstract_shapes",
        objects=objects,
        lights=lights,
        ambient=ambient,
        classes=classes,
        camera_defaults=CameraIntrinsics(640, 480, 60.0, 0.05),
        bounds=Aabb(lo=[-3.0, 0.0, -3.0], hi=[3.0, 2.5, 3.0]),
        depth_range=10.0,
    )


def builtin_scene_text(name: str) -> str:
    """Canonical source file of a built-in scene."""
    if name not in BUILTIN_NAMES:
        raise AipError(f"unknown builtin scene {name!r} (have {', '.join(BUILTIN_NAMES)})")
    if name not in _text_cache:
        scene = _abstract_scene() if name == "abstract_shapes" else _room_scene(name)
        _text_cache[name] = serialize_scene(scene)
    return _text_cache[name]


def builtin_scene(name: str) -> Scene:
    """Parse the built-in source file (validated like any user scene)."""
    if name not in _scene_cache:
        _scene_cache[name] = parse_scene(builtin_scene_text(name))
    return _scene_cache[name]
