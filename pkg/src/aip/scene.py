"""Scene description: types, text-format parser, canonical serializer.

A scene is a set of triangle-mesh objects (each with one or more LODs, a
material, and a semantic class), named lighting profiles (lights + ambient),
an ordered class list, camera defaults, and an axis-aligned bounding box.

The text format is line-oriented (``aipscene v1`` header, ``#`` comments);
the full grammar lives in docs/formats.md.  Geometry is either inline
(``v``/``f`` lines) or referenced from a little-endian binary sidecar
(magic ``AIPM``).  ``serialize_scene`` emits a canonical form — fixed section
order, shortest round-trip float formatting, geometry inlined — such that
parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SceneParseError, SceneValidationError

SCENE_HEADER = "aipscene v1"
MESH_MAGIC = b"AIPM"
MAX_CLASSES = 256
MIN_TRIANGLE_AREA = 1e-12  # m^2

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


# ---------------------------------------------------------------------------
# domain types


@dataclass
class CameraIntrinsics:
    width: int = 640
    height: int = 480
    vertical_fov: float = 60.0  # degrees
    near: float = 0.05  # meters

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SceneValidationError("camera resolution must be at least 1x1")
        if not (0.0 < self.vertical_fov < 180.0):
            raise SceneValidationError("vertical_fov must be in (0, 180) degrees")
        if self.near <= 0:
            raise SceneValidationError("camera near plane must be positive")

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass
class Texture:
    """Mip chain of RGB images; level k is the ceil-halved size of level k-1."""

    name: str
    levels: list  # list of (h, w, 3) float64 arrays in [0, 1]
    source: tuple  # parseable description, e.g. ("checker", w, h, cells, c1, c2)

    @property
    def level_count(self) -> int:
        return len(self.levels)


@dataclass
class Material:
    name: str
    albedo: tuple = (0.8, 0.8, 0.8)
    specular_strength: float = 0.0
    shininess: float = 16.0
    reflectivity: float = 0.0
    texture: Texture | None = None

    def __post_init__(self):
        # channels clamp to their declared ranges rather than erroring
        self.albedo = tuple(min(1.0, max(0.0, float(c))) for c in self.albedo)
        self.specular_strength = min(1.0, max(0.0, float(self.specular_strength)))
        self.reflectivity = min(1.0, max(0.0, float(self.reflectivity)))
        if self.shininess <= 0:
            raise SceneValidationError(f"material {self.name!r}: shininess must be positive")


@dataclass
class Light:
    kind: str  # "directional" | "point"
    vector: np.ndarray  # unit direction of travel, or position in meters
    color: tuple = (1.0, 1.0, 1.0)
    intensity: float = 1.0
    radius: float = 0.0  # area extent for soft shadows

    def __post_init__(self):
        if self.kind not in ("directional", "point"):
            raise SceneValidationError(f"unknown light kind {self.kind!r}")
        v = np.asarray(self.vector, dtype=np.float64)
        if self.kind == "directional":
            n = float(np.linalg.norm(v))
            if n <= 0:
                raise SceneValidationError("directional light has zero direction")
            v = v / n
        self.vector = v
        if self.intensity < 0:
            raise SceneValidationError("light intensity must be >= 0")
        if self.radius < 0:
            raise SceneValidationError("light radius must be >= 0")


@dataclass
class TriangleMesh:
    positions: np.ndarray  # (V, 3) float64
    indices: np.ndarray  # (T, 3) int32
    normals: np.ndarray | None = None  # (V, 3) unit vectors, smooth shading
    uvs: np.ndarray | None = None  # (V, 2)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.indices = np.asarray(self.indices, dtype=np.int32).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if not self.normals.any():  # all-zero = absent (flat shading)
                self.normals = None
        if self.uvs is not None:
            self.uvs = np.asarray(self.uvs, dtype=np.float64).reshape(-1, 2)
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= len(self.positions)):
            raise SceneValidationError("mesh face index out of range")

    @property
    def triangle_count(self) -> int:
        return len(self.indices)


@dataclass
class SceneObject:
    id: str
    lods: list  # list of TriangleMesh, index 0 = full detail
    transform: np.ndarray  # (4, 4) float64 affine, meters
    material: Material
    class_id: int

    def __post_init__(self):
        self.transform = np.asarray(self.transform, dtype=np.float64).reshape(4, 4)
        if not self.lods:
            raise SceneValidationError(f"object {self.id!r}: needs at least one LOD")

    def lod(self, index: int) -> TriangleMesh:
        """LOD at index, falling back to the coarsest available."""
        return self.lods[min(index, len(self.lods) - 1)]


@dataclass
class Aabb:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=np.float64).reshape(3)
        self.hi = np.asarray(self.hi, dtype=np.float64).reshape(3)

    def contains(self, points: np.ndarray, pad: float = 0.0) -> bool:
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return bool(np.all(p >= self.lo - pad) and np.all(p <= self.hi + pad))


@dataclass
class Scene:
    name: str
    objects: list
    lights: dict  # profile name -> list of Light
    ambient: dict  # profile name -> (r, g, b)
    classes: list  # ordered class names, index = class id, [0] == "other"
    camera_defaults: CameraIntrinsics
    bounds: Aabb
    depth_range: float = 10.0
    _caches: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def profile_names(self) -> list:
        return sorted(self.lights.keys())

    def profile_lights(self, profile: str) -> list:
        if profile not in self.lights:
            raise SceneValidationError(f"scene {self.name!r} has no lighting profile {profile!r}")
        return self.lights[profile]

    def profile_ambient(self, profile: str) -> tuple:
        if profile not in self.ambient:
            raise SceneValidationError(f"scene {self.name!r} has no lighting profile {profile!r}")
        return self.ambient[profile]

    def max_lod_index(self) -> int:
        return max(len(o.lods) for o in self.objects) - 1 if self.objects else 0


# ---------------------------------------------------------------------------
# helpers


def transform_points(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    return p @ matrix[:3, :3].T + matrix[:3, 3]


def transform_normals(matrix: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Rotate unit normals by the inverse-transpose; renormalize."""
    inv_t = np.linalg.inv(matrix[:3, :3]).T
    n = np.asarray(normals, dtype=np.float64) @ inv_t.T
    lens = np.linalg.norm(n, axis=-1, keepdims=True)
    lens[lens == 0] = 1.0
    return n / lens


def triangle_areas(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    cross = np.cross(v1 - v0, v2 - v0)
    return 0.5 * np.linalg.norm(cross, axis=-1)


def build_mip_chain(level0: np.ndarray) -> list:
    """2x2 box-filtered chain with ceil-halving, down to 1x1 inclusive.

    Odd dimensions replicate the last row/column before filtering, so level k
    is exactly ceil(w / 2**k) x ceil(h / 2**k).
    """
    img = np.asarray(level0, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise SceneValidationError("texture level 0 must be an (h, w, 3) image")
    levels = [img]
    while img.shape[0] > 1 or img.shape[1] > 1:
        h, w = img.shape[:2]
        if h % 2:
            img = np.concatenate([img, img[-1:, :, :]], axis=0)
        if w % 2:
            img = np.concatenate([img, img[:, -1:, :]], axis=1)
        img = 0.25 * (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2])
        levels.append(img)
    return levels


def _checker_image(w: int, h: int, cells: int, c1, c2) -> np.ndarray:
    ys, xs = np.mgrid[0:h, 0:w]
    parity = ((xs * cells // w) + (ys * cells // h)) % 2
    img = np.where(parity[..., None] == 0, np.asarray(c1, dtype=np.float64), np.asarray(c2, dtype=np.float64))
    return img


def _gradient_image(w: int, h: int, c1, c2) -> np.ndarray:
    t = np.linspace(0.0, 1.0, w)[None, :, None]
    a = np.asarray(c1, dtype=np.float64)[None, None, :]
    b = np.asarray(c2, dtype=np.float64)[None, None, :]
    return np.broadcast_to(a + (b - a) * t, (h, w, 3)).copy()


def make_texture(name: str, source: tuple, base_dir: str | Path = ".") -> Texture:
    kind = source[0]
    if kind == "checker":
        _, w, h, cells, c1, c2 = source
        level0 = _checker_image(int(w), int(h), int(cells), c1, c2)
    elif kind == "gradient":
        _, w, h, c1, c2 = source
        level0 = _gradient_image(int(w), int(h), c1, c2)
    elif kind == "image":
        from PIL import Image

        path = Path(base_dir) / source[1]
        with Image.open(path) as im:
            level0 = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    else:
        raise SceneValidationError(f"unknown texture source {kind!r}")
    level0 = np.clip(level0, 0.0, 1.0)
    return Texture(name=name, levels=build_mip_chain(level0), source=tuple(source))


# ---------------------------------------------------------------------------
# binary mesh sidecar (magic AIPM, little-endian)
#
# layout: magic | u32 lod_count | per LOD:
#   u32 vertex_count | u32 index_count
#   f32 positions (3*V) | f32 normals (3*V) | f32 uvs (2*V) | u32 indices
# all-zero normals or uvs mean "not present".


def write_mesh_sidecar(path: str | Path, lods: list) -> None:
    out = bytearray()
    out += MESH_MAGIC
    out += struct.pack("<I", len(lods))
    for mesh in lods:
        v = np.asarray(mesh.positions, dtype="<f4")
        idx = np.asarray(mesh.indices, dtype="<u4").reshape(-1)
        nrm = np.zeros_like(v) if mesh.normals is None else np.asarray(mesh.normals, dtype="<f4")
        uv = (
            np.zeros((len(v), 2), dtype="<f4")
            if mesh.uvs is None
            else np.asarray(mesh.uvs, dtype="<f4")
        )
        out += struct.pack("<II", len(v), idx.size)
        out += v.tobytes() + nrm.tobytes() + uv.tobytes() + idx.tobytes()
    Path(path).write_bytes(bytes(out))


def read_mesh_sidecar(path: str | Path) -> list:
    data = Path(path).read_bytes()
    if data[:4] != MESH_MAGIC:
        raise SceneParseError(f"{path}: bad mesh sidecar magic")
    off = 4
    try:
        (lod_count,) = struct.unpack_from("<I", data, off)
        off += 4
        lods = []
        for _ in range(lod_count):
            vcount, icount = struct.unpack_from("<II", data, off)
            off += 8
            pos = np.frombuffer(data, dtype="<f4", count=3 * vcount, offset=off).reshape(-1, 3)
            off += 12 * vcount
            nrm = np.frombuffer(data, dtype="<f4", count=3 * vcount, offset=off).reshape(-1, 3)
            off += 12 * vcount
            uv = np.frombuffer(data, dtype="<f4", count=2 * vcount, offset=off).reshape(-1, 2)
            off += 8 * vcount
            idx = np.frombuffer(data, dtype="<u4", count=icount, offset=off).reshape(-1, 3)
            off += 4 * icount
            lods.append(
                TriangleMesh(
                    positions=pos.astype(np.float64),
                    indices=idx.astype(np.int32),
                    normals=None if not nrm.any() else nrm.astype(np.float64),
                    uvs=None if not uv.any() else uv.astype(np.float64),
                )
            )
    except (struct.error, ValueError) as exc:
        raise SceneParseError(f"{path}: truncated mesh sidecar ({exc})")
    return lods


# ---------------------------------------------------------------------------
# parser


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


class _Cursor:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_tokens(self):
        """Next non-empty, non-comment line as (line_number, tokens)."""
        while self.pos < len(self.lines):
            raw = self.lines[self.pos]
            self.pos += 1
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                return self.pos, stripped.split()
        return None, None

    def push_back(self):
        self.pos -= 1


def _need(tokens, n, ln, what):
    if len(tokens) != n:
        raise SceneParseError(f"{what}: expected {n} fields, got {len(tokens)}", line=ln)


def _pfloat(tok, ln, col):
    try:
        return float(tok)
    except ValueError:
        raise SceneParseError(f"expected a number, got {tok!r}", line=ln, column=col)


def _pint(tok, ln, col):
    try:
        return int(tok)
    except ValueError:
        raise SceneParseError(f"expected an integer, got {tok!r}", line=ln, column=col)


def _pident(tok, ln, col):
    if not _IDENT_RE.match(tok):
        raise SceneParseError(f"invalid identifier {tok!r}", line=ln, column=col)
    return tok


def parse_scene(text: str, base_dir: str | Path = ".") -> Scene:
    """Parse and validate a scene file; returns the fully built Scene.

    ``base_dir`` resolves relative texture images and mesh sidecar paths.
    Raises SceneParseError (syntax, with line/column) or SceneValidationError
    (structural invariant).
    """
    cur = _Cursor(text)

    ln, tokens = cur.next_tokens()
    if tokens is None or " ".join(tokens) != SCENE_HEADER:
        raise SceneParseError(f"expected header {SCENE_HEADER!r}", line=ln or 1)

    name = None
    bounds = None
    camera = None
    depth_range = 10.0
    classes: list[str] = []
    textures: dict[str, Texture] = {}
    materials: dict[str, Material] = {}
    objects: list[SceneObject] = []
    lights: dict[str, list] = {}
    ambient: dict[str, tuple] = {}

    while True:
        ln, tokens = cur.next_tokens()
        if tokens is None:
            break
        key = tokens[0]

        if key == "scene":
            _need(tokens, 2, ln, "scene")
            name = _pident(tokens[1], ln, 2)
        elif key == "bounds":
            _need(tokens, 7, ln, "bounds")
            vals = [_pfloat(t, ln, i + 2) for i, t in enumerate(tokens[1:])]
            bounds = Aabb(lo=vals[:3], hi=vals[3:])
        elif key == "camera":
            _need(tokens, 5, ln, "camera")
            camera = CameraIntrinsics(
                width=_pint(tokens[1], ln, 2),
                height=_pint(tokens[2], ln, 3),
                vertical_fov=_pfloat(tokens[3], ln, 4),
                near=_pfloat(tokens[4], ln, 5),
            )
        elif key == "depth_range":
            _need(tokens, 2, ln, "depth_range")
            depth_range = _pfloat(tokens[1], ln, 2)
        elif key == "classes":
            if len(tokens) < 2:
                raise SceneParseError("classes: needs at least one name", line=ln)
            declared = [_pident(t, ln, i + 2) for i, t in enumerate(tokens[1:])]
            classes = declared if declared[0] == "other" else ["other"] + declared
            if len(set(classes)) != len(classes):
                raise SceneParseError("classes: duplicate class name", line=ln)
        elif key == "texture":
            tex = _parse_texture(tokens, ln, base_dir)
            if tex.name in textures:
                raise SceneParseError(f"duplicate texture {tex.name!r}", line=ln)
            textures[tex.name] = tex
        elif key == "material":
            _need(tokens, 2, ln, "material")
            mat = _parse_material(cur, _pident(tokens[1], ln, 2), textures)
            if mat.name in materials:
                raise SceneParseError(f"duplicate material {mat.name!r}", line=ln)
            materials[mat.name] = mat
        elif key == "object":
            _need(tokens, 2, ln, "object")
            objects.append(
                _parse_object(cur, _pident(tokens[1], ln, 2), classes, materials, base_dir, ln)
            )
        elif key == "profile":
            _need(tokens, 2, ln, "profile")
            pname = _pident(tokens[1], ln, 2)
            if pname in lights:
                raise SceneParseError(f"duplicate profile {pname!r}", line=ln)
            lights[pname], ambient[pname] = _parse_profile(cur)
        else:
            raise SceneParseError(f"unknown directive {key!r}", line=ln, column=1)

    if name is None:
        raise SceneParseError("missing 'scene <name>' directive", line=1)
    if bounds is None:
        raise SceneParseError("missing 'bounds' directive", line=1)
    if not classes:
        classes = ["other"]
    if camera is None:
        camera = CameraIntrinsics()

    scene = Scene(
        name=name,
        objects=objects,
        lights=lights,
        ambient=ambient,
        classes=classes,
        camera_defaults=camera,
        bounds=bounds,
        depth_range=depth_range,
    )
    validate_scene(scene)
    return scene


def _parse_texture(tokens, ln, base_dir):
    if len(tokens) < 3:
        raise SceneParseError("texture: expected 'texture <name> <kind> ...'", line=ln)
    tname = _pident(tokens[1], ln, 2)
    kind = tokens[2]
    rest = tokens[3:]
    if kind == "checker":
        _need(tokens, 12, ln, "texture checker")
        w, h, cells = (_pint(rest[i], ln, i + 4) for i in range(3))
        c1 = tuple(_pfloat(rest[3 + i], ln, 7 + i) for i in range(3))
        c2 = tuple(_pfloat(rest[6 + i], ln, 10 + i) for i in range(3))
        source = ("checker", w, h, cells, c1, c2)
    elif kind == "gradient":
        _need(tokens, 11, ln, "texture gradient")
        w, h = _pint(rest[0], ln, 4), _pint(rest[1], ln, 5)
        c1 = tuple(_pfloat(rest[2 + i], ln, 6 + i) for i in range(3))
        c2 = tuple(_pfloat(rest[5 + i], ln, 9 + i) for i in range(3))
        source = ("gradient", w, h, c1, c2)
    elif kind == "image":
        _need(tokens, 4, ln, "texture image")
        source = ("image", rest[0])
    else:
        raise SceneParseError(f"unknown texture kind {kind!r}", line=ln, column=3)
    if kind != "image":
        w, h = source[1], source[2]
        if w < 1 or h < 1:
            raise SceneParseError("texture dimensions must be >= 1", line=ln)
    return make_texture(tname, source, base_dir)


def _parse_material(cur, mname, textures):
    albedo = (0.8, 0.8, 0.8)
    spec, shin, refl = 0.0, 16.0, 0.0
    texture = None
    while True:
        ln, tokens = cur.next_tokens()
        if tokens is None:
            break
        key = tokens[0]
        if key == "albedo":
            _need(tokens, 4, ln, "albedo")
            albedo = tuple(_pfloat(t, ln, i + 2) for i, t in enumerate(tokens[1:]))
        elif key == "specular":
            _need(tokens, 3, ln, "specular")
            spec = _pfloat(tokens[1], ln, 2)
            shin = _pfloat(tokens[2], ln, 3)
        elif key == "reflectivity":
            _need(tokens, 2, ln, "reflectivity")
            refl = _pfloat(tokens[1], ln, 2)
        elif key == "texture":
            _need(tokens, 2, ln, "texture")
            if tokens[1] not in textures:
                raise SceneParseError(f"unknown texture {tokens[1]!r}", line=ln, column=2)
            texture = textures[tokens[1]]
        else:
            cur.push_back()
            break
    return Material(
        name=mname,
        albedo=albedo,
        specular_strength=spec,
        shininess=shin,
        reflectivity=refl,
        texture=texture,
    )


def _parse_inline_mesh(cur):
    positions, normals, uvs, faces = [], [], [], []
    width = None
    while True:
        ln, tokens = cur.next_tokens()
        if tokens is None:
            raise SceneParseError("unterminated mesh block (missing 'endmesh')", line=cur.pos)
        key = tokens[0]
        if key == "endmesh":
            break
        if key == "v":
            vals = [_pfloat(t, ln, i + 2) for i, t in enumerate(tokens[1:])]
            if len(vals) not in (3, 6, 8):
                raise SceneParseError("vertex: expected 3, 6, or 8 numbers", line=ln)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise SceneParseError("vertex: inconsistent attribute count in mesh", line=ln)
            positions.append(vals[:3])
            if width >= 6:
                normals.append(vals[3:6])
            if width == 8:
                uvs.append(vals[6:8])
        elif key == "f":
            _need(tokens, 4, ln, "face")
            faces.append([_pint(t, ln, i + 2) for i, t in enumerate(tokens[1:])])
        else:
            raise SceneParseError(f"unexpected {key!r} inside mesh block", line=ln, column=1)
    if not positions or not faces:
        raise SceneParseError("mesh block needs vertices and faces", line=cur.pos)
    return TriangleMesh(
        positions=np.array(positions),
        indices=np.array(faces),
        normals=np.array(normals) if normals else None,
        uvs=np.array(uvs) if uvs else None,
    )


def _parse_object(cur, oid, classes, materials, base_dir, obj_ln):
    class_id = None
    material = None
    transform = np.eye(4)
    lods = []
    while True:
        ln, tokens = cur.next_tokens()
        if tokens is None:
            break
        key = tokens[0]
        if key == "class":
            _need(tokens, 2, ln, "class")
            cname = tokens[1]
            if cname not in classes:
                raise SceneParseError(f"unknown class name {cname!r}", line=ln, column=2)
            class_id = classes.index(cname)
        elif key == "class_id":
            _need(tokens, 2, ln, "class_id")
            cid = _pint(tokens[1], ln, 2)
            if not (0 <= cid < len(classes)):
                raise SceneParseError("class id out of range", line=ln, column=2)
            class_id = cid
        elif key == "material":
            _need(tokens, 2, ln, "material")
            if tokens[1] not in materials:
                raise SceneParseError(f"unknown material {tokens[1]!r}", line=ln, column=2)
            material = materials[tokens[1]]
        elif key == "transform":
            _need(tokens, 17, ln, "transform")
            vals = [_pfloat(t, ln, i + 2) for i, t in enumerate(tokens[1:])]
            transform = np.array(vals, dtype=np.float64).reshape(4, 4)
        elif key == "mesh":
            if len(tokens) >= 2 and tokens[1] == "inline":
                lods.append(_parse_inline_mesh(cur))
            elif len(tokens) >= 3 and tokens[1] == "ref":
                if lods:
                    raise SceneParseError("object mixes inline and ref meshes", line=ln)
                lods = read_mesh_sidecar(Path(base_dir) / tokens[2])
            else:
                raise SceneParseError("mesh: expected 'inline' or 'ref <path>'", line=ln, column=2)
        else:
            cur.push_back()
            break
    if class_id is None:
        raise SceneParseError(f"object {oid!r}: missing class", line=obj_ln)
    if material is None:
        raise SceneParseError(f"object {oid!r}: missing material", line=obj_ln)
    if not lods:
        raise SceneParseError(f"object {oid!r}: missing mesh", line=obj_ln)
    return SceneObject(id=oid, lods=lods, transform=transform, material=material, class_id=class_id)


def _parse_profile(cur):
    plights = []
    amb = (0.0, 0.0, 0.0)
    while True:
        ln, tokens = cur.next_tokens()
        if tokens is None:
            break
        key = tokens[0]
        if key == "ambient":
            _need(tokens, 4, ln, "ambient")
            amb = tuple(_pfloat(t, ln, i + 2) for i, t in enumerate(tokens[1:]))
        elif key == "light":
            _need(tokens, 10, ln, "light")
            kind = tokens[1]
            vals = [_pfloat(t, ln, i + 3) for i, t in enumerate(tokens[2:])]
            plights.append(
                Light(
                    kind=kind,
                    vector=np.array(vals[:3]),
                    color=tuple(vals[3:6]),
                    intensity=vals[6],
                    radius=vals[7],
                )
            )
        else:
            cur.push_back()
            break
    return plights, amb


# ---------------------------------------------------------------------------
# validation


def validate_scene(scene: Scene) -> None:
    """Check every structural invariant; raises SceneValidationError."""
    if len(scene.classes) > MAX_CLASSES:
        raise SceneValidationError(f"class list exceeds {MAX_CLASSES} entries")
    if not scene.classes or scene.classes[0] != "other":
        raise SceneValidationError('class id 0 must be named "other"')
    if not scene.lights:
        raise SceneValidationError("at least one lighting profile is required")
    if set(scene.lights) != set(scene.ambient):
        raise SceneValidationError("profiles must define both lights and ambient")
    if np.any(scene.bounds.lo >= scene.bounds.hi):
        raise SceneValidationError("bounds min must be strictly below max")

    for obj in scene.objects:
        if not (0 <= obj.class_id < len(scene.classes)):
            raise SceneValidationError(f"object {obj.id!r}: class id out of range")
        det = float(np.linalg.det(obj.transform[:3, :3]))
        if abs(det) < 1e-12:
            raise SceneValidationError(f"object {obj.id!r}: non-invertible transform")
        for li, mesh in enumerate(obj.lods):
            world = transform_points(obj.transform, mesh.positions)
            if not scene.bounds.contains(world, pad=1e-9):
                raise SceneValidationError(f"object {obj.id!r}: LOD {li} vertices outside bounds")
            v0 = world[mesh.indices[:, 0]]
            v1 = world[mesh.indices[:, 1]]
            v2 = world[mesh.indices[:, 2]]
            areas = triangle_areas(v0, v1, v2)
            if np.any(areas <= MIN_TRIANGLE_AREA):
                bad = int(np.argmin(areas))
                raise SceneValidationError(
                    f"object {obj.id!r}: degenerate triangle {bad} in LOD {li} "
                    f"(area {areas[bad]:.3e} m^2)"
                )

    for pname, plights in scene.lights.items():
        for light in plights:
            if light.kind == "point":
                if not scene.bounds.contains(light.vector[None, :], pad=10.0):
                    raise SceneValidationError(
                        f"profile {pname!r}: point light outside bounds + 10 m"
                    )

    if scene.depth_range <= 0:
        raise SceneValidationError("depth_range must be positive")


# ---------------------------------------------------------------------------
# canonical serializer


def serialize_scene(scene: Scene) -> str:
    """Canonical text form: fixed section order, geometry inlined.

    parse(serialize(scene)) reproduces the scene exactly (floats are emitted
    with shortest round-trip formatting).
    """
    out = [SCENE_HEADER]
    out.append(f"scene {scene.name}")
    b = scene.bounds
    out.append("bounds " + " ".join(_fmt(x) for x in [*b.lo, *b.hi]))
    cam = scene.camera_defaults
    out.append(f"camera {cam.width} {cam.height} {_fmt(cam.vertical_fov)} {_fmt(cam.near)}")
    out.append(f"depth_range {_fmt(scene.depth_range)}")
    if len(scene.classes) > 1:
        out.append("classes " + " ".join(scene.classes[1:]))

    textures = {}
    for obj in scene.objects:
        tex = obj.material.texture
        if tex is not None:
            textures.setdefault(tex.name, tex)
    for tname in sorted(textures):
        src = textures[tname].source
        if src[0] == "checker":
            _, w, h, cells, c1, c2 = src
            out.append(
                f"texture {tname} checker {w} {h} {cells} "
                + " ".join(_fmt(c) for c in [*c1, *c2])
            )
        elif src[0] == "gradient":
            _, w, h, c1, c2 = src
            out.append(
                f"texture {tname} gradient {w} {h} " + " ".join(_fmt(c) for c in [*c1, *c2])
            )
        else:
            out.append(f"texture {tname} image {src[1]}")

    mats = {}
    for obj in scene.objects:
        mats.setdefault(obj.material.name, obj.material)
    for mname in sorted(mats):
        m = mats[mname]
        out.append(f"material {mname}")
        out.append("  albedo " + " ".join(_fmt(c) for c in m.albedo))
        out.append(f"  specular {_fmt(m.specular_strength)} {_fmt(m.shininess)}")
        out.append(f"  reflectivity {_fmt(m.reflectivity)}")
        if m.texture is not None:
            out.append(f"  texture {m.texture.name}")

    for obj in scene.objects:
        out.append(f"object {obj.id}")
        out.append(f"  class {scene.classes[obj.class_id]}")
        out.append(f"  material {obj.material.name}")
        out.append("  transform " + " ".join(_fmt(x) for x in obj.transform.reshape(-1)))
        for mesh in obj.lods:
            out.append("  mesh inline")
            for i, p in enumerate(mesh.positions):
                row = [_fmt(x) for x in p]
                if mesh.normals is not None:
                    row += [_fmt(x) for x in mesh.normals[i]]
                    if mesh.uvs is not None:
                        row += [_fmt(x) for x in mesh.uvs[i]]
                elif mesh.uvs is not None:
                    # uvs require normals in the v-line layout; emit zeros
                    row += ["0.0", "0.0", "0.0"] + [_fmt(x) for x in mesh.uvs[i]]
                out.append("    v " + " ".join(row))
            for f in mesh.indices:
                out.append(f"    f {f[0]} {f[1]} {f[2]}")
            out.append("  endmesh")

    for pname in sorted(scene.lights):
        out.append(f"profile {pname}")
        out.append("  ambient " + " ".join(_fmt(c) for c in scene.ambient[pname]))
        for light in scene.lights[pname]:
            out.append(
                f"  light {light.kind} "
                + " ".join(_fmt(x) for x in light.vector)
                + " "
                + " ".join(_fmt(c) for c in light.color)
                + f" {_fmt(light.intensity)} {_fmt(light.radius)}"
            )

    return "\n".join(out) + "\n"
