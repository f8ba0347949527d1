"""BVH acceleration structure and the flattened geometry pack the kernels use.

``build_accel(scene, lod_index)`` bakes object transforms into world-space
triangle arrays (objects missing the requested LOD fall back to their
coarsest), builds a median-split BVH, and returns an AccelStructure whose
nearest-hit queries are guaranteed to agree with an exhaustive all-triangle
test — same nearest hit, ties broken by lower object id then lower triangle
id.  Packs are immutable and cached on the scene.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .scene import Scene, transform_points, transform_normals

LEAF_SIZE = 4


@dataclass
class ScenePack:
    """Flat world-space arrays for one LOD selection of a scene."""

    # triangles, BVH-ordered
    tv0: np.ndarray
    tv1: np.ndarray
    tv2: np.ndarray
    tn0: np.ndarray
    tn1: np.ndarray
    tn2: np.ndarray
    tuv0: np.ndarray
    tuv1: np.ndarray
    tuv2: np.ndarray
    tgn: np.ndarray
    tobj: np.ndarray
    tlocal: np.ndarray
    # bvh nodes
    bmin: np.ndarray
    bmax: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    # per-object shading tables
    oclass: np.ndarray
    malbedo: np.ndarray
    mspec: np.ndarray
    mshin: np.ndarray
    mrefl: np.ndarray
    mtex: np.ndarray
    # packed texture mip chains
    tex_data: np.ndarray
    mip_off: np.ndarray
    mip_w: np.ndarray
    mip_h: np.ndarray
    tex_mip_start: np.ndarray
    tex_mip_count: np.ndarray

    @property
    def triangle_count(self) -> int:
        return len(self.tv0)

    def bvh_args(self):
        return (self.bmin, self.bmax, self.left, self.right, self.start, self.count)

    def tri_args(self):
        return (self.tv0, self.tv1, self.tv2, self.tobj, self.tlocal)


@dataclass
class Hit:
    t: float
    obj_index: int
    object_id: str
    class_id: int
    tri_local: int
    tri_global: int
    u: float
    v: float
    point: np.ndarray
    geom_normal: np.ndarray
    shading_normal: np.ndarray
    uv: tuple
    incoming: np.ndarray  # unit ray direction that produced the hit


@dataclass
class LightPack:
    kind: np.ndarray  # 0 directional, 1 point
    vec: np.ndarray
    color: np.ndarray
    intensity: np.ndarray
    radius: np.ndarray
    ambient: tuple


def pack_lights(scene: Scene, profile: str) -> LightPack:
    plights = scene.profile_lights(profile)
    n = len(plights)
    kind = np.zeros(n, dtype=np.int32)
    vec = np.zeros((n, 3), dtype=np.float64)
    color = np.zeros((n, 3), dtype=np.float64)
    intensity = np.zeros(n, dtype=np.float64)
    radius = np.zeros(n, dtype=np.float64)
    for i, light in enumerate(plights):
        kind[i] = 0 if light.kind == "directional" else 1
        vec[i] = light.vector
        color[i] = light.color
        intensity[i] = light.intensity
        radius[i] = light.radius
    return LightPack(kind, vec, color, intensity, radius, scene.profile_ambient(profile))


def _build_bvh(v0, v1, v2):
    """Median-split BVH; returns (node arrays, triangle permutation)."""
    m = len(v0)
    order = np.arange(m, dtype=np.int64)
    tri_lo = np.minimum(np.minimum(v0, v1), v2)
    tri_hi = np.maximum(np.maximum(v0, v1), v2)
    centroid = (tri_lo + tri_hi) * 0.5
    if m:
        diag = float(np.linalg.norm(tri_hi.max(axis=0) - tri_lo.min(axis=0)))
    else:
        diag = 1.0
    pad = 1e-9 * diag + 1e-12  # keeps boundary-grazing rays from false pruning

    nodes_min, nodes_max = [], []
    nodes_left, nodes_right = [], []
    nodes_start, nodes_count = [], []
    out_order = []

    def new_node():
        nodes_min.append(np.zeros(3))
        nodes_max.append(np.zeros(3))
        nodes_left.append(-1)
        nodes_right.append(-1)
        nodes_start.append(0)
        nodes_count.append(0)
        return len(nodes_min) - 1

    def build(idx):
        node = new_node()
        lo = tri_lo[idx].min(axis=0) - pad
        hi = tri_hi[idx].max(axis=0) + pad
        nodes_min[node] = lo
        nodes_max[node] = hi
        cents = centroid[idx]
        splittable = len(idx) > LEAF_SIZE and np.any(cents.min(axis=0) != cents.max(axis=0))
        if not splittable:
            nodes_start[node] = len(out_order)
            nodes_count[node] = len(idx)
            out_order.extend(idx.tolist())
            return node
        axis = int(np.argmax(cents.max(axis=0) - cents.min(axis=0)))
        perm = np.argsort(cents[:, axis], kind="stable")
        half = len(idx) // 2
        l = build(idx[perm[:half]])
        r = build(idx[perm[half:]])
        nodes_left[node] = l
        nodes_right[node] = r
        return node

    if m:
        import sys

        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 10000))
        try:
            build(order)
        finally:
            sys.setrecursionlimit(limit)
        perm = np.array(out_order, dtype=np.int64)
    else:
        perm = order

    return (
        np.array(nodes_min, dtype=np.float64).reshape(-1, 3),
        np.array(nodes_max, dtype=np.float64).reshape(-1, 3),
        np.array(nodes_left, dtype=np.int32),
        np.array(nodes_right, dtype=np.int32),
        np.array(nodes_start, dtype=np.int32),
        np.array(nodes_count, dtype=np.int32),
        perm,
    )


def build_pack(scene: Scene, lod_index: int) -> ScenePack:
    key = ("pack", lod_index)
    if key in scene._caches:
        return scene._caches[key]

    v0s, v1s, v2s = [], [], []
    n0s, n1s, n2s = [], [], []
    uv0s, uv1s, uv2s = [], [], []
    objs, locals_ = [], []
    for oi, obj in enumerate(scene.objects):
        mesh = obj.lod(lod_index)
        world = transform_points(obj.transform, mesh.positions)
        idx = mesh.indices
        v0s.append(world[idx[:, 0]])
        v1s.append(world[idx[:, 1]])
        v2s.append(world[idx[:, 2]])
        if mesh.normals is not None:
            wn = transform_normals(obj.transform, mesh.normals)
            n0s.append(wn[idx[:, 0]])
            n1s.append(wn[idx[:, 1]])
            n2s.append(wn[idx[:, 2]])
        else:
            z = np.zeros((len(idx), 3))
            n0s.append(z)
            n1s.append(z)
            n2s.append(z)
        if mesh.uvs is not None:
            uv0s.append(mesh.uvs[idx[:, 0]])
            uv1s.append(mesh.uvs[idx[:, 1]])
            uv2s.append(mesh.uvs[idx[:, 2]])
        else:
            z = np.zeros((len(idx), 2))
            uv0s.append(z)
            uv1s.append(z)
            uv2s.append(z)
        objs.append(np.full(len(idx), oi, dtype=np.int32))
        locals_.append(np.arange(len(idx), dtype=np.int32))

    def cat(parts, width):
        if parts:
            return np.ascontiguousarray(np.concatenate(parts).reshape(-1, width), dtype=np.float64)
        return np.zeros((0, width), dtype=np.float64)

    tv0, tv1, tv2 = cat(v0s, 3), cat(v1s, 3), cat(v2s, 3)
    tn0, tn1, tn2 = cat(n0s, 3), cat(n1s, 3), cat(n2s, 3)
    tuv0, tuv1, tuv2 = cat(uv0s, 2), cat(uv1s, 2), cat(uv2s, 2)
    tobj = np.concatenate(objs) if objs else np.zeros(0, dtype=np.int32)
    tlocal = np.concatenate(locals_) if locals_ else np.zeros(0, dtype=np.int32)

    cross = np.cross(tv1 - tv0, tv2 - tv0)
    norms = np.linalg.norm(cross, axis=-1, keepdims=True)
    norms[norms == 0] = 1.0
    tgn = cross / norms

    bmin, bmax, left, right, start, count, perm = _build_bvh(tv0, tv1, tv2)

    def take(a):
        return np.ascontiguousarray(a[perm])

    n_obj = len(scene.objects)
    oclass = np.zeros(n_obj, dtype=np.int32)
    malbedo = np.zeros((n_obj, 3), dtype=np.float64)
    mspec = np.zeros(n_obj, dtype=np.float64)
    mshin = np.full(n_obj, 16.0, dtype=np.float64)
    mrefl = np.zeros(n_obj, dtype=np.float64)
    mtex = np.full(n_obj, -1, dtype=np.int32)

    textures = []
    tex_index = {}
    for oi, obj in enumerate(scene.objects):
        oclass[oi] = obj.class_id
        m = obj.material
        malbedo[oi] = m.albedo
        mspec[oi] = m.specular_strength
        mshin[oi] = m.shininess
        mrefl[oi] = m.reflectivity
        if m.texture is not None:
            if id(m.texture) not in tex_index:
                tex_index[id(m.texture)] = len(textures)
                textures.append(m.texture)
            mtex[oi] = tex_index[id(m.texture)]

    data_parts = []
    mip_off, mip_w, mip_h = [], [], []
    tex_mip_start, tex_mip_count = [], []
    offset = 0
    for tex in textures:
        tex_mip_start.append(len(mip_off))
        tex_mip_count.append(tex.level_count)
        for lvl in tex.levels:
            h, w = lvl.shape[:2]
            mip_off.append(offset)
            mip_w.append(w)
            mip_h.append(h)
            data_parts.append(np.ascontiguousarray(lvl, dtype=np.float64).reshape(-1))
            offset += h * w * 3
    tex_data = np.concatenate(data_parts) if data_parts else np.zeros(1, dtype=np.float64)

    pack = ScenePack(
        tv0=take(tv0), tv1=take(tv1), tv2=take(tv2),
        tn0=take(tn0), tn1=take(tn1), tn2=take(tn2),
        tuv0=take(tuv0), tuv1=take(tuv1), tuv2=take(tuv2),
        tgn=take(tgn), tobj=take(tobj), tlocal=take(tlocal),
        bmin=bmin, bmax=bmax, left=left, right=right, start=start, count=count,
        oclass=oclass, malbedo=malbedo, mspec=mspec, mshin=mshin, mrefl=mrefl, mtex=mtex,
        tex_data=tex_data,
        mip_off=np.array(mip_off, dtype=np.int64),
        mip_w=np.array(mip_w, dtype=np.int32),
        mip_h=np.array(mip_h, dtype=np.int32),
        tex_mip_start=np.array(tex_mip_start, dtype=np.int32),
        tex_mip_count=np.array(tex_mip_count, dtype=np.int32),
    )
    scene._caches[key] = pack
    return pack


class AccelStructure:
    """Query wrapper over a ScenePack (immutable, shareable across threads)."""

    def __init__(self, scene: Scene, lod_index: int):
        self.scene = scene
        self.lod_index = lod_index
        self.pack = build_pack(scene, lod_index)

    def nearest(self, origin, direction, t_min: float = 0.0) -> Hit | None:
        p = self.pack
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        # fresh stack per call: queries stay safe under concurrent use
        tri, t, u, v = kernels.bvh_nearest(
            *p.bvh_args(), p.tv0, p.tv1, p.tv2, p.tobj, p.tlocal,
            o[0], o[1], o[2], d[0], d[1], d[2], t_min,
            np.empty(kernels.STACK_DEPTH, dtype=np.int32),
        )
        if tri < 0:
            return None
        w0 = 1.0 - u - v
        sn = p.tn0[tri] * w0 + p.tn1[tri] * u + p.tn2[tri] * v
        n = float(np.linalg.norm(sn))
        sn = sn / n if n > 0 else p.tgn[tri].copy()
        uv = p.tuv0[tri] * w0 + p.tuv1[tri] * u + p.tuv2[tri] * v
        oi = int(p.tobj[tri])
        return Hit(
            t=float(t),
            obj_index=oi,
            object_id=self.scene.objects[oi].id,
            class_id=int(p.oclass[oi]),
            tri_local=int(p.tlocal[tri]),
            tri_global=int(tri),
            u=float(u),
            v=float(v),
            point=o + t * d,
            geom_normal=p.tgn[tri].copy(),
            shading_normal=sn,
            uv=(float(uv[0]), float(uv[1])),
            incoming=d.copy(),
        )

    def occluded(self, origin, direction, t_min: float, t_max: float) -> bool:
        p = self.pack
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        return bool(
            kernels.bvh_occluded(
                *p.bvh_args(), p.tv0, p.tv1, p.tv2,
                o[0], o[1], o[2], d[0], d[1], d[2], t_min, t_max,
                np.empty(kernels.STACK_DEPTH, dtype=np.int32),
            )
        )


def build_accel(scene: Scene, lod_index: int = 0) -> AccelStructure:
    """Accel for the given LOD selection (cached per scene and index)."""
    if lod_index < 0:
        raise ValueError("lod_index must be >= 0")
    key = ("accel", lod_index)
    if key not in scene._caches:
        scene._caches[key] = AccelStructure(scene, lod_index)
    return scene._caches[key]
