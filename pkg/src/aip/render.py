"""Deterministic frame rendering: color pass + pixel-aligned ground truths.

``render_frame`` is a pure function of (scene, pose, profile, settings,
intrinsics, frame_seed).  The color path renders at ``render_scale``
resolution with jittered supersampling and is bilinearly upsampled; the
ground-truth path casts exactly one pixel-center ray per full-resolution
pixel against LOD-0 geometry, shared by all four GT channels — so ground
truth is bit-identical across every fidelity and lighting setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kernels
from .accel import build_accel, build_pack, pack_lights, Hit
from .annotate import DepthEncoding, encode_depth, encode_normal, round_half_away
from .scene import Scene, CameraIntrinsics


@dataclass
class Pose:
    position: np.ndarray  # meters
    yaw: float  # degrees, normalized to [0, 360)
    pitch: float  # degrees, in [-89, 89]

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.yaw = float(self.yaw) % 360.0
        self.pitch = float(self.pitch)
        if not -89.0 <= self.pitch <= 89.0:
            raise ValueError(f"pitch {self.pitch} outside [-89, 89]")

    def forward(self) -> np.ndarray:
        yaw = math.radians(self.yaw)
        pitch = math.radians(self.pitch)
        return np.array(
            [
                math.cos(pitch) * math.sin(yaw),
                math.sin(pitch),
                math.cos(pitch) * math.cos(yaw),
            ]
        )

    def basis(self):
        """Right-handed camera frame (right, up, forward); yaw 0 faces +z."""
        fwd = self.forward()
        world_up = np.array([0.0, 1.0, 0.0])
        right = np.cross(world_up, fwd)
        right /= np.linalg.norm(right)
        up = np.cross(fwd, right)
        return right, up, fwd


@dataclass
class RenderSettings:
    render_scale: float = 1.0  # (0, 1]
    mip_bias: int = 0
    shadow_samples: int = 16
    reflection_depth: int = 2
    aa_samples: int = 4  # 1 or 4
    lod_index: int = 0
    shading_mode: str = "lit"  # "lit" | "unlit"

    def __post_init__(self):
        if not (0.0 < self.render_scale <= 1.0):
            raise ValueError("render_scale must be in (0, 1]")
        if self.mip_bias < 0:
            raise ValueError("mip_bias must be >= 0")
        if self.shadow_samples < 1:
            raise ValueError("shadow_samples must be >= 1")
        if self.reflection_depth < 0:
            raise ValueError("reflection_depth must be >= 0")
        if self.aa_samples not in (1, 4):
            raise ValueError("aa_samples must be 1 or 4")
        if self.lod_index < 0:
            raise ValueError("lod_index must be >= 0")
        if self.shading_mode not in ("lit", "unlit"):
            raise ValueError("shading_mode must be 'lit' or 'unlit'")


@dataclass
class FrameOutput:
    color: np.ndarray  # (h, w, 3) uint8
    depth_persp: np.ndarray  # (h, w) uint16
    depth_ortho: np.ndarray  # (h, w) uint16
    normals: np.ndarray  # (h, w, 3) uint8
    labels: np.ndarray  # (h, w) uint8
    pose: Pose
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = self.color.shape[:2]
        for buf in (self.depth_persp, self.depth_ortho, self.normals, self.labels):
            if buf.shape[:2] != shape:
                raise ValueError("all frame buffers must share the same dimensions")


def primary_ray(intrinsics: CameraIntrinsics, pose: Pose, px, jitter=(0.5, 0.5)):
    """Ray through pixel ``px`` = (x, y); jitter in [0,1)^2, (0.5, 0.5) = center.

    Returns (origin, unit direction).  Matches the kernel arithmetic exactly.
    """
    right, up, fwd = pose.basis()
    tan_half_v = math.tan(math.radians(intrinsics.vertical_fov) * 0.5)
    tan_half_h = tan_half_v * intrinsics.aspect
    u_ndc = 2.0 * (px[0] + jitter[0]) / intrinsics.width - 1.0
    v_ndc = 1.0 - 2.0 * (px[1] + jitter[1]) / intrinsics.height
    d = u_ndc * tan_half_h * right + v_ndc * tan_half_v * up + fwd
    return pose.position.copy(), d / np.linalg.norm(d)


def _scaled_dims(intrinsics: CameraIntrinsics, scale: float):
    w = max(1, int(round_half_away(intrinsics.width * scale)))
    h = max(1, int(round_half_away(intrinsics.height * scale)))
    return w, h


def _upsample_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Half-pixel-aligned bilinear resize; identity when sizes match."""
    h, w = img.shape[:2]
    if (w, h) == (out_w, out_h):
        return img
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]
    top = img[y0][:, x0] * (1.0 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1.0 - fx) + img[y1][:, x1] * fx
    return top * (1.0 - fy) + bot * fy


def quantize_rgb(img: np.ndarray) -> np.ndarray:
    """float [0,1] -> u8 with round-half-away-from-zero."""
    return round_half_away(255.0 * np.clip(img, 0.0, 1.0)).astype(np.uint8)


def gt_plane_dirs(pose: Pose, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Unnormalized pixel-center ray directions with forward component 1.

    The expression tree matches the GT kernel exactly, so these are the
    bitwise-identical directions the renderer traced.
    """
    right, up, fwd = pose.basis()
    tan_half_v = math.tan(math.radians(intrinsics.vertical_fov) * 0.5)
    tan_half_h = tan_half_v * intrinsics.aspect
    w, h = intrinsics.width, intrinsics.height
    su = (2.0 * (np.arange(w) + 0.5) / w - 1.0) * tan_half_h
    sv = (1.0 - 2.0 * (np.arange(h) + 0.5) / h) * tan_half_v
    return (
        su[None, :, None] * right[None, None, :]
        + sv[:, None, None] * up[None, None, :]
        + fwd[None, None, :]
    )


def render_gt_hits(scene: Scene, pose: Pose, intrinsics: CameraIntrinsics):
    """The shared ground-truth ray grid: pixel centers, LOD 0, no jitter.

    Returns (tri, t, u, v); tri is -1 where the ray missed.  Directions are
    the unnormalized plane directions of ``gt_plane_dirs``, so t is the
    orthographic (forward) depth and t * |d| the perspective depth.
    """
    pack = build_accel(scene, 0).pack
    right, up, fwd = pose.basis()
    tan_half_v = math.tan(math.radians(intrinsics.vertical_fov) * 0.5)
    tan_half_h = tan_half_v * intrinsics.aspect
    h, w = intrinsics.height, intrinsics.width
    out_tri = np.empty((h, w), dtype=np.int64)
    out_t = np.empty((h, w), dtype=np.float64)
    out_u = np.empty((h, w), dtype=np.float64)
    out_v = np.empty((h, w), dtype=np.float64)
    kernels.render_hits(
        *pack.bvh_args(), pack.tv0, pack.tv1, pack.tv2, pack.tobj, pack.tlocal,
        pose.position[0], pose.position[1], pose.position[2],
        right[0], right[1], right[2], up[0], up[1], up[2], fwd[0], fwd[1], fwd[2],
        tan_half_h, tan_half_v, intrinsics.near,
        out_tri, out_t, out_u, out_v,
    )
    return out_tri, out_t, out_u, out_v


def _gt_buffers(scene: Scene, pose: Pose, intrinsics: CameraIntrinsics):
    pack = build_accel(scene, 0).pack
    h, w = intrinsics.height, intrinsics.width
    tri, t, u, v = render_gt_hits(scene, pose, intrinsics)
    hit = tri >= 0
    tri_safe = np.where(hit, tri, 0)
    enc = DepthEncoding(max_range=scene.depth_range)

    # t parameterizes forward depth (plane directions); persp = t * |d|.
    # The dot term is clamped to |d| so ortho <= persp holds elementwise.
    _, _, fwdv = pose.basis()
    dirs = gt_plane_dirs(pose, intrinsics)
    dlen = np.linalg.norm(dirs, axis=-1)
    ortho_scale = np.minimum(dirs @ fwdv, dlen)
    persp = np.where(hit, t * dlen, enc.max_range)
    ortho = np.where(hit, t * ortho_scale, enc.max_range)

    if pack.triangle_count:
        w0 = 1.0 - u - v
        sn = (
            pack.tn0[tri_safe] * w0[..., None]
            + pack.tn1[tri_safe] * u[..., None]
            + pack.tn2[tri_safe] * v[..., None]
        )
        lens = np.linalg.norm(sn, axis=-1, keepdims=True)
        flat = lens[..., 0] == 0
        sn = np.where(lens > 0, sn / np.where(lens == 0, 1.0, lens), 0.0)
        sn[flat] = pack.tgn[tri_safe][flat]
        sn[~hit] = 0.0
        labels = np.where(hit, pack.oclass[pack.tobj[tri_safe]], 0).astype(np.uint8)
    else:
        sn = np.zeros((h, w, 3))
        labels = np.zeros((h, w), dtype=np.uint8)

    return (
        encode_depth(persp, enc).astype(np.uint16),
        encode_depth(ortho, enc).astype(np.uint16),
        encode_normal(sn),
        labels,
    )


def render_frame(
    scene: Scene,
    pose: Pose,
    profile_name: str,
    settings: RenderSettings,
    intrinsics: CameraIntrinsics | None = None,
    frame_seed: int = 0,
) -> FrameOutput:
    """Render the color image and all four ground-truth buffers for one pose.

    Ray misses: color = profile ambient (sky), depth = max range, normal =
    zero vector, label = 0.
    """
    if intrinsics is None:
        intrinsics = scene.camera_defaults
    lights = pack_lights(scene, profile_name)  # raises for unknown profile
    pack = build_pack(scene, settings.lod_index)

    right, up, fwd = pose.basis()
    tan_half_v = math.tan(math.radians(intrinsics.vertical_fov) * 0.5)
    tan_half_h = tan_half_v * intrinsics.aspect

    ws, hs = _scaled_dims(intrinsics, settings.render_scale)
    rgb = np.empty((hs, ws, 3), dtype=np.float64)
    rays = np.empty((hs, ws), dtype=np.int64)
    amb = lights.ambient
    kernels.render_color(
        *pack.bvh_args(),
        pack.tv0, pack.tv1, pack.tv2, pack.tn0, pack.tn1, pack.tn2,
        pack.tuv0, pack.tuv1, pack.tuv2, pack.tgn, pack.tobj, pack.tlocal,
        pack.oclass, pack.malbedo, pack.mspec, pack.mshin, pack.mrefl, pack.mtex,
        pack.tex_data, pack.mip_off, pack.mip_w, pack.mip_h,
        pack.tex_mip_start, pack.tex_mip_count,
        lights.kind, lights.vec, lights.color, lights.intensity, lights.radius,
        amb[0], amb[1], amb[2],
        settings.shading_mode == "unlit",
        settings.mip_bias, settings.shadow_samples, settings.reflection_depth,
        settings.aa_samples,
        pose.position[0], pose.position[1], pose.position[2],
        right[0], right[1], right[2], up[0], up[1], up[2], fwd[0], fwd[1], fwd[2],
        tan_half_h, tan_half_v, intrinsics.near,
        np.uint64(frame_seed & 0xFFFFFFFFFFFFFFFF),
        rgb, rays,
    )
    color = quantize_rgb(_upsample_bilinear(rgb, intrinsics.width, intrinsics.height))

    depth_persp, depth_ortho, normals, labels = _gt_buffers(scene, pose, intrinsics)

    meta = {
        "scene": scene.name,
        "profile": profile_name,
        "settings": asdict(settings),
        "frame_seed": int(frame_seed),
        "rays_traced": int(rays.sum()),
        "depth_max_range": scene.depth_range,
        "class_names": list(scene.classes),
    }
    return FrameOutput(
        color=color,
        depth_persp=depth_persp,
        depth_ortho=depth_ortho,
        normals=normals,
        labels=labels,
        pose=pose,
        meta=meta,
    )


def shade(hit: Hit, scene: Scene, profile: str, settings: RenderSettings, depth_budget: int, rng_seed: int = 0):
    """Color at a hit point (pre-quantization RGB floats).

    lit: ambient*albedo + sum over lights of visibility*(diffuse + specular)
    plus reflectivity * mirror bounce while depth_budget > 0; unlit: albedo
    only.  ``hit`` must come from build_accel(scene, settings.lod_index);
    shadow sampling uses the same per-pixel draw layout as the renderer.
    """
    pack = build_pack(scene, settings.lod_index)
    accel = build_accel(scene, settings.lod_index)
    lights = pack_lights(scene, profile)
    amb = lights.ambient
    seed = np.uint64(rng_seed & 0xFFFFFFFFFFFFFFFF)
    stack = np.empty(kernels.STACK_DEPTH, dtype=np.int32)

    def albedo_at(h: Hit):
        tex = pack.mtex[h.obj_index]
        if tex >= 0:
            return kernels.sample_texture(
                pack.tex_data, pack.mip_off, pack.mip_w, pack.mip_h,
                pack.tex_mip_start, pack.tex_mip_count,
                tex, settings.mip_bias, h.uv[0], h.uv[1],
            )
        return tuple(pack.malbedo[h.obj_index])

    def local(h: Hit, bounce: int):
        alb = albedo_at(h)
        if settings.shading_mode == "unlit":
            return alb
        n = h.shading_normal
        if float(np.dot(n, h.incoming)) > 0.0:
            n = -n
        view = -h.incoming
        draw_base = 2 * settings.aa_samples + 2 * (
            bounce * len(lights.kind) * settings.shadow_samples
        )
        r, g, b, _ = kernels._shade_lit(
            *pack.bvh_args(), pack.tv0, pack.tv1, pack.tv2,
            lights.kind, lights.vec, lights.color, lights.intensity, lights.radius,
            amb[0], amb[1], amb[2],
            h.point[0], h.point[1], h.point[2], n[0], n[1], n[2],
            view[0], view[1], view[2],
            alb[0], alb[1], alb[2],
            pack.mspec[h.obj_index], pack.mshin[h.obj_index],
            settings.shadow_samples, seed, draw_base, stack,
        )
        return (r, g, b)

    color = np.zeros(3)
    weight = 1.0
    current = hit
    bounce = 0
    while True:
        color += weight * np.asarray(local(current, bounce))
        if settings.shading_mode == "unlit":
            break
        refl = pack.mrefl[current.obj_index]
        if bounce >= depth_budget or refl <= 0.0:
            break
        n = current.shading_normal
        if float(np.dot(n, current.incoming)) > 0.0:
            n = -n
        d = current.incoming
        d = d - 2.0 * float(np.dot(d, n)) * n
        origin = current.point + n * kernels.OFFSET_EPS
        nxt = accel.nearest(origin, d, t_min=kernels.T_EPS)
        weight *= refl
        if nxt is None:
            color += weight * np.asarray(amb)
            break
        current = nxt
        bounce += 1
    return tuple(float(c) for c in color)
