"""Compiled ray-casting kernels (numba, strict IEEE — no fastmath).

Everything here is scalar float64 code jitted per pixel.  Determinism rules:

* the per-pixel RNG is splitmix64 addressed by draw INDEX, so a draw that is
  never needed (light below horizon, missed ray) cannot shift later draws;
* draw layout per pixel: index 2*s / 2*s+1 are the AA jitter of supersample
  s; shadow-sample k of light l at bounce b of supersample s starts at
  2*aa + 2*(((s*(depth+1) + b)*n_lights + l)*shadow_samples + k);
* accumulation order is a fixed nested loop, so output is bit-identical run
  to run and independent of any outer scheduling.

The Moller-Trumbore test below is the binding arithmetic: the brute-force
oracle used in tests writes the same expression tree so ``t`` values match
bitwise.  Ties (equal t) resolve to the lower (object id, triangle id).
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64_1 = np.uint64(1)
U64_11 = np.uint64(11)
U64_30 = np.uint64(30)
U64_27 = np.uint64(27)
U64_31 = np.uint64(31)
GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_A = np.uint64(0xBF58476D1CE4E5B9)
MIX_B = np.uint64(0x94D049BB133111EB)
INV_2_53 = 1.0 / 9007199254740992.0

INF = np.inf
T_EPS = 1e-9  # minimum parametric distance for secondary rays
OFFSET_EPS = 1e-4  # surface offset along the normal for spawned rays
STACK_DEPTH = 128


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> U64_30)) * MIX_A
    z = (z ^ (z >> U64_27)) * MIX_B
    return z ^ (z >> U64_31)


@njit(cache=True)
def uniform_at(seed, index):
    """index-th float in [0, 1) of the stream seeded with ``seed`` (uint64)."""
    z = mix64(seed + (np.uint64(index) + U64_1) * GAMMA)
    return np.float64(z >> U64_11) * INV_2_53


@njit(cache=True)
def _ray_box(ox, oy, oz, dx, dy, dz, ix, iy, iz, lo, hi, t_lo, t_hi):
    """Slab test; returns (hit, entry_t). Inclusive at boundaries, no NaNs.

    ix/iy/iz are the precomputed reciprocal direction components (unused on
    axes where d == 0).  Only used for pruning against padded boxes, so the
    multiply-by-reciprocal rounding is harmless.
    """
    tmin = t_lo
    tmax = t_hi
    for axis in range(3):
        if axis == 0:
            o = ox
            d = dx
            inv = ix
        elif axis == 1:
            o = oy
            d = dy
            inv = iy
        else:
            o = oz
            d = dz
            inv = iz
        if d == 0.0:
            if o < lo[axis] or o > hi[axis]:
                return False, 0.0
        else:
            t1 = (lo[axis] - o) * inv
            t2 = (hi[axis] - o) * inv
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > tmin:
                tmin = t1
            if t2 < tmax:
                tmax = t2
            if tmin > tmax:
                return False, 0.0
    return True, tmin


@njit(cache=True)
def _safe_inv(d):
    return 1.0 / d if d != 0.0 else 0.0


@njit(cache=True)
def _ray_tri(ox, oy, oz, dx, dy, dz, v0, v1, v2):
    """Moller-Trumbore; returns (hit, t, u, v). Edges inclusive."""
    e1x = v1[0] - v0[0]
    e1y = v1[1] - v0[1]
    e1z = v1[2] - v0[2]
    e2x = v2[0] - v0[0]
    e2y = v2[1] - v0[1]
    e2z = v2[2] - v0[2]
    hx = dy * e2z - dz * e2y
    hy = dz * e2x - dx * e2z
    hz = dx * e2y - dy * e2x
    a = e1x * hx + e1y * hy + e1z * hz
    if a == 0.0:
        return False, 0.0, 0.0, 0.0
    f = 1.0 / a
    sx = ox - v0[0]
    sy = oy - v0[1]
    sz = oz - v0[2]
    u = f * (sx * hx + sy * hy + sz * hz)
    if u < 0.0 or u > 1.0:
        return False, 0.0, 0.0, 0.0
    qx = sy * e1z - sz * e1y
    qy = sz * e1x - sx * e1z
    qz = sx * e1y - sy * e1x
    v = f * (dx * qx + dy * qy + dz * qz)
    if v < 0.0 or u + v > 1.0:
        return False, 0.0, 0.0, 0.0
    t = f * (e2x * qx + e2y * qy + e2z * qz)
    return True, t, u, v


@njit(cache=True)
def bvh_nearest(
    bmin, bmax, left, right, start, count,
    tv0, tv1, tv2, tobj, tlocal,
    ox, oy, oz, dx, dy, dz, t_lo, stack,
):
    """Nearest hit along the ray with t > t_lo.

    Returns (tri_index, t, u, v); tri_index is -1 on miss.  Ties at equal t
    go to the lower (object id, local triangle id) — identical to the
    brute-force rule, so BVH and exhaustive search agree exactly.
    """
    best_t = INF
    best_tri = -1
    best_u = 0.0
    best_v = 0.0
    best_obj = 2147483647
    best_loc = 2147483647
    if left.shape[0] == 0:
        return best_tri, best_t, best_u, best_v
    ix = _safe_inv(dx)
    iy = _safe_inv(dy)
    iz = _safe_inv(dz)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        hit, entry = _ray_box(ox, oy, oz, dx, dy, dz, ix, iy, iz, bmin[node], bmax[node], t_lo, best_t)
        if not hit or entry > best_t:
            continue
        if left[node] < 0:
            s = start[node]
            for i in range(s, s + count[node]):
                ok, t, u, v = _ray_tri(ox, oy, oz, dx, dy, dz, tv0[i], tv1[i], tv2[i])
                if not ok or t <= t_lo:
                    continue
                if t < best_t or (
                    t == best_t
                    and (
                        tobj[i] < best_obj
                        or (tobj[i] == best_obj and tlocal[i] < best_loc)
                    )
                ):
                    best_t = t
                    best_tri = i
                    best_u = u
                    best_v = v
                    best_obj = tobj[i]
                    best_loc = tlocal[i]
        else:
            # push the farther child first so the nearer pops first
            lhit, lentry = _ray_box(
                ox, oy, oz, dx, dy, dz, ix, iy, iz, bmin[left[node]], bmax[left[node]], t_lo, best_t
            )
            rhit, rentry = _ray_box(
                ox, oy, oz, dx, dy, dz, ix, iy, iz, bmin[right[node]], bmax[right[node]], t_lo, best_t
            )
            if lhit and rhit:
                if lentry <= rentry:
                    stack[sp] = right[node]
                    sp += 1
                    stack[sp] = left[node]
                    sp += 1
                else:
                    stack[sp] = left[node]
                    sp += 1
                    stack[sp] = right[node]
                    sp += 1
            elif lhit:
                stack[sp] = left[node]
                sp += 1
            elif rhit:
                stack[sp] = right[node]
                sp += 1
    return best_tri, best_t, best_u, best_v


@njit(cache=True)
def bvh_occluded(
    bmin, bmax, left, right, start, count,
    tv0, tv1, tv2,
    ox, oy, oz, dx, dy, dz, t_lo, t_hi, stack,
):
    """True if any triangle lies in (t_lo, t_hi) along the ray (early-out)."""
    if left.shape[0] == 0:
        return False
    ix = _safe_inv(dx)
    iy = _safe_inv(dy)
    iz = _safe_inv(dz)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        hit, _ = _ray_box(ox, oy, oz, dx, dy, dz, ix, iy, iz, bmin[node], bmax[node], t_lo, t_hi)
        if not hit:
            continue
        if left[node] < 0:
            s = start[node]
            for i in range(s, s + count[node]):
                ok, t, u, v = _ray_tri(ox, oy, oz, dx, dy, dz, tv0[i], tv1[i], tv2[i])
                if ok and t > t_lo and t < t_hi:
                    return True
        else:
            stack[sp] = left[node]
            sp += 1
            stack[sp] = right[node]
            sp += 1
    return False


@njit(cache=True)
def sample_texture(tex_data, mip_off, mip_w, mip_h, tex_mip_start, tex_mip_count, tex, level, u, v):
    """Nearest-texel lookup at a fixed mip level; repeat addressing."""
    lv = level
    if lv >= tex_mip_count[tex]:
        lv = tex_mip_count[tex] - 1
    mip = tex_mip_start[tex] + lv
    w = mip_w[mip]
    h = mip_h[mip]
    uu = u - np.floor(u)
    vv = v - np.floor(v)
    x = int(uu * w)
    if x >= w:
        x = w - 1
    y = int(vv * h)
    if y >= h:
        y = h - 1
    base = mip_off[mip] + (y * w + x) * 3
    return tex_data[base], tex_data[base + 1], tex_data[base + 2]


@njit(cache=True)
def _shade_lit(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2,
    lkind, lvec, lcolor, lint, lrad,
    amb_r, amb_g, amb_b,
    px, py, pz, nx, ny, nz, vx, vy, vz,
    alb_r, alb_g, alb_b, spec_strength, shininess,
    shadow_samples, pixel_seed, draw_base, stack,
):
    """Direct lighting at a point: ambient + per-light diffuse/specular with
    stratified soft-shadow visibility.  Returns (r, g, b, rays_traced)."""
    r = amb_r * alb_r
    g = amb_g * alb_g
    b = amb_b * alb_b
    rays = 0
    grid_w = int(np.floor(np.sqrt(np.float64(shadow_samples))))
    if grid_w < 1:
        grid_w = 1
    grid_h = (shadow_samples + grid_w - 1) // grid_w
    offx = px + nx * OFFSET_EPS
    offy = py + ny * OFFSET_EPS
    offz = pz + nz * OFFSET_EPS
    for li in range(lkind.shape[0]):
        if lkind[li] == 0:
            # directional: unit vector toward the light
            lx = -lvec[li, 0]
            ly = -lvec[li, 1]
            lz = -lvec[li, 2]
            dist = INF
            atten = 1.0
        else:
            lx = lvec[li, 0] - px
            ly = lvec[li, 1] - py
            lz = lvec[li, 2] - pz
            dist = np.sqrt(lx * lx + ly * ly + lz * lz)
            if dist <= 0.0:
                continue
            lx /= dist
            ly /= dist
            lz /= dist
            atten = 1.0 / max(dist * dist, 1e-6)
        ndotl = nx * lx + ny * ly + nz * lz
        if ndotl <= 0.0:
            continue

        # disk basis perpendicular to the light direction
        if abs(ly) > 0.9:
            ax, ay, az = 1.0, 0.0, 0.0
        else:
            ax, ay, az = 0.0, 1.0, 0.0
        t1x = ly * az - lz * ay
        t1y = lz * ax - lx * az
        t1z = lx * ay - ly * ax
        t1n = np.sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
        t1x /= t1n
        t1y /= t1n
        t1z /= t1n
        t2x = ly * t1z - lz * t1y
        t2y = lz * t1x - lx * t1z
        t2z = lx * t1y - ly * t1x

        reached = 0
        for k in range(shadow_samples):
            di = draw_base + 2 * (li * shadow_samples + k)
            u1 = uniform_at(pixel_seed, di)
            u2 = uniform_at(pixel_seed, di + 1)
            cx = k % grid_w
            cy = k // grid_w
            su = (cx + u1) / grid_w
            sv = (cy + u2) / grid_h
            rad = lrad[li] * np.sqrt(su)
            ang = 6.283185307179586 * sv
            ca = np.cos(ang)
            sa = np.sin(ang)
            jx = (t1x * ca + t2x * sa) * rad
            jy = (t1y * ca + t2y * sa) * rad
            jz = (t1z * ca + t2z * sa) * rad
            if lkind[li] == 0:
                sx = lx + jx
                sy = ly + jy
                sz = lz + jz
                sn = np.sqrt(sx * sx + sy * sy + sz * sz)
                sx /= sn
                sy /= sn
                sz /= sn
                tmax = INF
            else:
                tx = lvec[li, 0] + jx - offx
                ty = lvec[li, 1] + jy - offy
                tz = lvec[li, 2] + jz - offz
                tdist = np.sqrt(tx * tx + ty * ty + tz * tz)
                if tdist <= 0.0:
                    reached += 1
                    continue
                sx = tx / tdist
                sy = ty / tdist
                sz = tz / tdist
                tmax = tdist - 1e-6
            rays += 1
            if not bvh_occluded(
                bmin, bmax, left, right, start, count, tv0, tv1, tv2,
                offx, offy, offz, sx, sy, sz, T_EPS, tmax, stack,
            ):
                reached += 1
        if reached == 0:
            continue
        vis = reached / shadow_samples

        scale = vis * atten * lint[li]
        diff = ndotl * scale
        r += alb_r * lcolor[li, 0] * diff
        g += alb_g * lcolor[li, 1] * diff
        b += alb_b * lcolor[li, 2] * diff
        if spec_strength > 0.0:
            hx = lx + vx
            hy = ly + vy
            hz = lz + vz
            hn = np.sqrt(hx * hx + hy * hy + hz * hz)
            if hn > 0.0:
                ndoth = (nx * hx + ny * hy + nz * hz) / hn
                if ndoth > 0.0:
                    sp = spec_strength * (ndoth ** shininess) * scale
                    r += lcolor[li, 0] * sp
                    g += lcolor[li, 1] * sp
                    b += lcolor[li, 2] * sp
    return r, g, b, rays


@njit(cache=True)
def trace_sample(
    bmin, bmax, left, right, start, count,
    tv0, tv1, tv2, tn0, tn1, tn2, tuv0, tuv1, tuv2, tgn, tobj, tlocal,
    oclass, malbedo, mspec, mshin, mrefl, mtex,
    tex_data, mip_off, mip_w, mip_h, tex_mip_start, tex_mip_count,
    lkind, lvec, lcolor, lint, lrad, amb_r, amb_g, amb_b,
    unlit, mip_bias, shadow_samples, reflection_depth, aa_samples,
    ox, oy, oz, dx, dy, dz, near,
    pixel_seed, sample_index, stack,
):
    """One camera sample: primary hit, local shading, bounded mirror chain.

    Returns (r, g, b, rays_traced)."""
    col_r = 0.0
    col_g = 0.0
    col_b = 0.0
    weight = 1.0
    rays = 0
    t_lo = near
    n_lights = lkind.shape[0]
    for bounce in range(reflection_depth + 1):
        rays += 1
        tri, t, u, v = bvh_nearest(
            bmin, bmax, left, right, start, count, tv0, tv1, tv2, tobj, tlocal,
            ox, oy, oz, dx, dy, dz, t_lo, stack,
        )
        if tri < 0:
            col_r += weight * amb_r
            col_g += weight * amb_g
            col_b += weight * amb_b
            break
        px = ox + t * dx
        py = oy + t * dy
        pz = oz + t * dz
        w0 = 1.0 - u - v
        nx = tn0[tri, 0] * w0 + tn1[tri, 0] * u + tn2[tri, 0] * v
        ny = tn0[tri, 1] * w0 + tn1[tri, 1] * u + tn2[tri, 1] * v
        nz = tn0[tri, 2] * w0 + tn1[tri, 2] * u + tn2[tri, 2] * v
        nn = np.sqrt(nx * nx + ny * ny + nz * nz)
        if nn > 0.0:
            nx /= nn
            ny /= nn
            nz /= nn
        else:
            nx = tgn[tri, 0]
            ny = tgn[tri, 1]
            nz = tgn[tri, 2]
        # two-sided shading: face the incoming ray
        if nx * dx + ny * dy + nz * dz > 0.0:
            nx = -nx
            ny = -ny
            nz = -nz
        obj = tobj[tri]
        tex = mtex[obj]
        if tex >= 0:
            uu = tuv0[tri, 0] * w0 + tuv1[tri, 0] * u + tuv2[tri, 0] * v
            vv = tuv0[tri, 1] * w0 + tuv1[tri, 1] * u + tuv2[tri, 1] * v
            alb_r, alb_g, alb_b = sample_texture(
                tex_data, mip_off, mip_w, mip_h, tex_mip_start, tex_mip_count,
                tex, mip_bias, uu, vv,
            )
        else:
            alb_r = malbedo[obj, 0]
            alb_g = malbedo[obj, 1]
            alb_b = malbedo[obj, 2]
        if unlit:
            col_r += weight * alb_r
            col_g += weight * alb_g
            col_b += weight * alb_b
            break
        draw_base = 2 * aa_samples + 2 * (
            ((sample_index * (reflection_depth + 1) + bounce) * n_lights) * shadow_samples
        )
        lr, lg, lb, lrays = _shade_lit(
            bmin, bmax, left, right, start, count, tv0, tv1, tv2,
            lkind, lvec, lcolor, lint, lrad, amb_r, amb_g, amb_b,
            px, py, pz, nx, ny, nz, -dx, -dy, -dz,
            alb_r, alb_g, alb_b, mspec[obj], mshin[obj],
            shadow_samples, pixel_seed, draw_base, stack,
        )
        rays += lrays
        col_r += weight * lr
        col_g += weight * lg
        col_b += weight * lb
        refl = mrefl[obj]
        if bounce < reflection_depth and refl > 0.0:
            weight *= refl
            ddn = dx * nx + dy * ny + dz * nz
            dx = dx - 2.0 * ddn * nx
            dy = dy - 2.0 * ddn * ny
            dz = dz - 2.0 * ddn * nz
            ox = px + nx * OFFSET_EPS
            oy = py + ny * OFFSET_EPS
            oz = pz + nz * OFFSET_EPS
            t_lo = T_EPS
        else:
            break
    return col_r, col_g, col_b, rays


@njit(cache=True)
def render_color(
    bmin, bmax, left, right, start, count,
    tv0, tv1, tv2, tn0, tn1, tn2, tuv0, tuv1, tuv2, tgn, tobj, tlocal,
    oclass, malbedo, mspec, mshin, mrefl, mtex,
    tex_data, mip_off, mip_w, mip_h, tex_mip_start, tex_mip_count,
    lkind, lvec, lcolor, lint, lrad, amb_r, amb_g, amb_b,
    unlit, mip_bias, shadow_samples, reflection_depth, aa_samples,
    cam_x, cam_y, cam_z,
    right_x, right_y, right_z, up_x, up_y, up_z, fwd_x, fwd_y, fwd_z,
    tan_half_h, tan_half_v, near, frame_seed,
    out_rgb, out_rays,
):
    """Jittered, supersampled color pass into ``out_rgb`` (h, w, 3) float64."""
    h = out_rgb.shape[0]
    w = out_rgb.shape[1]
    stack = np.empty(STACK_DEPTH, dtype=np.int32)
    inv_aa = 1.0 / aa_samples
    for y in range(h):
        for x in range(w):
            pixel_seed = frame_seed ^ np.uint64(y * w + x)
            acc_r = 0.0
            acc_g = 0.0
            acc_b = 0.0
            nrays = 0
            for s in range(aa_samples):
                jx = uniform_at(pixel_seed, 2 * s)
                jy = uniform_at(pixel_seed, 2 * s + 1)
                if aa_samples == 4:
                    # 2x2 stratified grid
                    offx = ((s % 2) + jx) * 0.5
                    offy = ((s // 2) + jy) * 0.5
                else:
                    offx = jx
                    offy = jy
                u_ndc = 2.0 * (x + offx) / w - 1.0
                v_ndc = 1.0 - 2.0 * (y + offy) / h
                ddx = u_ndc * tan_half_h * right_x + v_ndc * tan_half_v * up_x + fwd_x
                ddy = u_ndc * tan_half_h * right_y + v_ndc * tan_half_v * up_y + fwd_y
                ddz = u_ndc * tan_half_h * right_z + v_ndc * tan_half_v * up_z + fwd_z
                dn = np.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
                ddx /= dn
                ddy /= dn
                ddz /= dn
                r, g, b, rays = trace_sample(
                    bmin, bmax, left, right, start, count,
                    tv0, tv1, tv2, tn0, tn1, tn2, tuv0, tuv1, tuv2, tgn, tobj, tlocal,
                    oclass, malbedo, mspec, mshin, mrefl, mtex,
                    tex_data, mip_off, mip_w, mip_h, tex_mip_start, tex_mip_count,
                    lkind, lvec, lcolor, lint, lrad, amb_r, amb_g, amb_b,
                    unlit, mip_bias, shadow_samples, reflection_depth, aa_samples,
                    cam_x, cam_y, cam_z, ddx, ddy, ddz, near,
                    pixel_seed, s, stack,
                )
                acc_r += r
                acc_g += g
                acc_b += b
                nrays += rays
            out_rgb[y, x, 0] = acc_r * inv_aa
            out_rgb[y, x, 1] = acc_g * inv_aa
            out_rgb[y, x, 2] = acc_b * inv_aa
            out_rays[y, x] = nrays


@njit(cache=True)
def render_hits(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, tobj, tlocal,
    cam_x, cam_y, cam_z,
    right_x, right_y, right_z, up_x, up_y, up_z, fwd_x, fwd_y, fwd_z,
    tan_half_h, tan_half_v, near,
    out_tri, out_t, out_u, out_v,
):
    """Pixel-center nearest-hit pass (the shared ground-truth ray grid).

    Directions are left UNNORMALIZED (forward component 1), so the returned
    ray parameter is the forward (orthographic) depth directly — exact for
    camera-facing planes — and ``near`` clips on forward depth.  Perspective
    depth is t * |d|; which triangle wins is unaffected by the scaling.
    """
    h = out_tri.shape[0]
    w = out_tri.shape[1]
    stack = np.empty(STACK_DEPTH, dtype=np.int32)
    for y in range(h):
        for x in range(w):
            u_ndc = 2.0 * (x + 0.5) / w - 1.0
            v_ndc = 1.0 - 2.0 * (y + 0.5) / h
            ddx = u_ndc * tan_half_h * right_x + v_ndc * tan_half_v * up_x + fwd_x
            ddy = u_ndc * tan_half_h * right_y + v_ndc * tan_half_v * up_y + fwd_y
            ddz = u_ndc * tan_half_h * right_z + v_ndc * tan_half_v * up_z + fwd_z
            tri, t, u, v = bvh_nearest(
                bmin, bmax, left, right, start, count, tv0, tv1, tv2, tobj, tlocal,
                cam_x, cam_y, cam_z, ddx, ddy, ddz, near, stack,
            )
            out_tri[y, x] = tri
            out_t[y, x] = t if tri >= 0 else INF
            out_u[y, x] = u
            out_v[y, x] = v
