"""Numba kernels for the per-round hot paths.

Three loops dominate a planning round: depth-ray insertion into the voxel
grid, the fast-marching distance solve, and depth-image rendering. All are
plain nopython loops with cache=True so compiled artifacts persist across
processes. fastmath stays off: results must be bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_BIG = 1e30


@njit(cache=True)
def _ray_counts(origins, endpoints, is_hit, bbox_min, voxel_size,
                nx, ny, nz, hits, frees):
    """Accumulate per-voxel hit/free-traversal counts for a ray batch.

    Rays are clipped to the grid bounding box. Cells strictly before a
    ray's endpoint cell count as traversed-free; the endpoint cell counts
    as a hit only when the ray carries a return and the endpoint lies
    inside the box. No-return and truncated rays free their final cell.
    """
    n_rays = origins.shape[0]
    inv_a = 1.0 / voxel_size
    counts = (nx, ny, nz)
    max_steps = nx + ny + nz + 4
    for r in range(n_rays):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx = endpoints[r, 0] - ox
        dy = endpoints[r, 1] - oy
        dz = endpoints[r, 2] - oz

        t_enter = 0.0
        t_exit = 1.0
        ok = True
        for k in range(3):
            o = (ox, oy, oz)[k]
            d = (dx, dy, dz)[k]
            lo = bbox_min[k]
            hi = bbox_min[k] + voxel_size * counts[k]
            if d == 0.0:
                if o < lo or o >= hi:
                    ok = False
                    break
            else:
                ta = (lo - o) / d
                tb = (hi - o) / d
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t_enter:
                    t_enter = ta
                if tb < t_exit:
                    t_exit = tb
        if not ok or t_enter > t_exit:
            continue

        px = ox + t_enter * dx
        py = oy + t_enter * dy
        pz = oz + t_enter * dz
        ix = int((px - bbox_min[0]) * inv_a)
        iy = int((py - bbox_min[1]) * inv_a)
        iz = int((pz - bbox_min[2]) * inv_a)
        if ix < 0:
            ix = 0
        if iy < 0:
            iy = 0
        if iz < 0:
            iz = 0
        if ix > nx - 1:
            ix = nx - 1
        if iy > ny - 1:
            iy = ny - 1
        if iz > nz - 1:
            iz = nz - 1

        # endpoint cell, when the return lands inside the box
        has_end = False
        ex = ey = ez = -1
        if is_hit[r]:
            fx = (endpoints[r, 0] - bbox_min[0]) * inv_a
            fy = (endpoints[r, 1] - bbox_min[1]) * inv_a
            fz = (endpoints[r, 2] - bbox_min[2]) * inv_a
            if 0.0 <= fx < nx and 0.0 <= fy < ny and 0.0 <= fz < nz:
                has_end = True
                ex, ey, ez = int(fx), int(fy), int(fz)

        step_x = 1 if dx > 0.0 else -1
        step_y = 1 if dy > 0.0 else -1
        step_z = 1 if dz > 0.0 else -1
        if dx != 0.0:
            nb = bbox_min[0] + (ix + (1 if dx > 0.0 else 0)) * voxel_size
            t_max_x = (nb - ox) / dx
            t_dx = voxel_size / abs(dx)
        else:
            t_max_x = _BIG
            t_dx = _BIG
        if dy != 0.0:
            nb = bbox_min[1] + (iy + (1 if dy > 0.0 else 0)) * voxel_size
            t_max_y = (nb - oy) / dy
            t_dy = voxel_size / abs(dy)
        else:
            t_max_y = _BIG
            t_dy = _BIG
        if dz != 0.0:
            nb = bbox_min[2] + (iz + (1 if dz > 0.0 else 0)) * voxel_size
            t_max_z = (nb - oz) / dz
            t_dz = voxel_size / abs(dz)
        else:
            t_max_z = _BIG
            t_dz = _BIG

        steps = 0
        while steps < max_steps:
            at_end = has_end and ix == ex and iy == ey and iz == ez
            if at_end:
                break
            idx = (ix * ny + iy) * nz + iz
            frees[idx] += 1
            if t_max_x <= t_max_y and t_max_x <= t_max_z:
                t_next = t_max_x
            elif t_max_y <= t_max_z:
                t_next = t_max_y
            else:
                t_next = t_max_z
            if t_next >= t_exit:
                break
            if t_max_x <= t_max_y and t_max_x <= t_max_z:
                ix += step_x
                t_max_x += t_dx
                if ix < 0 or ix >= nx:
                    break
            elif t_max_y <= t_max_z:
                iy += step_y
                t_max_y += t_dy
                if iy < 0 or iy >= ny:
                    break
            else:
                iz += step_z
                t_max_z += t_dz
                if iz < 0 or iz >= nz:
                    break
            steps += 1
        if has_end:
            hits[(ex * ny + ey) * nz + ez] += 1


@njit(cache=True)
def _traverse_cells(origin, endpoint, bbox_min, voxel_size, nx, ny, nz,
                    out_cells):
    """Cells a single clipped ray passes through, in flat-index order
    (test support). Returns the number of cells written to out_cells;
    includes the endpoint cell when it lies inside the box.
    """
    hits = np.zeros(nx * ny * nz, dtype=np.int64)
    frees = np.zeros(nx * ny * nz, dtype=np.int64)
    origins = origin.reshape(1, 3)
    endpoints = endpoint.reshape(1, 3)
    is_hit = np.ones(1, dtype=np.bool_)
    _ray_counts(origins, endpoints, is_hit, bbox_min, voxel_size,
                nx, ny, nz, hits, frees)
    n = 0
    for i in range(nx * ny * nz):
        if hits[i] > 0 or frees[i] > 0:
            out_cells[n] = i
            n += 1
    return n


@njit(cache=True)
def _heap_push(keys, idxs, size, key, idx):
    i = size
    keys[i] = key
    idxs[i] = idx
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] <= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        idxs[parent], idxs[i] = idxs[i], idxs[parent]
        i = parent
    return size + 1


@njit(cache=True)
def _heap_pop(keys, idxs, size):
    key = keys[0]
    idx = idxs[0]
    size -= 1
    keys[0] = keys[size]
    idxs[0] = idxs[size]
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < size and keys[left] < keys[smallest]:
            smallest = left
        if right < size and keys[right] < keys[smallest]:
            smallest = right
        if smallest == i:
            break
        keys[smallest], keys[i] = keys[i], keys[smallest]
        idxs[smallest], idxs[i] = idxs[i], idxs[smallest]
        i = smallest
    return key, idx, size


@njit(cache=True)
def _upwind_solve(dist, state, nx, ny, nz, ix, iy, iz, h):
    """First-order Godunov update from accepted 6-neighbors."""
    a0 = _BIG
    a1 = _BIG
    a2 = _BIG
    for axis in range(3):
        best = _BIG
        for sgn in (-1, 1):
            jx, jy, jz = ix, iy, iz
            if axis == 0:
                jx += sgn
                if jx < 0 or jx >= nx:
                    continue
            elif axis == 1:
                jy += sgn
                if jy < 0 or jy >= ny:
                    continue
            else:
                jz += sgn
                if jz < 0 or jz >= nz:
                    continue
            j = (jx * ny + jy) * nz + jz
            if state[j] == 2 and dist[j] < best:
                best = dist[j]
        if best < a2:
            a2 = best
            if a2 < a1:
                a1, a2 = a2, a1
            if a1 < a0:
                a0, a1 = a1, a0
    if a0 >= _BIG:
        return _BIG
    d = a0 + h
    if a1 < _BIG and d > a1:
        diff = a0 - a1
        disc = 2.0 * h * h - diff * diff
        if disc > 0.0:
            d = 0.5 * (a0 + a1 + np.sqrt(disc))
        if a2 < _BIG and d > a2:
            s3 = a0 + a1 + a2
            disc = s3 * s3 - 3.0 * (a0 * a0 + a1 * a1 + a2 * a2 - h * h)
            if disc > 0.0:
                d = (s3 + np.sqrt(disc)) / 3.0
    return d


@njit(cache=True)
def _fast_march(unsafe, nx, ny, nz, h, d_cap):
    """Distance-to-unsafe over a 6-connected grid.

    Unsafe cells are the zero level set. Free cells within a Chebyshev
    radius of 2 of any unsafe cell are seeded with exact center-to-center
    distances and frozen; the remaining cells get first-order upwind fast
    marching. Far/unreachable cells cap at d_cap.
    """
    n = nx * ny * nz
    dist = np.full(n, d_cap)
    state = np.zeros(n, dtype=np.uint8)   # 0 far, 1 narrow, 2 accepted

    for i in range(n):
        if unsafe[i]:
            dist[i] = 0.0
            state[i] = 2

    # exact near-field band around the zero set
    for ix in range(nx):
        for iy in range(ny):
            for iz in range(nz):
                i = (ix * ny + iy) * nz + iz
                if not unsafe[i]:
                    continue
                for ox in range(-2, 3):
                    jx = ix + ox
                    if jx < 0 or jx >= nx:
                        continue
                    for oy in range(-2, 3):
                        jy = iy + oy
                        if jy < 0 or jy >= ny:
                            continue
                        for oz in range(-2, 3):
                            jz = iz + oz
                            if jz < 0 or jz >= nz:
                                continue
                            j = (jx * ny + jy) * nz + jz
                            if unsafe[j]:
                                continue
                            d = h * np.sqrt(ox * ox + oy * oy + oz * oz)
                            if d < dist[j]:
                                dist[j] = d
    # freeze only values no out-of-band source could beat (those sit at
    # least 3 cells away); the corner of the band stays tentative
    for i in range(n):
        if state[i] == 0 and dist[i] <= 3.0 * h + 1e-12:
            state[i] = 2

    heap_keys = np.empty(8 * n + 16, dtype=np.float64)
    heap_idxs = np.empty(8 * n + 16, dtype=np.int64)
    heap_size = 0

    for ix in range(nx):
        for iy in range(ny):
            for iz in range(nz):
                i = (ix * ny + iy) * nz + iz
                if state[i] == 2:
                    continue
                d = _upwind_solve(dist, state, nx, ny, nz, ix, iy, iz, h)
                if d < dist[i]:
                    dist[i] = d
                if dist[i] < d_cap:
                    state[i] = 1
                    heap_size = _heap_push(heap_keys, heap_idxs, heap_size,
                                           dist[i], i)

    while heap_size > 0:
        key, i, heap_size = _heap_pop(heap_keys, heap_idxs, heap_size)
        if state[i] == 2 or key > dist[i] + 1e-12:
            continue
        state[i] = 2
        ix = i // (ny * nz)
        rem = i - ix * ny * nz
        iy = rem // nz
        iz = rem - iy * nz
        for axis in range(3):
            for sgn in (-1, 1):
                jx, jy, jz = ix, iy, iz
                if axis == 0:
                    jx += sgn
                    if jx < 0 or jx >= nx:
                        continue
                elif axis == 1:
                    jy += sgn
                    if jy < 0 or jy >= ny:
                        continue
                else:
                    jz += sgn
                    if jz < 0 or jz >= nz:
                        continue
                j = (jx * ny + jy) * nz + jz
                if state[j] == 2:
                    continue
                d = _upwind_solve(dist, state, nx, ny, nz, jx, jy, jz, h)
                if d < dist[j] - 1e-15:
                    dist[j] = d
                    state[j] = 1
                    heap_size = _heap_push(heap_keys, heap_idxs, heap_size,
                                           d, j)

    for i in range(n):
        if dist[i] > d_cap:
            dist[i] = d_cap
    return dist


@njit(cache=True)
def _render_depth(cam_pos, rot_wc, dirs_cam, boxes, z_max, out):
    """Per-pixel nearest ray/AABB intersection as z-depth.

    dirs_cam carries unit z-components, so the world-ray parameter equals
    the camera-frame z-depth. Pixels with no hit within z_max get +inf.
    """
    n_px = dirs_cam.shape[0]
    n_boxes = boxes.shape[0]
    for p in range(n_px):
        wx = rot_wc[0, 0] * dirs_cam[p, 0] + rot_wc[0, 1] * dirs_cam[p, 1] \
            + rot_wc[0, 2] * dirs_cam[p, 2]
        wy = rot_wc[1, 0] * dirs_cam[p, 0] + rot_wc[1, 1] * dirs_cam[p, 1] \
            + rot_wc[1, 2] * dirs_cam[p, 2]
        wz = rot_wc[2, 0] * dirs_cam[p, 0] + rot_wc[2, 1] * dirs_cam[p, 1] \
            + rot_wc[2, 2] * dirs_cam[p, 2]
        best = np.inf
        for b in range(n_boxes):
            t_enter = -np.inf
            t_exit = np.inf
            miss = False
            for k in range(3):
                o = cam_pos[k]
                d = (wx, wy, wz)[k]
                lo = boxes[b, k]
                hi = boxes[b, k + 3]
                if d == 0.0:
                    if o < lo or o > hi:
                        miss = True
                        break
                else:
                    ta = (lo - o) / d
                    tb = (hi - o) / d
                    if ta > tb:
                        ta, tb = tb, ta
                    if ta > t_enter:
                        t_enter = ta
                    if tb < t_exit:
                        t_exit = tb
            if miss or t_enter > t_exit or t_exit < 0.0:
                continue
            if t_enter > 1e-9 and t_enter < best:
                best = t_enter
        out[p] = best if best <= z_max else np.inf


def warmup():
    """Force-compile every kernel on tiny inputs (keeps first rounds fast)."""
    bbox_min = np.array([-1.0, -1.0, -1.0])
    hits = np.zeros(8, dtype=np.int64)
    frees = np.zeros(8, dtype=np.int64)
    _ray_counts(np.zeros((1, 3)), np.array([[0.9, 0.0, 0.0]]),
                np.ones(1, dtype=np.bool_), bbox_min, 1.0, 2, 2, 2,
                hits, frees)
    out_cells = np.zeros(8, dtype=np.int64)
    _traverse_cells(np.zeros(3), np.array([0.9, 0.0, 0.0]), bbox_min, 1.0,
                    2, 2, 2, out_cells)
    unsafe = np.zeros(8, dtype=np.bool_)
    unsafe[0] = True
    _fast_march(unsafe, 2, 2, 2, 1.0, 6.0)
    out = np.zeros(1)
    _render_depth(np.zeros(3), np.eye(3), np.array([[0.0, 0.0, 1.0]]),
                  np.array([[1.0, -1.0, -1.0, 2.0, 1.0, 1.0]]), 10.0, out)
