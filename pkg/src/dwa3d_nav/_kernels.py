"""Numba kernels for grid traversal, scan integration and beam evaluation.

All positions handed to these kernels are map-local (map origin subtracted),
so the grid spans [0, n*res) per axis. Cell state codes match voxel_map:
0 = unknown, 1 = free, 2 = occupied.
"""

import numpy as np
from numba import njit

HIT_MISS = -1
HIT_UNKNOWN = 0
HIT_OCCUPIED = 2


@njit(cache=True)
def ray_first_nonfree(state, ox, oy, oz, dx, dy, dz, max_len, res,
                      occupied_only, t_start):
    """First non-free voxel along a ray. Returns (hit_code, dist, ix, iy, iz).

    hit_code is the state of the hit voxel (0 unknown, 2 occupied) or -1 for
    a miss, in which case dist == max_len. dist is measured from the ray
    origin to the entry point of the hit voxel, computed directly from the
    hit voxel's boundary so the value does not depend on where the traversal
    started. Visits every voxel the segment intersects from t_start onward;
    t_start > 0 is only sound when [0, t_start] is known to be free. With
    occupied_only, unknown voxels do not stop the ray.
    """
    nx, ny, nz = state.shape
    hx = nx * res
    hy = ny * res
    hz = nz * res

    # Clip the ray to the grid box; traversal starts at max(0, entry t).
    t_lo = t_start
    t_hi = max_len
    o = (ox, oy, oz)
    d = (dx, dy, dz)
    h = (hx, hy, hz)
    for k in range(3):
        if d[k] != 0.0:
            t1 = (0.0 - o[k]) / d[k]
            t2 = (h[k] - o[k]) / d[k]
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > t_lo:
                t_lo = t1
            if t2 < t_hi:
                t_hi = t2
        elif o[k] < 0.0 or o[k] >= h[k]:
            return HIT_MISS, max_len, -1, -1, -1
    if t_lo > t_hi:
        return HIT_MISS, max_len, -1, -1, -1

    px = ox + t_lo * dx
    py = oy + t_lo * dy
    pz = oz + t_lo * dz
    ix = int(np.floor(px / res))
    iy = int(np.floor(py / res))
    iz = int(np.floor(pz / res))
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

    step_x = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
    step_y = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)
    step_z = 1 if dz > 0.0 else (-1 if dz < 0.0 else 0)

    inf = np.inf
    if dx != 0.0:
        bx = (ix + (1 if step_x > 0 else 0)) * res
        tmax_x = (bx - ox) / dx
        tdel_x = res / abs(dx)
    else:
        tmax_x = inf
        tdel_x = inf
    if dy != 0.0:
        by = (iy + (1 if step_y > 0 else 0)) * res
        tmax_y = (by - oy) / dy
        tdel_y = res / abs(dy)
    else:
        tmax_y = inf
        tdel_y = inf
    if dz != 0.0:
        bz = (iz + (1 if step_z > 0 else 0)) * res
        tmax_z = (bz - oz) / dz
        tdel_z = res / abs(dz)
    else:
        tmax_z = inf
        tdel_z = inf

    t = t_lo
    while t <= max_len:
        s = state[ix, iy, iz]
        if s != 1 and (s == 2 or not occupied_only):
            # entry distance straight from the hit voxel's rear boundary,
            # so the value is independent of where the traversal started
            te = t_lo
            if dx != 0.0:
                tk = ((ix + (0 if step_x > 0 else 1)) * res - ox) / dx
                if tk > te:
                    te = tk
            if dy != 0.0:
                tk = ((iy + (0 if step_y > 0 else 1)) * res - oy) / dy
                if tk > te:
                    te = tk
            if dz != 0.0:
                tk = ((iz + (0 if step_z > 0 else 1)) * res - oz) / dz
                if tk > te:
                    te = tk
            if te > max_len:
                te = max_len
            return s, te, ix, iy, iz
        if tmax_x <= tmax_y and tmax_x <= tmax_z:
            t = tmax_x
            tmax_x += tdel_x
            ix += step_x
            if ix < 0 or ix >= nx:
                break
        elif tmax_y <= tmax_z:
            t = tmax_y
            tmax_y += tdel_y
            iy += step_y
            if iy < 0 or iy >= ny:
                break
        else:
            t = tmax_z
            tmax_z += tdel_z
            iz += step_z
            if iz < 0 or iz >= nz:
                break
    return HIT_MISS, max_len, -1, -1, -1


@njit(cache=True)
def integrate_rays(state, logodds, ox, oy, oz, pts, res,
                   hit_lo, miss_lo, lo_min, lo_max, occ_thr, free_thr):
    """Log-odds update for one scan: pts are hit positions, map-local.

    Every voxel the origin->hit segment crosses (excluding the hit voxel)
    gets the miss decrement; the hit voxel gets the hit increment. Points
    outside the grid are skipped; returns the skip count.
    """
    nx, ny, nz = state.shape
    skipped = 0
    for n in range(pts.shape[0]):
        px = pts[n, 0]
        py = pts[n, 1]
        pz = pts[n, 2]
        hx = int(np.floor(px / res))
        hy = int(np.floor(py / res))
        hz = int(np.floor(pz / res))
        if hx < 0 or hx >= nx or hy < 0 or hy >= ny or hz < 0 or hz >= nz:
            skipped += 1
            continue

        ix = int(np.floor(ox / res))
        iy = int(np.floor(oy / res))
        iz = int(np.floor(oz / res))
        dx = px - ox
        dy = py - oy
        dz = pz - oz
        step_x = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
        step_y = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)
        step_z = 1 if dz > 0.0 else (-1 if dz < 0.0 else 0)
        inf = np.inf
        if dx != 0.0:
            tmax_x = ((ix + (1 if step_x > 0 else 0)) * res - ox) / dx
            tdel_x = res / abs(dx)
        else:
            tmax_x = inf
            tdel_x = inf
        if dy != 0.0:
            tmax_y = ((iy + (1 if step_y > 0 else 0)) * res - oy) / dy
            tdel_y = res / abs(dy)
        else:
            tmax_y = inf
            tdel_y = inf
        if dz != 0.0:
            tmax_z = ((iz + (1 if step_z > 0 else 0)) * res - oz) / dz
            tdel_z = res / abs(dz)
        else:
            tmax_z = inf
            tdel_z = inf

        guard = 0
        max_steps = nx + ny + nz + 3
        while (ix != hx or iy != hy or iz != hz) and guard < max_steps:
            lo = logodds[ix, iy, iz] + miss_lo
            if lo < lo_min:
                lo = lo_min
            if lo > lo_max:
                lo = lo_max
            logodds[ix, iy, iz] = lo
            state[ix, iy, iz] = 2 if lo >= occ_thr else (1 if lo <= free_thr else 0)
            if tmax_x <= tmax_y and tmax_x <= tmax_z:
                tmax_x += tdel_x
                ix += step_x
            elif tmax_y <= tmax_z:
                tmax_y += tdel_y
                iy += step_y
            else:
                tmax_z += tdel_z
                iz += step_z
            if ix < 0 or ix >= nx or iy < 0 or iy >= ny or iz < 0 or iz >= nz:
                guard = max_steps  # numerical corner: left the grid, stop
                ix, iy, iz = hx, hy, hz
            guard += 1

        lo = logodds[hx, hy, hz] + hit_lo
        if lo < lo_min:
            lo = lo_min
        if lo > lo_max:
            lo = lo_max
        logodds[hx, hy, hz] = lo
        state[hx, hy, hz] = 2 if lo >= occ_thr else (1 if lo <= free_thr else 0)
    return skipped


@njit(cache=True)
def beam_min_distance(state, res, x, y, z, psi, theta_beam,
                      psis, thetas, lam_psi, lam_theta,
                      psi_max, theta_max, r_search):
    """Minimum obstacle distance over the angular ray fan of one candidate.

    Ray directions come from the angle-addition products
      cos(a+b) = cos a cos b - sin a sin b,
      sin(a+b) = sin a cos b + cos a sin b
    applied to (psi_i + psi) and (theta_j + theta_beam); any re-evaluation of
    the fan must use the same products to reproduce distances bit-for-bit.
    Rays that hit nothing within their direction-dependent length contribute
    nothing; dist_min keeps its r_search initialisation when all rays miss.
    """
    dist_min = r_search
    c0 = np.cos(psi)
    s0 = np.sin(psi)
    ctb = np.cos(theta_beam)
    stb = np.sin(theta_beam)
    for i in range(psis.shape[0]):
        psi_i = psis[i]
        rho_psi = 1.0 - lam_psi * abs(psi_i) / psi_max
        ci = np.cos(psi_i)
        si = np.sin(psi_i)
        cy = ci * c0 - si * s0
        sy = si * c0 + ci * s0
        for j in range(thetas.shape[0]):
            theta_j = thetas[j]
            rho_theta = 1.0 - lam_theta * abs(theta_j) / theta_max
            length = r_search * rho_psi * rho_theta
            if length <= 0.0:
                continue
            cj = np.cos(theta_j)
            sj = np.sin(theta_j)
            cp = cj * ctb - sj * stb
            sp = sj * ctb + cj * stb
            code, dist, _, _, _ = ray_first_nonfree(
                state, x, y, z, cy * cp, sy * cp, sp, length, res, False, 0.0)
            if code != HIT_MISS and dist < dist_min:
                dist_min = dist
    return dist_min


@njit(cache=True)
def beam_min_distance_batch(state, res, poses, theta_beams, active,
                            psis, thetas, lam_psi, lam_theta,
                            psi_max, theta_max, r_search,
                            edt, block_lo, cutoff, out):
    """beam_min_distance over a candidate batch; rows with active=0 skipped.

    edt is the free-space distance field (meters, voxel-center to nearest
    non-free voxel center) of the window that encloses every possible ray,
    with block_lo its index offset in the grid. Each ray is first marched
    through the field with a conservative step; only rays the march cannot
    certify as misses run the exact grid traversal, so the minima are
    identical to beam_min_distance down to cutoff (below which the
    normalized score is zero either way).
    """
    margin = np.sqrt(3.0) * res + 1e-9   # voxel diagonal: sample-to-point
                                         # offset plus hit half-diagonal
    min_step = 0.5 * res
    inv_res = 1.0 / res
    bx, by, bz = edt.shape
    ni = psis.shape[0]
    nj = thetas.shape[0]
    cps = np.cos(psis)
    sps = np.sin(psis)
    cts = np.cos(thetas)
    sts = np.sin(thetas)
    # candidate-independent ray lengths L_ij
    lengths = np.empty((ni, nj))
    for i in range(ni):
        rho_psi = 1.0 - lam_psi * abs(psis[i]) / psi_max
        for j in range(nj):
            rho_theta = 1.0 - lam_theta * abs(thetas[j]) / theta_max
            lengths[i, j] = r_search * rho_psi * rho_theta
    cp_j = np.empty(nj)
    sp_j = np.empty(nj)
    for n in range(poses.shape[0]):
        if not active[n]:
            continue
        x = poses[n, 0]
        y = poses[n, 1]
        z = poses[n, 2]
        psi = poses[n, 3]
        theta_beam = theta_beams[n]
        c0 = np.cos(psi)
        s0 = np.sin(psi)
        ctb = np.cos(theta_beam)
        stb = np.sin(theta_beam)
        for j in range(nj):
            cp_j[j] = cts[j] * ctb - sts[j] * stb
            sp_j[j] = sts[j] * ctb + cts[j] * stb

        # the first sphere-trace step is shared by every ray of the fan
        ix0 = int(np.floor(x * inv_res)) - block_lo[0]
        iy0 = int(np.floor(y * inv_res)) - block_lo[1]
        iz0 = int(np.floor(z * inv_res)) - block_lo[2]
        if (0 <= ix0 < bx) and (0 <= iy0 < by) and (0 <= iz0 < bz):
            step0 = edt[ix0, iy0, iz0] - margin
        else:
            step0 = 0.0
        if step0 < min_step:
            step0 = 0.0
        if step0 >= r_search:
            out[n] = r_search      # every ray certified by the shared step
            continue

        dist_min = r_search
        for i in range(ni):
            if dist_min <= cutoff:
                break
            cy = cps[i] * c0 - sps[i] * s0
            sy = sps[i] * c0 + cps[i] * s0
            for j in range(nj):
                length = lengths[i, j]
                if length <= 0.0:
                    continue
                # rays certified free past min(length, dist_min) cannot
                # change the minimum; skipping them is value-exact
                bound = length if length < dist_min else dist_min
                if step0 >= bound:
                    continue
                dx = cy * cp_j[j]
                dy = sy * cp_j[j]
                dz = sp_j[j]

                # conservative sphere-trace: certify or fall through to the
                # exact traversal, restarted past the certified-free prefix
                t = step0
                certified = False
                while t > 0.0:
                    ix = int(np.floor((x + t * dx) * inv_res)) - block_lo[0]
                    iy = int(np.floor((y + t * dy) * inv_res)) - block_lo[1]
                    iz = int(np.floor((z + t * dz) * inv_res)) - block_lo[2]
                    if (ix < 0 or ix >= bx or iy < 0 or iy >= by
                            or iz < 0 or iz >= bz):
                        break       # left the window: run the exact traversal
                    step = edt[ix, iy, iz] - margin
                    if step < min_step:
                        break
                    t += step
                    if t >= bound:
                        certified = True
                        break
                if certified:
                    continue
                code, dist, _, _, _ = ray_first_nonfree(
                    state, x, y, z, dx, dy, dz, length, res, False, t)
                if code != HIT_MISS and dist < dist_min:
                    dist_min = dist
                    if dist_min <= cutoff:
                        break
        out[n] = dist_min
