"""Fused per-triangle force kernel.

Single-pass translation of the waterline split + hydro/aero force math in
:mod:`aeolus.dynamics`, compiled with numba for the many-vessel hot path.
The numpy implementation stays the reference; an equivalence test keeps the
two in lockstep.  Accumulation runs in fixed triangle order per vessel, so
results are bit-reproducible run to run.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True, fastmath=False)
def _sample_height(grid, cell, n_grid, x, z):
    gx = x / cell
    gz = z / cell
    i0 = int(np.floor(gx))
    j0 = int(np.floor(gz))
    fx = gx - i0
    fz = gz - j0
    i0 %= n_grid
    j0 %= n_grid
    i1 = (i0 + 1) % n_grid
    j1 = (j0 + 1) % n_grid
    top = grid[i0, j0] * (1.0 - fx) + grid[i1, j0] * fx
    bot = grid[i0, j1] * (1.0 - fx) + grid[i1, j1] * fx
    return top * (1.0 - fz) + bot * fz


@njit(cache=True, fastmath=False)
def _tri_area(ax, ay, az, bx, by, bz, cx, cy, cz):
    ux = bx - ax
    uy = by - ay
    uz = bz - az
    wx = cx - ax
    wy = cy - ay
    wz = cz - az
    crx = uy * wz - uz * wy
    cry = uz * wx - ux * wz
    crz = ux * wy - uy * wx
    return 0.5 * np.sqrt(crx * crx + cry * cry + crz * crz)


@njit(cache=True, fastmath=False)
def hull_forces_kernel(
    verts_local,
    tri,
    areas_local,
    normals_local,
    centroids_local,
    rotations,
    positions,
    velocities,
    omegas,
    cd_per_vessel,
    cf_per_vessel,
    ocean_height,
    ocean_cell,
    rho,
    gravity,
    q_exp,
    rho_air,
    u10,
    wind,
    current,
    out_force,
    out_torque,
):
    n_vessels = rotations.shape[0]
    n_verts = verts_local.shape[0]
    n_tris = tri.shape[0]
    n_grid = ocean_height.shape[0]
    has_ocean = ocean_cell > 0.0
    has_wind = u10 > 0.0

    wvx = np.empty(n_verts)
    wvy = np.empty(n_verts)
    wvz = np.empty(n_verts)
    elev = np.empty(n_verts)
    pa = np.empty(3)
    pb = np.empty(3)
    pc = np.empty(3)
    i_ab = np.empty(3)
    i_ca = np.empty(3)
    p_area = np.empty(3)
    p_cx = np.empty(3)
    p_cy = np.empty(3)
    p_cz = np.empty(3)
    p_depth = np.empty(3)
    p_wet = np.empty(3, dtype=np.bool_)

    for vi in range(n_vessels):
        r00 = rotations[vi, 0, 0]
        r01 = rotations[vi, 0, 1]
        r02 = rotations[vi, 0, 2]
        r10 = rotations[vi, 1, 0]
        r11 = rotations[vi, 1, 1]
        r12 = rotations[vi, 1, 2]
        r20 = rotations[vi, 2, 0]
        r21 = rotations[vi, 2, 1]
        r22 = rotations[vi, 2, 2]
        px = positions[vi, 0]
        py = positions[vi, 1]
        pz = positions[vi, 2]
        vx = velocities[vi, 0]
        vy = velocities[vi, 1]
        vz = velocities[vi, 2]
        ox = omegas[vi, 0]
        oy = omegas[vi, 1]
        oz = omegas[vi, 2]
        cd = cd_per_vessel[vi]
        cf = cf_per_vessel[vi]

        fx_sum = 0.0
        fy_sum = 0.0
        fz_sum = 0.0
        tx_sum = 0.0
        ty_sum = 0.0
        tz_sum = 0.0

        for k in range(n_verts):
            lx = verts_local[k, 0]
            ly = verts_local[k, 1]
            lz = verts_local[k, 2]
            wx = r00 * lx + r01 * ly + r02 * lz + px
            wy = r10 * lx + r11 * ly + r12 * lz + py
            wz = r20 * lx + r21 * ly + r22 * lz + pz
            wvx[k] = wx
            wvy[k] = wy
            wvz[k] = wz
            if has_ocean:
                elev[k] = wy - _sample_height(ocean_height, ocean_cell, n_grid, wx, wz)
            else:
                elev[k] = wy

        for t in range(n_tris):
            ia = tri[t, 0]
            ib = tri[t, 1]
            ic = tri[t, 2]
            ea = elev[ia]
            eb = elev[ib]
            ec = elev[ic]

            below_a = ea <= 0.0
            below_b = eb <= 0.0
            below_c = ec <= 0.0
            n_below = int(below_a) + int(below_b) + int(below_c)
            if n_below == 0 and not has_wind:
                continue

            nlx = normals_local[t, 0]
            nly = normals_local[t, 1]
            nlz = normals_local[t, 2]
            nx = r00 * nlx + r01 * nly + r02 * nlz
            ny = r10 * nlx + r11 * nly + r12 * nlz
            nz = r20 * nlx + r21 * nly + r22 * nlz

            n_pieces = 0
            if n_below == 3 or n_below == 0:
                clx = centroids_local[t, 0]
                cly = centroids_local[t, 1]
                clz = centroids_local[t, 2]
                p_area[0] = areas_local[t]
                p_cx[0] = r00 * clx + r01 * cly + r02 * clz + px
                p_cy[0] = r10 * clx + r11 * cly + r12 * clz + py
                p_cz[0] = r20 * clx + r21 * cly + r22 * clz + pz
                p_depth[0] = (ea + eb + ec) / 3.0
                p_wet[0] = n_below == 3
                n_pieces = 1
            else:
                # canonical order: odd vertex first, cyclic winding kept
                if below_a == below_b:
                    oa, ob, oc = ic, ia, ib
                    ha, hb, hc = ec, ea, eb
                    apex_wet = below_c
                elif below_a == below_c:
                    oa, ob, oc = ib, ic, ia
                    ha, hb, hc = eb, ec, ea
                    apex_wet = below_b
                else:
                    oa, ob, oc = ia, ib, ic
                    ha, hb, hc = ea, eb, ec
                    apex_wet = below_a

                pa[0] = wvx[oa]
                pa[1] = wvy[oa]
                pa[2] = wvz[oa]
                pb[0] = wvx[ob]
                pb[1] = wvy[ob]
                pb[2] = wvz[ob]
                pc[0] = wvx[oc]
                pc[1] = wvy[oc]
                pc[2] = wvz[oc]

                denom_ab = ha - hb if ha != hb else 1.0
                denom_ca = hc - ha if hc != ha else 1.0
                t_ab = ha / denom_ab
                t_ca = hc / denom_ca
                for d in range(3):
                    i_ab[d] = pa[d] + t_ab * (pb[d] - pa[d])
                    i_ca[d] = pc[d] + t_ca * (pa[d] - pc[d])

                # apex piece (A, iAB, iCA)
                p_area[0] = _tri_area(
                    pa[0], pa[1], pa[2], i_ab[0], i_ab[1], i_ab[2], i_ca[0], i_ca[1], i_ca[2]
                )
                p_cx[0] = (pa[0] + i_ab[0] + i_ca[0]) / 3.0
                p_cy[0] = (pa[1] + i_ab[1] + i_ca[1]) / 3.0
                p_cz[0] = (pa[2] + i_ab[2] + i_ca[2]) / 3.0
                p_depth[0] = ha / 3.0
                p_wet[0] = apex_wet
                # quad piece 1 (iAB, B, C)
                p_area[1] = _tri_area(
                    i_ab[0], i_ab[1], i_ab[2], pb[0], pb[1], pb[2], pc[0], pc[1], pc[2]
                )
                p_cx[1] = (i_ab[0] + pb[0] + pc[0]) / 3.0
                p_cy[1] = (i_ab[1] + pb[1] + pc[1]) / 3.0
                p_cz[1] = (i_ab[2] + pb[2] + pc[2]) / 3.0
                p_depth[1] = (hb + hc) / 3.0
                p_wet[1] = not apex_wet
                # quad piece 2 (iAB, C, iCA)
                p_area[2] = _tri_area(
                    i_ab[0], i_ab[1], i_ab[2], pc[0], pc[1], pc[2], i_ca[0], i_ca[1], i_ca[2]
                )
                p_cx[2] = (i_ab[0] + pc[0] + i_ca[0]) / 3.0
                p_cy[2] = (i_ab[1] + pc[1] + i_ca[1]) / 3.0
                p_cz[2] = (i_ab[2] + pc[2] + i_ca[2]) / 3.0
                p_depth[2] = hc / 3.0
                p_wet[2] = not apex_wet
                n_pieces = 3

            for p in range(n_pieces):
                area = p_area[p]
                cx = p_cx[p]
                cy = p_cy[p]
                cz = p_cz[p]
                ax_ = cx - px
                ay_ = cy - py
                az_ = cz - pz
                if p_wet[p]:
                    # triangle velocity: U + Omega x arm
                    tvx = vx + oy * az_ - oz * ay_
                    tvy = vy + oz * ax_ - ox * az_
                    tvz = vz + ox * ay_ - oy * ax_
                    vmag = np.sqrt(tvx * tvx + tvy * tvy + tvz * tvz)
                    if vmag > 1e-9:
                        inv = 1.0 / vmag
                        hx = tvx * inv
                        hy = tvy * inv
                        hz = tvz * inv
                    else:
                        hx = 0.0
                        hy = 0.0
                        hz = 0.0
                    ndv = nx * hx + ny * hy + nz * hz

                    fb = rho * area * p_depth[p] * gravity * ny
                    if q_exp == 1.0:
                        speed_pow = vmag
                    else:
                        speed_pow = vmag**q_exp
                    dcoef = -rho * area * ndv * speed_pow * cd
                    sf = (1.0 - ndv) * ndv * cf
                    fccoef = rho * area * sf

                    ffx = dcoef * nx + fccoef * (current[0] - tvx)
                    ffy = fb + dcoef * ny + fccoef * (current[1] - tvy)
                    ffz = dcoef * nz + fccoef * (current[2] - tvz)
                elif has_wind:
                    ndw = nx * wind[0] + ny * wind[1] + nz * wind[2]
                    acoef = -0.5 * rho_air * area * u10 * u10 * ndw
                    ffx = acoef * wind[0]
                    ffy = acoef * wind[1]
                    ffz = acoef * wind[2]
                else:
                    continue

                fx_sum += ffx
                fy_sum += ffy
                fz_sum += ffz
                tx_sum += ay_ * ffz - az_ * ffy
                ty_sum += az_ * ffx - ax_ * ffz
                tz_sum += ax_ * ffy - ay_ * ffx

        out_force[vi, 0] += fx_sum
        out_force[vi, 1] += fy_sum
        out_force[vi, 2] += fz_sum
        out_torque[vi, 0] += tx_sum
        out_torque[vi, 1] += ty_sum
        out_torque[vi, 2] += tz_sum
