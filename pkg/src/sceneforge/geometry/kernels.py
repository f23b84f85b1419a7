"""Hot numeric kernels: ray/triangle casting and triangle-pair crossing tests.

Two implementations live side by side: numba-jitted kernels (the default)
and pure-numpy fallbacks. The active backend is chosen once at import time;
set ``SCENEFORGE_NUMBA=0`` to force the numpy path (useful on platforms
without a working numba, and for the benchmark in benchmarks/bench_kernels.py
which exercises both).

Semantics shared by both paths:

* nearest-hit queries iterate triangles in ascending index order and update
  only on strictly smaller distance, so ties (rays through shared edges)
  resolve to the lowest triangle index in either backend;
* barycentric bounds are inclusive within EDGE_EPS so a ray through a shared
  edge hits at least one of the adjacent triangles exactly once;
* triangle-pair crossing snaps plane distances within ``tol`` to zero, which
  makes resting/touching contact (penetration <= tol) a non-crossing.
"""

from __future__ import annotations

import math
import os

import numpy as np

EDGE_EPS = 1e-10
T_MIN = 1e-9
PARALLEL_EPS = 1e-12
CROSS_GAP = 1e-12


def _env_wants_numba() -> bool:
    return os.environ.get("SCENEFORGE_NUMBA", "1").strip().lower() not in (
        "0",
        "false",
        "no",
        "off",
    )


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def rays_nearest_numpy(origins, dirs, v0, v1, v2):
    """Nearest Moller-Trumbore hit per ray; loops triangles, vectorizes rays.

    Returns (t, tri, u, v): t is +inf and tri is -1 where nothing was hit.
    """
    n = origins.shape[0]
    best_t = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.int64)
    best_u = np.zeros(n)
    best_v = np.zeros(n)
    for j in range(v0.shape[0]):
        e1 = v1[j] - v0[j]
        e2 = v2[j] - v0[j]
        pvec = np.cross(dirs, e2)
        det = pvec @ e1
        ok = np.abs(det) > PARALLEL_EPS
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        tvec = origins - v0[j]
        u = np.einsum("ij,ij->i", tvec, pvec) * inv
        qvec = np.cross(tvec, e1)
        v = np.einsum("ij,ij->i", dirs, qvec) * inv
        t = (qvec @ e2) * inv
        hit = (
            ok
            & (u >= -EDGE_EPS)
            & (v >= -EDGE_EPS)
            & (u + v <= 1.0 + EDGE_EPS)
            & (t > T_MIN)
            & (t < best_t)
        )
        best_t[hit] = t[hit]
        best_tri[hit] = j
        best_u[hit] = u[hit]
        best_v[hit] = v[hit]
    return best_t, best_tri, best_u, best_v


def _single_ray_nearest_numpy(origin, direction, v0, v1, v2):
    # Single-ray fast path: vectorize over triangles instead of rays.
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > PARALLEL_EPS
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = origin - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.einsum("ij,ij->i", qvec, np.broadcast_to(direction, qvec.shape)) * inv
    t = np.einsum("ij,ij->i", qvec, e2) * inv
    hit = ok & (u >= -EDGE_EPS) & (v >= -EDGE_EPS) & (u + v <= 1.0 + EDGE_EPS) & (t > T_MIN)
    if not hit.any():
        return np.array([np.inf]), np.array([-1], dtype=np.int64), np.zeros(1), np.zeros(1)
    tt = np.where(hit, t, np.inf)
    j = int(np.argmin(tt))
    return (
        np.array([tt[j]]),
        np.array([j], dtype=np.int64),
        np.array([u[j]]),
        np.array([v[j]]),
    )


def count_hits_numpy(origin, direction, v0, v1, v2):
    """Count strict-interior crossings; flags any boundary grazes.

    Returns (count, grazed). Used for point-in-mesh parity tests; a graze
    means the caller should retry with a different direction.
    """
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > PARALLEL_EPS
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = origin - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.einsum("ij,ij->i", qvec, np.broadcast_to(direction, qvec.shape)) * inv
    t = np.einsum("ij,ij->i", qvec, e2) * inv
    inside = ok & (u > EDGE_EPS) & (v > EDGE_EPS) & (u + v < 1.0 - EDGE_EPS) & (t > T_MIN)
    near = (
        ok
        & (u >= -EDGE_EPS)
        & (v >= -EDGE_EPS)
        & (u + v <= 1.0 + EDGE_EPS)
        & (t > T_MIN)
        & ~inside
    )
    return int(inside.sum()), bool(near.any())


def _tri_pair_cross_py(p0, p1, p2, q0, q1, q2, tol):
    """Proper-crossing test for one triangle pair, plane distances snapped by tol."""

    def cross(a, b):
        return (
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )

    def sub(a, b):
        return (a[0] - b[0], a[1] - b[1], a[2] - b[2])

    def dot(a, b):
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]

    n2 = cross(sub(q1, q0), sub(q2, q0))
    n2l = math.sqrt(dot(n2, n2))
    if n2l < 1e-18:
        return False
    n2 = (n2[0] / n2l, n2[1] / n2l, n2[2] / n2l)
    dp = []
    for p in (p0, p1, p2):
        d = dot(n2, sub(p, q0))
        dp.append(0.0 if abs(d) <= tol else d)
    if not (max(dp) > 0.0 and min(dp) < 0.0):
        return False

    n1 = cross(sub(p1, p0), sub(p2, p0))
    n1l = math.sqrt(dot(n1, n1))
    if n1l < 1e-18:
        return False
    n1 = (n1[0] / n1l, n1[1] / n1l, n1[2] / n1l)
    dq = []
    for q in (q0, q1, q2):
        d = dot(n1, sub(q, p0))
        dq.append(0.0 if abs(d) <= tol else d)
    if not (max(dq) > 0.0 and min(dq) < 0.0):
        return False

    axis = cross(n1, n2)
    al = math.sqrt(dot(axis, axis))
    if al < 1e-12:
        return False
    axis = (axis[0] / al, axis[1] / al, axis[2] / al)

    def interval(pts, ds):
        lo = math.inf
        hi = -math.inf
        proj = [dot(axis, p) for p in pts]
        for i in range(3):
            if ds[i] == 0.0:
                lo = min(lo, proj[i])
                hi = max(hi, proj[i])
        for i in range(3):
            for j in range(i + 1, 3):
                if ds[i] * ds[j] < 0.0:
                    s = proj[i] + (proj[j] - proj[i]) * ds[i] / (ds[i] - ds[j])
                    lo = min(lo, s)
                    hi = max(hi, s)
        return lo, hi

    lo1, hi1 = interval((p0, p1, p2), dp)
    lo2, hi2 = interval((q0, q1, q2), dq)
    return min(hi1, hi2) - max(lo1, lo2) > CROSS_GAP


def mesh_pair_crosses_numpy(a0, a1, a2, b0, b1, b2, tol):
    """True if any triangle of mesh A properly crosses a triangle of mesh B."""
    alo = np.minimum(np.minimum(a0, a1), a2)
    ahi = np.maximum(np.maximum(a0, a1), a2)
    blo = np.minimum(np.minimum(b0, b1), b2)
    bhi = np.maximum(np.maximum(b0, b1), b2)
    # triangle AABBs must overlap for a crossing deeper than tol to exist
    overlap = np.all(
        (alo[:, None, :] <= bhi[None, :, :] + 1e-12)
        & (blo[None, :, :] <= ahi[:, None, :] + 1e-12),
        axis=2,
    )
    for ia, ib in np.argwhere(overlap):
        if _tri_pair_cross_py(
            tuple(a0[ia]), tuple(a1[ia]), tuple(a2[ia]),
            tuple(b0[ib]), tuple(b1[ib]), tuple(b2[ib]), tol,
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

try:  # pragma: no cover - exercised through the dispatchers
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _rays_nearest_nb(origins, dirs, v0, v1, v2, out_t, out_tri, out_u, out_v):
        m = v0.shape[0]
        for i in prange(origins.shape[0]):
            ox, oy, oz = origins[i, 0], origins[i, 1], origins[i, 2]
            dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
            bt = np.inf
            btri = -1
            bu = 0.0
            bv = 0.0
            for j in range(m):
                e1x = v1[j, 0] - v0[j, 0]
                e1y = v1[j, 1] - v0[j, 1]
                e1z = v1[j, 2] - v0[j, 2]
                e2x = v2[j, 0] - v0[j, 0]
                e2y = v2[j, 1] - v0[j, 1]
                e2z = v2[j, 2] - v0[j, 2]
                px = dy * e2z - dz * e2y
                py = dz * e2x - dx * e2z
                pz = dx * e2y - dy * e2x
                det = e1x * px + e1y * py + e1z * pz
                if abs(det) <= PARALLEL_EPS:
                    continue
                inv = 1.0 / det
                tx = ox - v0[j, 0]
                ty = oy - v0[j, 1]
                tz = oz - v0[j, 2]
                u = (tx * px + ty * py + tz * pz) * inv
                if u < -EDGE_EPS:
                    continue
                qx = ty * e1z - tz * e1y
                qy = tz * e1x - tx * e1z
                qz = tx * e1y - ty * e1x
                v = (dx * qx + dy * qy + dz * qz) * inv
                if v < -EDGE_EPS or u + v > 1.0 + EDGE_EPS:
                    continue
                t = (e2x * qx + e2y * qy + e2z * qz) * inv
                if t > T_MIN and t < bt:
                    bt = t
                    btri = j
                    bu = u
                    bv = v
            out_t[i] = bt
            out_tri[i] = btri
            out_u[i] = bu
            out_v[i] = bv

    @njit(cache=True)
    def _count_hits_nb(origin, direction, v0, v1, v2):
        count = 0
        grazed = False
        ox, oy, oz = origin[0], origin[1], origin[2]
        dx, dy, dz = direction[0], direction[1], direction[2]
        for j in range(v0.shape[0]):
            e1x = v1[j, 0] - v0[j, 0]
            e1y = v1[j, 1] - v0[j, 1]
            e1z = v1[j, 2] - v0[j, 2]
            e2x = v2[j, 0] - v0[j, 0]
            e2y = v2[j, 1] - v0[j, 1]
            e2z = v2[j, 2] - v0[j, 2]
            px = dy * e2z - dz * e2y
            py = dz * e2x - dx * e2z
            pz = dx * e2y - dy * e2x
            det = e1x * px + e1y * py + e1z * pz
            if abs(det) <= PARALLEL_EPS:
                continue
            inv = 1.0 / det
            tx = ox - v0[j, 0]
            ty = oy - v0[j, 1]
            tz = oz - v0[j, 2]
            u = (tx * px + ty * py + tz * pz) * inv
            qx = ty * e1z - tz * e1y
            qy = tz * e1x - tx * e1z
            qz = tx * e1y - ty * e1x
            v = (dx * qx + dy * qy + dz * qz) * inv
            t = (e2x * qx + e2y * qy + e2z * qz) * inv
            if t <= T_MIN:
                continue
            if u > EDGE_EPS and v > EDGE_EPS and u + v < 1.0 - EDGE_EPS:
                count += 1
            elif u >= -EDGE_EPS and v >= -EDGE_EPS and u + v <= 1.0 + EDGE_EPS:
                grazed = True
        return count, grazed

    @njit(cache=True)
    def _tri_pair_cross_nb(
        p0x, p0y, p0z, p1x, p1y, p1z, p2x, p2y, p2z,
        q0x, q0y, q0z, q1x, q1y, q1z, q2x, q2y, q2z, tol,
    ):
        # plane of Q
        ax = q1x - q0x
        ay = q1y - q0y
        az = q1z - q0z
        bx = q2x - q0x
        by = q2y - q0y
        bz = q2z - q0z
        n2x = ay * bz - az * by
        n2y = az * bx - ax * bz
        n2z = ax * by - ay * bx
        n2l = math.sqrt(n2x * n2x + n2y * n2y + n2z * n2z)
        if n2l < 1e-18:
            return False
        n2x /= n2l
        n2y /= n2l
        n2z /= n2l
        dp0 = n2x * (p0x - q0x) + n2y * (p0y - q0y) + n2z * (p0z - q0z)
        dp1 = n2x * (p1x - q0x) + n2y * (p1y - q0y) + n2z * (p1z - q0z)
        dp2 = n2x * (p2x - q0x) + n2y * (p2y - q0y) + n2z * (p2z - q0z)
        if abs(dp0) <= tol:
            dp0 = 0.0
        if abs(dp1) <= tol:
            dp1 = 0.0
        if abs(dp2) <= tol:
            dp2 = 0.0
        if not (max(dp0, dp1, dp2) > 0.0 and min(dp0, dp1, dp2) < 0.0):
            return False
        # plane of P
        ax = p1x - p0x
        ay = p1y - p0y
        az = p1z - p0z
        bx = p2x - p0x
        by = p2y - p0y
        bz = p2z - p0z
        n1x = ay * bz - az * by
        n1y = az * bx - ax * bz
        n1z = ax * by - ay * bx
        n1l = math.sqrt(n1x * n1x + n1y * n1y + n1z * n1z)
        if n1l < 1e-18:
            return False
        n1x /= n1l
        n1y /= n1l
        n1z /= n1l
        dq0 = n1x * (q0x - p0x) + n1y * (q0y - p0y) + n1z * (q0z - p0z)
        dq1 = n1x * (q1x - p0x) + n1y * (q1y - p0y) + n1z * (q1z - p0z)
        dq2 = n1x * (q2x - p0x) + n1y * (q2y - p0y) + n1z * (q2z - p0z)
        if abs(dq0) <= tol:
            dq0 = 0.0
        if abs(dq1) <= tol:
            dq1 = 0.0
        if abs(dq2) <= tol:
            dq2 = 0.0
        if not (max(dq0, dq1, dq2) > 0.0 and min(dq0, dq1, dq2) < 0.0):
            return False
        lx = n1y * n2z - n1z * n2y
        ly = n1z * n2x - n1x * n2z
        lz = n1x * n2y - n1y * n2x
        ll = math.sqrt(lx * lx + ly * ly + lz * lz)
        if ll < 1e-12:
            return False
        lx /= ll
        ly /= ll
        lz /= ll

        lo1 = np.inf
        hi1 = -np.inf
        pxs = (p0x, p1x, p2x)
        pys = (p0y, p1y, p2y)
        pzs = (p0z, p1z, p2z)
        dps = (dp0, dp1, dp2)
        for i in range(3):
            s = lx * pxs[i] + ly * pys[i] + lz * pzs[i]
            if dps[i] == 0.0:
                lo1 = min(lo1, s)
                hi1 = max(hi1, s)
            for j in range(i + 1, 3):
                if dps[i] * dps[j] < 0.0:
                    sj = lx * pxs[j] + ly * pys[j] + lz * pzs[j]
                    c = s + (sj - s) * dps[i] / (dps[i] - dps[j])
                    lo1 = min(lo1, c)
                    hi1 = max(hi1, c)
        lo2 = np.inf
        hi2 = -np.inf
        qxs = (q0x, q1x, q2x)
        qys = (q0y, q1y, q2y)
        qzs = (q0z, q1z, q2z)
        dqs = (dq0, dq1, dq2)
        for i in range(3):
            s = lx * qxs[i] + ly * qys[i] + lz * qzs[i]
            if dqs[i] == 0.0:
                lo2 = min(lo2, s)
                hi2 = max(hi2, s)
            for j in range(i + 1, 3):
                if dqs[i] * dqs[j] < 0.0:
                    sj = lx * qxs[j] + ly * qys[j] + lz * qzs[j]
                    c = s + (sj - s) * dqs[i] / (dqs[i] - dqs[j])
                    lo2 = min(lo2, c)
                    hi2 = max(hi2, c)
        return min(hi1, hi2) - max(lo1, lo2) > CROSS_GAP

    @njit(cache=True)
    def _mesh_pair_crosses_nb(a0, a1, a2, b0, b1, b2, tol):
        nb_ = b0.shape[0]
        blox = np.empty(nb_)
        bloy = np.empty(nb_)
        bloz = np.empty(nb_)
        bhix = np.empty(nb_)
        bhiy = np.empty(nb_)
        bhiz = np.empty(nb_)
        for j in range(nb_):
            blox[j] = min(b0[j, 0], min(b1[j, 0], b2[j, 0]))
            bloy[j] = min(b0[j, 1], min(b1[j, 1], b2[j, 1]))
            bloz[j] = min(b0[j, 2], min(b1[j, 2], b2[j, 2]))
            bhix[j] = max(b0[j, 0], max(b1[j, 0], b2[j, 0]))
            bhiy[j] = max(b0[j, 1], max(b1[j, 1], b2[j, 1]))
            bhiz[j] = max(b0[j, 2], max(b1[j, 2], b2[j, 2]))
        for i in range(a0.shape[0]):
            alox = min(a0[i, 0], min(a1[i, 0], a2[i, 0])) - 1e-12
            aloy = min(a0[i, 1], min(a1[i, 1], a2[i, 1])) - 1e-12
            aloz = min(a0[i, 2], min(a1[i, 2], a2[i, 2])) - 1e-12
            ahix = max(a0[i, 0], max(a1[i, 0], a2[i, 0])) + 1e-12
            ahiy = max(a0[i, 1], max(a1[i, 1], a2[i, 1])) + 1e-12
            ahiz = max(a0[i, 2], max(a1[i, 2], a2[i, 2])) + 1e-12
            for j in range(nb_):
                if (
                    alox <= bhix[j]
                    and blox[j] <= ahix
                    and aloy <= bhiy[j]
                    and bloy[j] <= ahiy
                    and aloz <= bhiz[j]
                    and bloz[j] <= ahiz
                ):
                    if _tri_pair_cross_nb(
                        a0[i, 0], a0[i, 1], a0[i, 2],
                        a1[i, 0], a1[i, 1], a1[i, 2],
                        a2[i, 0], a2[i, 1], a2[i, 2],
                        b0[j, 0], b0[j, 1], b0[j, 2],
                        b1[j, 0], b1[j, 1], b1[j, 2],
                        b2[j, 0], b2[j, 1], b2[j, 2],
                        tol,
                    ):
                        return True
        return False

    def rays_nearest_numba(origins, dirs, v0, v1, v2):
        n = origins.shape[0]
        out_t = np.empty(n)
        out_tri = np.empty(n, dtype=np.int64)
        out_u = np.empty(n)
        out_v = np.empty(n)
        _rays_nearest_nb(origins, dirs, v0, v1, v2, out_t, out_tri, out_u, out_v)
        return out_t, out_tri, out_u, out_v

    def count_hits_numba(origin, direction, v0, v1, v2):
        count, grazed = _count_hits_nb(origin, direction, v0, v1, v2)
        return int(count), bool(grazed)

    def mesh_pair_crosses_numba(a0, a1, a2, b0, b1, b2, tol):
        return bool(_mesh_pair_crosses_nb(a0, a1, a2, b0, b1, b2, tol))


KERNEL_BACKEND = "numba" if (_HAVE_NUMBA and _env_wants_numba()) else "numpy"


def _ascontig(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def rays_nearest(origins, dirs, v0, v1, v2):
    """Nearest hit for each ray against the triangle soup (v0, v1, v2).

    origins/dirs are (N, 3); directions must be unit length. Returns
    (t, tri, u, v) arrays of length N; misses carry t=+inf, tri=-1.
    """
    origins = _ascontig(np.atleast_2d(origins))
    dirs = _ascontig(np.atleast_2d(dirs))
    v0 = _ascontig(v0)
    v1 = _ascontig(v1)
    v2 = _ascontig(v2)
    if v0.shape[0] == 0:
        n = origins.shape[0]
        return (
            np.full(n, np.inf),
            np.full(n, -1, dtype=np.int64),
            np.zeros(n),
            np.zeros(n),
        )
    if KERNEL_BACKEND == "numba":
        return rays_nearest_numba(origins, dirs, v0, v1, v2)
    if origins.shape[0] == 1:
        return _single_ray_nearest_numpy(origins[0], dirs[0], v0, v1, v2)
    return rays_nearest_numpy(origins, dirs, v0, v1, v2)


def count_hits(origin, direction, v0, v1, v2):
    """Strict-interior crossing count along a ray, plus a boundary-graze flag."""
    origin = _ascontig(origin).reshape(3)
    direction = _ascontig(direction).reshape(3)
    v0 = _ascontig(v0)
    v1 = _ascontig(v1)
    v2 = _ascontig(v2)
    if v0.shape[0] == 0:
        return 0, False
    if KERNEL_BACKEND == "numba":
        return count_hits_numba(origin, direction, v0, v1, v2)
    return count_hits_numpy(origin, direction, v0, v1, v2)


def mesh_pair_crosses(a0, a1, a2, b0, b1, b2, tol):
    """True if any triangle of A properly crosses any triangle of B.

    Crossing deeper than ``tol`` only; contact within tol reads as touching.
    """
    a0 = _ascontig(a0)
    a1 = _ascontig(a1)
    a2 = _ascontig(a2)
    b0 = _ascontig(b0)
    b1 = _ascontig(b1)
    b2 = _ascontig(b2)
    if a0.shape[0] == 0 or b0.shape[0] == 0:
        return False
    if KERNEL_BACKEND == "numba":
        return mesh_pair_crosses_numba(a0, a1, a2, b0, b1, b2, float(tol))
    return mesh_pair_crosses_numpy(a0, a1, a2, b0, b1, b2, float(tol))
