"""Ray casting against sets of world-posed meshes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .mesh import TriangleMesh


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray  # unit length

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        d = np.asarray(self.direction, dtype=np.float64).reshape(3)
        n = np.linalg.norm(d)
        if n == 0.0 or not np.isfinite(n):
            raise ValueError("ray direction must be a nonzero finite vector")
        self.direction = d / n

    @staticmethod
    def towards(origin, target):
        origin = np.asarray(origin, dtype=np.float64)
        return Ray(origin, np.asarray(target, dtype=np.float64) - origin)


@dataclass
class RayHit:
    mesh_index: int
    triangle: int
    distance: float
    point: np.ndarray
    barycentric: tuple  # (w, u, v) weights of the triangle's three corners


def _ray_intersects_aabb(origin, direction, lo, hi):
    # slab test; zero direction components give +/-inf which works out
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / direction
        t0 = (lo - origin) * inv
        t1 = (hi - origin) * inv
    tmin = np.minimum(t0, t1)
    tmax = np.maximum(t0, t1)
    # axes where the ray is parallel and the origin is outside the slab
    par = direction == 0.0
    if np.any(par & ((origin < lo) | (origin > hi))):
        return False
    tmin = np.where(par, -np.inf, tmin)
    tmax = np.where(par, np.inf, tmax)
    enter = np.max(tmin)
    leave = np.min(tmax)
    return leave >= max(enter, 0.0) - 1e-12


def cast_ray(meshes, ray: Ray) -> RayHit | None:
    """Nearest positive-distance hit across world-posed meshes, or None."""
    best = None
    for mi, mesh in enumerate(meshes):
        if not len(mesh.triangles):
            continue
        lo, hi = mesh.aabb()
        if not _ray_intersects_aabb(ray.origin, ray.direction, lo, hi):
            continue
        v0, v1, v2 = mesh.corners
        t, tri, u, v = kernels.rays_nearest(
            ray.origin[None, :], ray.direction[None, :], v0, v1, v2
        )
        if tri[0] >= 0 and (best is None or t[0] < best.distance):
            point = ray.origin + float(t[0]) * ray.direction
            best = RayHit(
                mesh_index=mi,
                triangle=int(tri[0]),
                distance=float(t[0]),
                point=point,
                barycentric=(1.0 - float(u[0]) - float(v[0]), float(u[0]), float(v[0])),
            )
    return best


def cast_rays(meshes, origins, dirs):
    """Batch variant of cast_ray over a merged triangle soup.

    Returns (t, mesh_index, triangle) arrays; misses carry t=+inf and -1s.
    Triangle indices are local to the owning mesh.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    soup = [m for m in meshes if len(m.triangles)]
    if not soup:
        n = len(origins)
        return np.full(n, np.inf), np.full(n, -1, dtype=np.int64), np.full(n, -1, dtype=np.int64)
    merged = TriangleMesh.merged(soup)
    v0, v1, v2 = merged.corners
    t, tri, _, _ = kernels.rays_nearest(origins, dirs, v0, v1, v2)
    counts = np.array([len(m.triangles) for m in soup])
    starts = np.concatenate([[0], np.cumsum(counts)])
    # map merged triangle index back to (original mesh, local triangle)
    src = np.searchsorted(starts, tri, side="right") - 1
    mesh_idx = np.full(len(t), -1, dtype=np.int64)
    local_tri = np.full(len(t), -1, dtype=np.int64)
    hit = tri >= 0
    orig_indices = np.array([i for i, m in enumerate(meshes) if len(m.triangles)])
    mesh_idx[hit] = orig_indices[src[hit]]
    local_tri[hit] = tri[hit] - starts[src[hit]]
    return t, mesh_idx, local_tri
