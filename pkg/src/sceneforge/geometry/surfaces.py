"""Placeable-surface detection on triangle meshes.

A placeable surface is a cluster of near-horizontal triangles (face normal
within 10 degrees of +z) connected through shared edges, whose vertices stay
within a height tolerance, with enough total area to hold an object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import TriangleMesh

DEFAULT_MIN_AREA = 0.0025  # m^2, a 5 cm square
DEFAULT_HEIGHT_TOL = 0.005  # m
MAX_NORMAL_DEV_DEG = 10.0


@dataclass
class PlaceableSurface:
    triangle_ids: np.ndarray
    height_z: float
    area: float
    boundary: np.ndarray  # outer loop, (K, 2), CCW
    loops: list = field(default_factory=list)  # all boundary loops incl. holes
    source_id: str | None = None  # scene element the surface belongs to, if any


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri
        return ri


def detect_placeable_surfaces(
    mesh: TriangleMesh,
    min_area: float = DEFAULT_MIN_AREA,
    height_tol: float = DEFAULT_HEIGHT_TOL,
) -> list[PlaceableSurface]:
    """Clusters of upward triangles, sorted by descending area.

    Triangles join a cluster through shared edges only while the cluster's
    overall vertex z-range stays within height_tol; clusters under min_area
    are dropped.
    """
    if not len(mesh.triangles):
        return []
    cos_limit = math.cos(math.radians(MAX_NORMAL_DEV_DEG))
    normals = mesh.face_normals
    cand = np.where(normals[:, 2] > cos_limit)[0]
    if not len(cand):
        return []

    verts = mesh.vertices
    tris = mesh.triangles
    local = {int(t): k for k, t in enumerate(cand)}
    zmin = np.empty(len(cand))
    zmax = np.empty(len(cand))
    for k, t in enumerate(cand):
        zs = verts[tris[t], 2]
        zmin[k] = zs.min()
        zmax[k] = zs.max()

    uf = _UnionFind(len(cand))
    span_lo = zmin.copy()
    span_hi = zmax.copy()
    edges: dict[tuple, list] = {}
    for t in cand:
        a, b, c = tris[t]
        for e in ((a, b), (b, c), (c, a)):
            edges.setdefault((min(e), max(e)), []).append(int(t))
    for key in sorted(edges):
        owners = edges[key]
        for i in range(1, len(owners)):
            ka = uf.find(local[owners[0]])
            kb = uf.find(local[owners[i]])
            if ka == kb:
                continue
            lo = min(span_lo[ka], span_lo[kb])
            hi = max(span_hi[ka], span_hi[kb])
            if hi - lo <= height_tol:
                r = uf.union(ka, kb)
                span_lo[r] = lo
                span_hi[r] = hi

    clusters: dict[int, list] = {}
    for t in cand:
        clusters.setdefault(uf.find(local[int(t)]), []).append(int(t))

    areas = mesh.face_areas
    surfaces = []
    for members in clusters.values():
        members = sorted(members)
        area = float(areas[members].sum())
        if area < min_area:
            continue
        vert_ids = np.unique(tris[members].ravel())
        height = float(verts[vert_ids, 2].mean())
        loops = _boundary_loops(tris, verts, members)
        outer = max(loops, key=lambda lp: abs(_shoelace(lp))) if loops else np.zeros((0, 2))
        if len(outer) and _shoelace(outer) < 0:
            outer = outer[::-1].copy()
        surfaces.append(
            PlaceableSurface(
                triangle_ids=np.array(members, dtype=np.int64),
                height_z=height,
                area=area,
                boundary=outer,
                loops=loops,
            )
        )
    surfaces.sort(key=lambda s: (-s.area, s.height_z, int(s.triangle_ids[0])))
    return surfaces


def _shoelace(loop):
    x = loop[:, 0]
    y = loop[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _boundary_loops(tris, verts, members):
    """Chain edges used by exactly one member triangle into xy loops."""
    count: dict[tuple, int] = {}
    directed: dict[tuple, int] = {}
    for t in members:
        a, b, c = (int(v) for v in tris[t])
        for e in ((a, b), (b, c), (c, a)):
            key = (min(e), max(e))
            count[key] = count.get(key, 0) + 1
            directed[key] = e[1] if count[key] == 1 else -1
    nxt = {}
    for key, cnt in count.items():
        if cnt == 1:
            head = directed[key]
            tail = key[0] if head == key[1] else key[1]
            nxt[tail] = head
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start and cur in nxt and cur not in seen:
            loop.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        if len(loop) >= 3:
            loops.append(verts[loop][:, :2].copy())
    return loops


def _point_in_loops(loops, x, y):
    # even-odd rule across every boundary loop (holes included)
    inside = False
    for loop in loops:
        n = len(loop)
        for i in range(n):
            x0, y0 = loop[i]
            x1, y1 = loop[(i + 1) % n]
            if (y0 > y) != (y1 > y):
                t = (y - y0) / (y1 - y0)
                if x < x0 + t * (x1 - x0):
                    inside = not inside
    return inside


def _dist_to_loops(loops, x, y):
    best = math.inf
    p = np.array([x, y])
    for loop in loops:
        n = len(loop)
        for i in range(n):
            a = loop[i]
            b = loop[(i + 1) % n]
            ab = b - a
            denom = float(ab @ ab)
            t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
            best = min(best, float(np.linalg.norm(a + t * ab - p)))
    return best


def surface_membership(
    surfaces,
    point,
    xy_margin: float = 0.0,
    z_tol: float = 0.01,
) -> PlaceableSurface | None:
    """The surface containing the point, or None.

    Matches on xy containment (boundary shrunk by xy_margin) and height within
    z_tol; when several match, the smallest-area surface wins.
    """
    x, y, z = (float(c) for c in np.asarray(point, dtype=np.float64).reshape(3))
    matches = []
    for s in surfaces:
        if abs(z - s.height_z) > z_tol or not len(s.boundary):
            continue
        if not _point_in_loops(s.loops or [s.boundary], x, y):
            continue
        if xy_margin > 0.0 and _dist_to_loops(s.loops or [s.boundary], x, y) < xy_margin:
            continue
        matches.append(s)
    if not matches:
        return None
    return min(matches, key=lambda s: (s.area, s.height_z, int(s.triangle_ids[0])))
