"""Triangle meshes, the OBJ subset loader/writer, and box/sphere primitives.

Asset meshes use a bottom-anchored canonical pose: bounding box centered on
the origin in x/y with the lowest point at z=0, so a placement's z coordinate
is the height of the object's underside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import MeshError

DEGENERATE_AREA = 1e-12


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (N, 3) float64
    triangles: np.ndarray  # (M, 3) int64

    _normals: np.ndarray | None = field(default=None, repr=False, compare=False)
    _areas: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.isfinite(self.vertices).all():
            raise MeshError("mesh has non-finite vertex coordinates")
        n = len(self.vertices)
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise MeshError(f"triangle index out of range (mesh has {n} vertices)")
        if len(self.triangles):
            bad = np.where(self.face_areas < DEGENERATE_AREA)[0]
            if len(bad):
                raise MeshError(f"degenerate triangle at index {int(bad[0])}")

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(
            self.triangles, other.triangles
        )

    @property
    def corners(self):
        """Per-triangle corner arrays (v0, v1, v2), each (M, 3)."""
        t = self.triangles
        v = self.vertices
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    @property
    def face_normals(self):
        if self._normals is None:
            v0, v1, v2 = self.corners
            n = np.cross(v1 - v0, v2 - v0)
            lens = np.linalg.norm(n, axis=1)
            self._areas = 0.5 * lens
            safe = np.where(lens > 0, lens, 1.0)
            self._normals = n / safe[:, None]
        return self._normals

    @property
    def face_areas(self):
        if self._areas is None:
            _ = self.face_normals
        return self._areas

    @property
    def total_area(self):
        return float(self.face_areas.sum()) if len(self.triangles) else 0.0

    def aabb(self):
        if not len(self.vertices):
            raise MeshError("empty mesh has no bounding box")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def is_closed(self):
        """True when every edge is shared by exactly two triangles."""
        counts = {}
        for a, b, c in self.triangles:
            for e in ((a, b), (b, c), (c, a)):
                key = (min(e), max(e))
                counts[key] = counts.get(key, 0) + 1
        return bool(counts) and all(v == 2 for v in counts.values())

    def transformed(self, position=(0.0, 0.0, 0.0), rotation_z=0.0, scale=(1.0, 1.0, 1.0)):
        """Scale, rotate about +z, then translate. Returns a new mesh."""
        s = np.asarray(scale, dtype=np.float64)
        v = self.vertices * s
        if rotation_z:
            c, sn = math.cos(rotation_z), math.sin(rotation_z)
            x = v[:, 0] * c - v[:, 1] * sn
            y = v[:, 0] * sn + v[:, 1] * c
            v = np.column_stack([x, y, v[:, 2]])
        v = v + np.asarray(position, dtype=np.float64)
        return TriangleMesh(v, self.triangles.copy())

    @staticmethod
    def merged(meshes):
        verts = []
        tris = []
        offset = 0
        for m in meshes:
            verts.append(m.vertices)
            tris.append(m.triangles + offset)
            offset += len(m.vertices)
        if not verts:
            return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
        return TriangleMesh(np.vstack(verts), np.vstack(tris))


def load_obj(path) -> TriangleMesh:
    """OBJ subset: `v x y z` and `f i j k` (1-based); larger faces are fan-split."""
    verts = []
    tris = []
    path = Path(path)
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise MeshError(f"{path.name}:{lineno}: vertex needs 3 coordinates")
            try:
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as e:
                raise MeshError(f"{path.name}:{lineno}: bad vertex literal: {e}") from None
        elif parts[0] == "f":
            if len(parts) < 4:
                raise MeshError(f"{path.name}:{lineno}: face needs at least 3 indices")
            try:
                # tolerate v/vt/vn forms by taking the vertex index
                idx = [int(p.split("/")[0]) for p in parts[1:]]
            except ValueError as e:
                raise MeshError(f"{path.name}:{lineno}: bad face index: {e}") from None
            if any(i < 1 for i in idx):
                raise MeshError(f"{path.name}:{lineno}: face indices must be positive")
            for k in range(1, len(idx) - 1):
                tris.append([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1])
        # other OBJ statements (vn, vt, o, g, usemtl...) are ignored
    try:
        return TriangleMesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                            np.array(tris, dtype=np.int64).reshape(-1, 3))
    except MeshError as e:
        raise MeshError(f"{path.name}: {e}") from None


def save_obj(mesh: TriangleMesh, path):
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


_BOX_FACES = [
    # each face as two CCW-outward triangles over the 8 corners below
    (0, 2, 1), (0, 3, 2),  # bottom (-z)
    (4, 5, 6), (4, 6, 7),  # top (+z)
    (0, 1, 5), (0, 5, 4),  # front (-y)
    (1, 2, 6), (1, 6, 5),  # right (+x)
    (2, 3, 7), (2, 7, 6),  # back (+y)
    (3, 0, 4), (3, 4, 7),  # left (-x)
]


def box_mesh(size_x, size_y, size_z, *, center=(0.0, 0.0, 0.0), bottom_anchor=True):
    """Axis-aligned box with outward normals.

    bottom_anchor puts the underside at center z (canonical asset pose);
    otherwise the box is centered on ``center``.
    """
    hx, hy, hz = size_x / 2.0, size_y / 2.0, size_z / 2.0
    cx, cy, cz = center
    z0, z1 = (cz, cz + size_z) if bottom_anchor else (cz - hz, cz + hz)
    corners = np.array(
        [
            [cx - hx, cy - hy, z0],
            [cx + hx, cy - hy, z0],
            [cx + hx, cy + hy, z0],
            [cx - hx, cy + hy, z0],
            [cx - hx, cy - hy, z1],
            [cx + hx, cy - hy, z1],
            [cx + hx, cy + hy, z1],
            [cx - hx, cy + hy, z1],
        ]
    )
    return TriangleMesh(corners, np.array(_BOX_FACES, dtype=np.int64))


def quad_mesh(p0, p1, p2, p3):
    """Two triangles over a planar quad, wound (p0, p1, p2, p3)."""
    verts = np.array([p0, p1, p2, p3], dtype=np.float64)
    tris = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int64)
    return TriangleMesh(verts, tris)


def icosphere_mesh(radius=0.5, subdivisions=1, *, bottom_anchor=True):
    """Subdivided icosahedron; with bottom_anchor its lowest point sits at z=0."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    base = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    base /= np.linalg.norm(base, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in base]
    lookup = {v: i for i, v in enumerate(verts)}

    def midpoint(i, j):
        m = (np.array(verts[i]) + np.array(verts[j])) / 2.0
        m /= np.linalg.norm(m)
        key = tuple(m)
        if key not in lookup:
            lookup[key] = len(verts)
            verts.append(key)
        return lookup[key]

    for _ in range(subdivisions):
        nxt = []
        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            nxt += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nxt
    v = np.array(verts) * radius
    if bottom_anchor:
        v = v + np.array([0.0, 0.0, radius])
    return TriangleMesh(v, np.array(faces, dtype=np.int64))
