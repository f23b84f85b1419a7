"""Mesh collision checks: AABB broad phase, proper-crossing narrow phase.

Contact within the tolerance (objects resting on each other) is never a
collision; the narrow phase only fires on triangles that genuinely cross.
Full containment (one closed mesh swallowed by another, no surface crossing)
is caught by a point-in-mesh parity test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mesh import TriangleMesh

DEFAULT_TOLERANCE = 0.001  # 1 mm

_AXIS_NAMES = ("x", "y", "z")

# oblique directions for parity ray tests, tried in order if a ray grazes an edge
_PARITY_DIRS = np.array(
    [
        [0.5377, 0.2843, 0.7949],
        [-0.3661, 0.8115, 0.4556],
        [0.7071, -0.5417, 0.4549],
        [-0.2425, -0.3640, 0.8994],
    ]
)
_PARITY_DIRS /= np.linalg.norm(_PARITY_DIRS, axis=1)[:, None]


@dataclass
class CollisionContact:
    index: int  # position in the scene mesh sequence
    penetration: float  # min-axis AABB overlap, metres
    axis: str


@dataclass
class CollisionReport:
    contacts: list[CollisionContact] = field(default_factory=list)

    @property
    def collided(self):
        return bool(self.contacts)


def aabb_overlap(lo_a, hi_a, lo_b, hi_b):
    """Per-axis overlap extents; any negative component means disjoint."""
    return np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)


def point_in_mesh(point, mesh: TriangleMesh) -> bool:
    """Parity test; only meaningful for closed meshes."""
    v0, v1, v2 = mesh.corners
    point = np.asarray(point, dtype=np.float64)
    for d in _PARITY_DIRS:
        count, grazed = kernels.count_hits(point, d, v0, v1, v2)
        if not grazed:
            return count % 2 == 1
    return count % 2 == 1  # every direction grazed; take the last answer


def meshes_collide(a: TriangleMesh, b: TriangleMesh, tol=DEFAULT_TOLERANCE):
    """(collided, penetration, axis) for a world-posed mesh pair."""
    lo_a, hi_a = a.aabb()
    lo_b, hi_b = b.aabb()
    overlap = aabb_overlap(lo_a, hi_a, lo_b, hi_b)
    if (overlap < -1e-9).any():
        return False, 0.0, ""
    axis = int(np.argmin(overlap))
    pen = float(max(overlap[axis], 0.0))
    a0, a1, a2 = a.corners
    b0, b1, b2 = b.corners
    if kernels.mesh_pair_crosses(a0, a1, a2, b0, b1, b2, tol):
        return True, pen, _AXIS_NAMES[axis]
    # no surface crossing: check for full containment between closed meshes
    if pen > tol:
        if b.is_closed and point_in_mesh((lo_a + hi_a) / 2.0, b):
            return True, pen, _AXIS_NAMES[axis]
        if a.is_closed and point_in_mesh((lo_b + hi_b) / 2.0, a):
            return True, pen, _AXIS_NAMES[axis]
    return False, 0.0, ""


def check_collision(candidate: TriangleMesh, scene_meshes, tol=DEFAULT_TOLERANCE) -> CollisionReport:
    """Collide a candidate mesh against a sequence of world-posed meshes."""
    report = CollisionReport()
    for i, other in enumerate(scene_meshes):
        if not len(other.triangles):
            continue
        hit, pen, axis = meshes_collide(candidate, other, tol)
        if hit:
            report.contacts.append(CollisionContact(index=i, penetration=pen, axis=axis))
    return report
