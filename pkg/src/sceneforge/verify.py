"""Built-in physics verifiers: collision-free (CF) and in-bounds (IB).

CF checks every unordered pair of object-category elements for
interpenetration beyond the collision tolerance; IB checks every element's
transformed bounding box against the scene bounds expanded by the bounds
tolerance. Resting contact is never a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assets import AssetIndex
from .errors import SceneFormatError
from .geometry.collision import DEFAULT_TOLERANCE, meshes_collide
from .geometry.mesh import TriangleMesh
from .scene import Category, Scene, SceneElement

DEFAULT_BOUNDS_TOL = 0.01  # 1 cm


@dataclass
class CollisionViolation:
    element_a: str
    element_b: str
    penetration: float
    axis: str


@dataclass
class BoundsViolation:
    element_id: str
    placement_index: int


@dataclass
class VerificationReport:
    collisions: list = field(default_factory=list)
    out_of_bounds: list = field(default_factory=list)

    @property
    def verified(self):
        return not self.collisions and not self.out_of_bounds


def element_world_meshes(scene: Scene, element: SceneElement, assets: AssetIndex | None):
    """World-posed mesh per placement of one element."""
    if element.asset_ref is not None:
        if assets is None or element.asset_ref not in assets:
            raise SceneFormatError(
                f"unresolvable asset_ref '{element.asset_ref}' at elements/{element.id}"
            )
        base = assets.mesh_for(element.asset_ref)
    else:
        base = element.mesh
    return [
        base.transformed(p.position, p.rotation_z, p.scale) for p in element.placements
    ]


def scene_world_meshes(scene: Scene, assets: AssetIndex | None):
    """[(element_id, placement_index, mesh)] over the whole scene, id-sorted."""
    out = []
    for eid in sorted(scene.elements):
        for k, mesh in enumerate(element_world_meshes(scene, scene.elements[eid], assets)):
            out.append((eid, k, mesh))
    return out


def combined_element_mesh(scene: Scene, element_id: str, assets: AssetIndex | None) -> TriangleMesh:
    meshes = element_world_meshes(scene, scene.elements[element_id], assets)
    return meshes[0] if len(meshes) == 1 else TriangleMesh.merged(meshes)


def verify_scene(
    scene: Scene,
    assets: AssetIndex | None = None,
    collision_tol: float = DEFAULT_TOLERANCE,
    bounds_tol: float = DEFAULT_BOUNDS_TOL,
) -> VerificationReport:
    report = VerificationReport()
    posed = scene_world_meshes(scene, assets)

    for eid, k, mesh in posed:
        lo, hi = mesh.aabb()
        if not scene.bounds.contains_aabb(lo, hi, tol=bounds_tol):
            report.out_of_bounds.append(BoundsViolation(element_id=eid, placement_index=k))

    objs = [
        (eid, mesh)
        for eid, _, mesh in posed
        if scene.elements[eid].category == Category.OBJECTS
    ]
    flagged = set()
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            ida, mesh_a = objs[i]
            idb, mesh_b = objs[j]
            if ida == idb:
                continue
            pair = (min(ida, idb), max(ida, idb))
            if pair in flagged:
                continue
            hit, pen, axis = meshes_collide(mesh_a, mesh_b, tol=collision_tol)
            if hit:
                flagged.add(pair)
                report.collisions.append(
                    CollisionViolation(
                        element_a=pair[0], element_b=pair[1], penetration=pen, axis=axis
                    )
                )
    report.collisions.sort(key=lambda v: (v.element_a, v.element_b))
    report.out_of_bounds.sort(key=lambda v: (v.element_id, v.placement_index))
    return report
