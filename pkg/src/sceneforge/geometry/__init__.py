from .collision import (
    CollisionContact,
    CollisionReport,
    check_collision,
    meshes_collide,
    point_in_mesh,
)
from .kernels import KERNEL_BACKEND
from .mesh import TriangleMesh, box_mesh, icosphere_mesh, load_obj, quad_mesh, save_obj
from .raycast import Ray, RayHit, cast_ray, cast_rays
from .surfaces import PlaceableSurface, detect_placeable_surfaces, surface_membership

__all__ = [
    "CollisionContact",
    "CollisionReport",
    "KERNEL_BACKEND",
    "PlaceableSurface",
    "Ray",
    "RayHit",
    "TriangleMesh",
    "box_mesh",
    "cast_ray",
    "cast_rays",
    "check_collision",
    "detect_placeable_surfaces",
    "icosphere_mesh",
    "load_obj",
    "meshes_collide",
    "point_in_mesh",
    "quad_mesh",
    "save_obj",
    "surface_membership",
]
