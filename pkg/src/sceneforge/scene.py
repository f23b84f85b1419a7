"""Scene data model: typed descriptors, the scene container, canonical JSON.

All numeric fields are canonicalized to 9 significant digits when values
enter the model, so equal scenes always serialize to identical bytes and
serialize/deserialize is an exact round trip.

Scenes are treated as immutable once shared between components; the action
interpreter only ever mutates a private clone.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import SceneFormatError
from .geometry.mesh import TriangleMesh

TWO_PI = 2.0 * math.pi

LIGHT_KINDS = ("point", "directional", "area")


def q9(x: float) -> float:
    """Canonical float: 9 significant digits."""
    return float(f"{float(x):.9g}")


def q9v(values):
    return tuple(q9(v) for v in values)


def q9_array(arr: np.ndarray) -> np.ndarray:
    out = np.array([q9(v) for v in arr.ravel()], dtype=np.float64)
    return out.reshape(arr.shape)


def _require_finite(values, path):
    for v in values:
        if not math.isfinite(v):
            raise SceneFormatError(f"non-finite number at {path}")


class Category(str, Enum):
    FLOORS = "floors"
    WALLS = "walls"
    CEILINGS = "ceilings"
    OBJECTS = "objects"


@dataclass
class Placement:
    position: tuple = (0.0, 0.0, 0.0)
    rotation_z: float = 0.0  # radians, normalized into [0, 2*pi)
    scale: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        _require_finite(pos, "placement position")
        self.position = q9v(pos)
        r = math.fmod(float(self.rotation_z), TWO_PI)
        if r < 0.0:
            r += TWO_PI
        if r >= TWO_PI:  # fmod can land exactly on 2*pi
            r -= TWO_PI
        self.rotation_z = q9(r)
        s = tuple(float(c) for c in self.scale)
        _require_finite(s, "placement scale")
        if any(c <= 0.0 for c in s):
            raise SceneFormatError("placement scale components must be positive")
        self.scale = q9v(s)


@dataclass
class MaterialAssignment:
    description: str
    resolved_id: str | None = None

    def __post_init__(self):
        if not self.description:
            raise SceneFormatError("material description must be non-empty")


@dataclass
class Light:
    id: str
    kind: str
    intensity: float
    color: tuple
    position: tuple | None = None
    direction: tuple | None = None
    extent: tuple | None = None

    def __post_init__(self):
        if self.kind not in LIGHT_KINDS:
            raise SceneFormatError(f"unknown light kind '{self.kind}' at lights/{self.id}")
        self.intensity = q9(float(self.intensity))
        if not (self.intensity > 0.0 and math.isfinite(self.intensity)):
            raise SceneFormatError(f"light intensity must be positive at lights/{self.id}")
        color = tuple(float(c) for c in self.color)
        if len(color) != 3:
            raise SceneFormatError(f"light color must have 3 channels at lights/{self.id}")
        for c in color:
            if not (0.0 <= c <= 1.0):
                raise SceneFormatError(f"color channel out of range at lights/{self.id}")
        self.color = q9v(color)

        needs_position = self.kind in ("point", "area")
        if needs_position != (self.position is not None):
            raise SceneFormatError(
                f"light position {'required' if needs_position else 'not allowed'} "
                f"at lights/{self.id}"
            )
        if (self.kind == "directional") != (self.direction is not None):
            raise SceneFormatError(
                f"light direction {'required' if self.kind == 'directional' else 'not allowed'} "
                f"at lights/{self.id}"
            )
        if (self.kind == "area") != (self.extent is not None):
            raise SceneFormatError(
                f"light extent {'required' if self.kind == 'area' else 'not allowed'} "
                f"at lights/{self.id}"
            )
        if self.position is not None:
            pos = tuple(float(c) for c in self.position)
            _require_finite(pos, f"lights/{self.id}/position")
            self.position = q9v(pos)
        if self.direction is not None:
            d = tuple(float(c) for c in self.direction)
            n = math.sqrt(sum(c * c for c in d))
            if abs(n - 1.0) > 1e-6:
                raise SceneFormatError(f"light direction must be unit length at lights/{self.id}")
            self.direction = q9v(d)
        if self.extent is not None:
            e = tuple(float(c) for c in self.extent)
            if len(e) != 2 or any(c <= 0 for c in e):
                raise SceneFormatError(f"light extent must be 2 positive extents at lights/{self.id}")
            self.extent = q9v(e)


@dataclass
class Bounds:
    min: tuple
    max: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in self.min)
        hi = tuple(float(c) for c in self.max)
        _require_finite(lo + hi, "bounds")
        if any(a >= b for a, b in zip(lo, hi)):
            raise SceneFormatError("bounds min must be strictly below max on every axis")
        self.min = q9v(lo)
        self.max = q9v(hi)

    def contains_aabb(self, lo, hi, tol=0.0):
        return all(lo[i] >= self.min[i] - tol and hi[i] <= self.max[i] + tol for i in range(3))

    def contains_point(self, p, tol=0.0):
        return all(self.min[i] - tol <= p[i] <= self.max[i] + tol for i in range(3))

    @property
    def center(self):
        return tuple((a + b) / 2.0 for a, b in zip(self.min, self.max))

    @property
    def size(self):
        return tuple(b - a for a, b in zip(self.min, self.max))


@dataclass
class SceneElement:
    id: str
    category: Category
    asset_ref: str | None = None
    mesh: TriangleMesh | None = None  # inline geometry (room shell, fixtures)
    placements: list = field(default_factory=lambda: [Placement()])
    material: MaterialAssignment | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise SceneFormatError("element id must be non-empty")
        if (self.asset_ref is None) == (self.mesh is None):
            raise SceneFormatError(
                f"element must carry exactly one of asset_ref or mesh at elements/{self.id}"
            )
        if not self.placements:
            raise SceneFormatError(f"placements must be non-empty at elements/{self.id}")
        if self.mesh is not None:
            # canonicalize inline vertices so serialization is lossless
            self.mesh = TriangleMesh(q9_array(self.mesh.vertices), self.mesh.triangles)


@dataclass
class RoomShellInfo:
    """Provenance of a procedurally built room: layout echo plus element roles."""

    floor_polygon: list
    wall_height: float
    floor_id: str
    ceiling_id: str
    wall_ids: list
    fixture_ids: list
    openings: list  # opening spec dicts, echoed for downstream tools

    def to_json(self):
        return {
            "floor_polygon": [list(q9v(p)) for p in self.floor_polygon],
            "wall_height": q9(self.wall_height),
            "floor_id": self.floor_id,
            "ceiling_id": self.ceiling_id,
            "wall_ids": list(self.wall_ids),
            "fixture_ids": list(self.fixture_ids),
            "openings": copy.deepcopy(self.openings),
        }

    @staticmethod
    def from_json(obj):
        return RoomShellInfo(
            floor_polygon=[tuple(p) for p in obj["floor_polygon"]],
            wall_height=float(obj["wall_height"]),
            floor_id=obj["floor_id"],
            ceiling_id=obj["ceiling_id"],
            wall_ids=list(obj["wall_ids"]),
            fixture_ids=list(obj["fixture_ids"]),
            openings=copy.deepcopy(obj["openings"]),
        )


@dataclass
class Scene:
    prompt: str
    bounds: Bounds
    elements: dict = field(default_factory=dict)
    lights: dict = field(default_factory=dict)
    room: RoomShellInfo | None = None

    def add_element(self, element: SceneElement):
        if element.id in self.elements or element.id in self.lights:
            raise SceneFormatError(f"duplicate id at elements/{element.id}")
        self.elements[element.id] = element
        return element

    def add_light(self, light: Light):
        if light.id in self.lights or light.id in self.elements:
            raise SceneFormatError(f"duplicate id at lights/{light.id}")
        self.lights[light.id] = light
        return light

    def next_id(self, prefix: str) -> str:
        n = 0
        for existing in list(self.elements) + list(self.lights):
            if existing.startswith(prefix + "_"):
                tail = existing[len(prefix) + 1 :]
                if tail.isdigit():
                    n = max(n, int(tail) + 1)
        return f"{prefix}_{n}"

    def elements_of(self, category: Category):
        return [e for e in self.elements.values() if e.category == category]


def clone_scene(scene: Scene) -> Scene:
    """Deep, isolated copy; mutating either side never affects the other."""
    return copy.deepcopy(scene)


# ---------------------------------------------------------------------------
# canonical JSON serialization
# ---------------------------------------------------------------------------


def _mesh_to_json(mesh: TriangleMesh):
    return {
        "vertices": [[q9(c) for c in v] for v in mesh.vertices.tolist()],
        "triangles": [[int(i) for i in t] for t in mesh.triangles.tolist()],
    }


def _mesh_from_json(obj, path):
    try:
        return TriangleMesh(
            np.array(obj["vertices"], dtype=np.float64).reshape(-1, 3),
            np.array(obj["triangles"], dtype=np.int64).reshape(-1, 3),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SceneFormatError(f"bad inline mesh at {path}: {e}") from None


def scene_to_obj(scene: Scene) -> dict:
    elements = {}
    for eid in sorted(scene.elements):
        e = scene.elements[eid]
        rec = {
            "category": e.category.value,
            "placements": [
                {
                    "position": list(p.position),
                    "rotation_z": p.rotation_z,
                    "scale": list(p.scale),
                }
                for p in e.placements
            ],
        }
        if e.asset_ref is not None:
            rec["asset_ref"] = e.asset_ref
        else:
            rec["mesh_ref"] = _mesh_to_json(e.mesh)
        if e.material is not None:
            rec["material"] = {
                "description": e.material.description,
                "resolved_id": e.material.resolved_id,
            }
        if e.metadata:
            rec["metadata"] = {str(k): str(v) for k, v in sorted(e.metadata.items())}
        elements[eid] = rec
    lights = {}
    for lid in sorted(scene.lights):
        l = scene.lights[lid]
        rec = {"kind": l.kind, "intensity": l.intensity, "color": list(l.color)}
        if l.position is not None:
            rec["position"] = list(l.position)
        if l.direction is not None:
            rec["direction"] = list(l.direction)
        if l.extent is not None:
            rec["extent"] = list(l.extent)
        lights[lid] = rec
    out = {
        "prompt": scene.prompt,
        "bounds": {"min": list(scene.bounds.min), "max": list(scene.bounds.max)},
        "elements": elements,
        "lights": lights,
    }
    if scene.room is not None:
        out["room"] = scene.room.to_json()
    return out


def serialize_scene(scene: Scene) -> bytes:
    """Canonical bytes: sorted keys, compact separators, 9-sig-digit floats."""
    return json.dumps(
        scene_to_obj(scene), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def _reject_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise SceneFormatError(f"duplicate id at {k}")
        seen[k] = v
    return seen


def _vec(obj, n, path):
    if not isinstance(obj, (list, tuple)) or len(obj) != n:
        raise SceneFormatError(f"expected {n}-vector at {path}")
    try:
        return tuple(float(v) for v in obj)
    except (TypeError, ValueError):
        raise SceneFormatError(f"expected numbers at {path}") from None


def deserialize_scene(data: bytes | str) -> Scene:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"invalid scene JSON: {e}") from None
    return scene_from_obj(obj)


def scene_from_obj(obj: dict) -> Scene:
    if not isinstance(obj, dict):
        raise SceneFormatError("scene document must be an object")
    for key in ("prompt", "bounds", "elements", "lights"):
        if key not in obj:
            raise SceneFormatError(f"missing required key at {key}")
    b = obj["bounds"]
    bounds = Bounds(_vec(b.get("min"), 3, "bounds/min"), _vec(b.get("max"), 3, "bounds/max"))
    scene = Scene(prompt=str(obj["prompt"]), bounds=bounds)

    for eid, rec in obj["elements"].items():
        path = f"elements/{eid}"
        try:
            category = Category(rec.get("category"))
        except ValueError:
            raise SceneFormatError(
                f"unknown category '{rec.get('category')}' at {path}/category"
            ) from None
        placements = []
        for i, p in enumerate(rec.get("placements", [])):
            ppath = f"{path}/placements/{i}"
            try:
                placements.append(
                    Placement(
                        position=_vec(p.get("position"), 3, ppath + "/position"),
                        rotation_z=float(p.get("rotation_z", 0.0)),
                        scale=_vec(p.get("scale", (1, 1, 1)), 3, ppath + "/scale"),
                    )
                )
            except SceneFormatError as e:
                raise SceneFormatError(f"{e} at {ppath}") from None
        material = None
        if "material" in rec and rec["material"] is not None:
            m = rec["material"]
            material = MaterialAssignment(
                description=str(m.get("description", "")), resolved_id=m.get("resolved_id")
            )
        mesh = None
        if "mesh_ref" in rec:
            mesh = _mesh_from_json(rec["mesh_ref"], path + "/mesh_ref")
        try:
            element = SceneElement(
                id=str(eid),
                category=category,
                asset_ref=rec.get("asset_ref"),
                mesh=mesh,
                placements=placements,
                material=material,
                metadata=dict(rec.get("metadata", {})),
            )
        except SceneFormatError as e:
            raise SceneFormatError(f"{e}") from None
        scene.add_element(element)

    for lid, rec in obj["lights"].items():
        path = f"lights/{lid}"
        kind = rec.get("kind")
        try:
            light = Light(
                id=str(lid),
                kind=kind,
                intensity=float(rec.get("intensity", 0.0)),
                color=_vec(rec.get("color"), 3, path + "/color"),
                position=(
                    _vec(rec["position"], 3, path + "/position") if "position" in rec else None
                ),
                direction=(
                    _vec(rec["direction"], 3, path + "/direction") if "direction" in rec else None
                ),
                extent=_vec(rec["extent"], 2, path + "/extent") if "extent" in rec else None,
            )
        except (TypeError, ValueError):
            raise SceneFormatError(f"bad light record at {path}") from None
        scene.add_light(light)

    if "room" in obj and obj["room"] is not None:
        try:
            scene.room = RoomShellInfo.from_json(obj["room"])
        except (KeyError, TypeError, ValueError) as e:
            raise SceneFormatError(f"bad room record: {e}") from None
    return scene


def summarize_scene(scene: Scene) -> dict:
    """Compact, deterministic state summary handed to policies and exports."""
    elements = []
    for eid in sorted(scene.elements):
        e = scene.elements[eid]
        p = e.placements[0]
        entry = {
            "id": eid,
            "category": e.category.value,
            "position": list(p.position),
            "rotation_z": p.rotation_z,
            "scale": list(p.scale),
        }
        if e.metadata.get("description"):
            entry["description"] = e.metadata["description"]
        if e.material is not None:
            entry["material"] = e.material.description
        elements.append(entry)
    lights = []
    for lid in sorted(scene.lights):
        l = scene.lights[lid]
        lights.append({"id": lid, "kind": l.kind, "intensity": l.intensity})
    return {
        "prompt": scene.prompt,
        "bounds": {"min": list(scene.bounds.min), "max": list(scene.bounds.max)},
        "elements": elements,
        "lights": lights,
    }
