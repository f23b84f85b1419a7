"""Pinhole and equirectangular cameras: projection and per-pixel rays.

Pixel (u, v) indexes column u, row v; rays pass through pixel centers.
Depth everywhere means Euclidean distance along the (unit) ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry.raycast import Ray


@dataclass
class Camera:
    position: tuple
    look_at: tuple
    up: tuple = (0.0, 0.0, 1.0)
    vertical_fov: float = math.radians(60.0)
    width: int = 256
    height: int = 256

    def __post_init__(self):
        self.position = tuple(float(c) for c in self.position)
        self.look_at = tuple(float(c) for c in self.look_at)
        self.up = tuple(float(c) for c in self.up)
        if self.position == self.look_at:
            raise ValueError("camera look_at must differ from position")
        if not (0.0 < self.vertical_fov < math.pi):
            raise ValueError("vertical_fov must lie in (0, pi)")
        f = np.array(self.look_at) - np.array(self.position)
        f = f / np.linalg.norm(f)
        upv = np.array(self.up, dtype=np.float64)
        r = np.cross(f, upv)
        rn = np.linalg.norm(r)
        if rn < 1e-12:
            raise ValueError("camera up vector is parallel to the view direction")
        r /= rn
        self._forward = f
        self._right = r
        self._up = np.cross(r, f)
        self._half_h = math.tan(self.vertical_fov / 2.0)
        self._half_w = self._half_h * self.width / self.height

    @property
    def basis(self):
        return self._right, self._up, self._forward

    def pixel_direction(self, u: float, v: float) -> np.ndarray:
        """Unit ray direction through pixel-center coordinates (u, v)."""
        x = ((u + 0.5) / self.width * 2.0 - 1.0) * self._half_w
        y = (1.0 - (v + 0.5) / self.height * 2.0) * self._half_h
        d = self._forward + x * self._right + y * self._up
        return d / np.linalg.norm(d)

    def pixel_to_ray(self, u: int, v: int) -> Ray:
        if not (0 <= u < self.width and 0 <= v < self.height):
            raise ValueError(f"pixel ({u}, {v}) outside {self.width}x{self.height} image")
        return Ray(np.array(self.position), self.pixel_direction(float(u), float(v)))

    def ray_grid(self):
        """(origins, dirs) for all pixels, row-major; origins shaped (H*W, 3)."""
        us, vs = np.meshgrid(np.arange(self.width), np.arange(self.height))
        x = ((us.ravel() + 0.5) / self.width * 2.0 - 1.0) * self._half_w
        y = (1.0 - (vs.ravel() + 0.5) / self.height * 2.0) * self._half_h
        d = (
            self._forward[None, :]
            + x[:, None] * self._right[None, :]
            + y[:, None] * self._up[None, :]
        )
        d /= np.linalg.norm(d, axis=1)[:, None]
        origins = np.broadcast_to(np.array(self.position), d.shape).copy()
        return origins, d

    def project(self, point):
        """(u, v, depth) in pixel-center float coordinates, or None if behind."""
        d = np.asarray(point, dtype=np.float64) - np.array(self.position)
        z = float(d @ self._forward)
        if z <= 1e-12:
            return None
        x = float(d @ self._right) / z / self._half_w
        y = float(d @ self._up) / z / self._half_h
        u = (x + 1.0) / 2.0 * self.width - 0.5
        v = (1.0 - y) / 2.0 * self.height - 0.5
        return u, v, float(np.linalg.norm(d))

    def in_image(self, u: float, v: float) -> bool:
        return -0.5 <= u <= self.width - 0.5 and -0.5 <= v <= self.height - 0.5


def pixel_to_ray(camera: Camera, pixel) -> Ray:
    u, v = pixel
    return camera.pixel_to_ray(int(u), int(v))


@dataclass
class PanoCamera:
    position: tuple
    width: int = 512
    height: int = 256

    def __post_init__(self):
        self.position = tuple(float(c) for c in self.position)
        if self.width != 2 * self.height:
            raise ValueError("equirectangular cameras need width = 2 * height")

    def pixel_direction(self, u: float, v: float) -> np.ndarray:
        lon = 2.0 * math.pi * (u + 0.5) / self.width - math.pi
        lat = math.pi / 2.0 - math.pi * (v + 0.5) / self.height
        cl = math.cos(lat)
        return np.array([cl * math.cos(lon), cl * math.sin(lon), math.sin(lat)])

    def ray_grid(self):
        us, vs = np.meshgrid(np.arange(self.width), np.arange(self.height))
        lon = 2.0 * np.pi * (us.ravel() + 0.5) / self.width - np.pi
        lat = np.pi / 2.0 - np.pi * (vs.ravel() + 0.5) / self.height
        cl = np.cos(lat)
        d = np.column_stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)])
        origins = np.broadcast_to(np.array(self.position), d.shape).copy()
        return origins, d
