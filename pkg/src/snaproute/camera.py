"""Nadir camera model: ground footprint and ground sampling distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import InvalidInput
from .geo import LocalPoint

if TYPE_CHECKING:  # pragma: no cover
    from .anneal import Viewpoint


@dataclass(frozen=True)
class CameraSpec:
    """Sensor geometry: field of view in degrees, resolution in pixels."""

    hfov_deg: float
    vfov_deg: float
    hres: int
    vres: int
    max_gimbal_pitch_error_deg: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.hfov_deg < 180.0):
            raise InvalidInput(f"hfov {self.hfov_deg} outside (0, 180)")
        if not (0.0 < self.vfov_deg < 180.0):
            raise InvalidInput(f"vfov {self.vfov_deg} outside (0, 180)")
        if self.hres < 1 or self.vres < 1:
            raise InvalidInput("resolution must be at least 1 pixel")


# Typical 1-inch-sensor commercial UAV camera; used by the study harness.
DEFAULT_CAMERA = CameraSpec(hfov_deg=84.0, vfov_deg=62.0, hres=5472, vres=3648)


def footprint_dims(cam: CameraSpec, height_agl: float) -> tuple[float, float]:
    """Ground extents (dh, dv) in metres imaged from ``height_agl``."""
    if height_agl < 0:
        raise InvalidInput(f"height above ground must be non-negative, got {height_agl}")
    dh = 2.0 * height_agl * math.tan(math.radians(cam.hfov_deg) / 2.0)
    dv = 2.0 * height_agl * math.tan(math.radians(cam.vfov_deg) / 2.0)
    return dh, dv


@dataclass(frozen=True)
class Footprint:
    """Ground rectangle imaged by a nadir camera at one pose."""

    corners: tuple[LocalPoint, LocalPoint, LocalPoint, LocalPoint]
    center: LocalPoint
    width_dh: float
    height_dv: float
    yaw_deg: float

    @property
    def ring(self) -> tuple[tuple[float, float], ...]:
        return tuple((c.x, c.y) for c in self.corners)

    @property
    def area(self) -> float:
        return self.width_dh * self.height_dv


def footprint_ring(
    cam: CameraSpec, x: float, y: float, height_agl: float, yaw_deg: float
) -> tuple[tuple[float, float], ...]:
    """CCW corner ring of the footprint rectangle, as raw coordinate pairs.

    Hot path for objective evaluation: no dataclass wrapping.
    """
    dh, dv = footprint_dims(cam, height_agl)
    hx = dh / 2.0
    hy = dv / 2.0
    a = math.radians(yaw_deg)
    c = math.cos(a)
    s = math.sin(a)
    base = ((hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy))
    return tuple((x + c * px - s * py, y + s * px + c * py) for px, py in base)


def footprint_at(cam: CameraSpec, pose: "Viewpoint") -> Footprint:
    """Footprint rectangle for a viewpoint pose (nadir camera assumed)."""
    dh, dv = footprint_dims(cam, pose.z_agl)
    ring = footprint_ring(cam, pose.x, pose.y, pose.z_agl, pose.yaw_deg)
    return Footprint(
        corners=tuple(LocalPoint(px, py) for px, py in ring),
        center=LocalPoint(pose.x, pose.y),
        width_dh=dh,
        height_dv=dv,
        yaw_deg=pose.yaw_deg,
    )


def gsd(cam: CameraSpec, height_agl: float) -> float:
    """Horizontal ground sampling distance in cm per pixel."""
    if height_agl <= 0:
        raise InvalidInput(f"height above ground must be positive, got {height_agl}")
    dh, _ = footprint_dims(cam, height_agl)
    return 100.0 * dh / cam.hres
