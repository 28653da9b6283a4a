"""Physical viewing model and degree/pixel conversions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ViewingGeometry:
    """Display and viewer parameters.

    ``dotpitch`` and ``view_distance`` are in meters, image dimensions in pixels.
    """

    dotpitch: float
    view_distance: float
    image_width: int
    image_height: int

    def __post_init__(self):
        if not (self.dotpitch > 0 and math.isfinite(self.dotpitch)):
            raise ValueError(f"dotpitch must be positive, got {self.dotpitch}")
        if not (self.view_distance > 0 and math.isfinite(self.view_distance)):
            raise ValueError(f"view_distance must be positive, got {self.view_distance}")
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("image dimensions must be >= 1")

    @property
    def fov_degrees(self) -> float:
        """Horizontal field of view spanned by the image."""
        half = self.image_width * self.dotpitch / (2.0 * self.view_distance)
        return math.degrees(2.0 * math.atan(half))

    @property
    def center(self) -> tuple[int, int]:
        """Central pixel as (x, y)."""
        return (self.image_width - 1) // 2, (self.image_height - 1) // 2

    def with_size(self, width: int, height: int) -> "ViewingGeometry":
        """Same physical display, different image size (dotpitch kept)."""
        return ViewingGeometry(self.dotpitch, self.view_distance, width, height)


def from_field_of_view(fov_degrees: float, view_distance: float,
                       image_width: int, image_height: int) -> ViewingGeometry:
    """Geometry whose image spans exactly ``fov_degrees`` horizontally."""
    if not (0.0 < fov_degrees < 180.0):
        raise ValueError(f"fov_degrees must be in (0, 180), got {fov_degrees}")
    if not view_distance > 0:
        raise ValueError(f"view_distance must be positive, got {view_distance}")
    if image_width < 1 or image_height < 1:
        raise ValueError("image dimensions must be >= 1")
    dotpitch = 2.0 * view_distance * math.tan(math.radians(fov_degrees) / 2.0) / image_width
    return ViewingGeometry(dotpitch, view_distance, image_width, image_height)


def pixels_per_degree(g: ViewingGeometry) -> float:
    """Linear px/deg factor used to convert field radii."""
    return g.image_width / g.fov_degrees


def degrees_to_pixels(g: ViewingGeometry, degrees: float) -> float:
    return degrees * pixels_per_degree(g)


def eccentricity_degrees(g: ViewingGeometry, fixation, target):
    """Angular distance (deg) between ``fixation`` and ``target`` as seen by the viewer.

    ``target`` may be a pair of arrays (x, y) for vectorized evaluation.
    """
    dx = np.asarray(target[0], dtype=float) - fixation[0]
    dy = np.asarray(target[1], dtype=float) - fixation[1]
    radial = np.hypot(dx, dy)
    ec = np.degrees(np.arctan(radial * g.dotpitch / g.view_distance))
    return float(ec) if ec.ndim == 0 else ec
