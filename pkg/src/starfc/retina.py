"""Anisotropic retinal transform.

Every output pixel is resampled from a continuous level of a Gaussian pyramid.
The level is set by comparing the finest frequency the display can show at
that pixel with the finest frequency the eye resolves at that eccentricity.
Cones drive all channels; rods contribute to luma only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .viewgeom import ViewingGeometry, eccentricity_degrees, pixels_per_degree


@dataclass(frozen=True)
class AcuityParams:
    # cone falloff (Geisler & Perry 1998)
    alpha_cone: float = 0.106
    e2: float = 2.3
    ct0: float = 1.0 / 64.0
    # rod acuity, generalized Gamma fit
    rod_alpha: float = 2.46
    rod_beta: float = 121.8
    rod_gamma: float = 0.77
    rod_sigma: float = 861.27
    rod_mu: float = -1.0
    rod_weight: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.ct0 < 1.0:
            raise ValueError("ct0 must lie in (0, 1)")
        if self.alpha_cone <= 0 or self.e2 <= 0:
            raise ValueError("alpha_cone and e2 must be positive")
        if not 0.0 <= self.rod_weight <= 1.0:
            raise ValueError("rod_weight must lie in [0, 1]")
        if self.rod_sigma <= 0 or self.rod_gamma <= 0:
            raise ValueError("rod_sigma and rod_gamma must be positive")

    @property
    def cone_weight(self) -> float:
        return 1.0 - self.rod_weight


@dataclass
class GaussianPyramid:
    """Blur-without-decimate pyramid; ``levels[k]`` has the input's shape."""

    levels: np.ndarray  # (num_levels, H, W[, C])
    base_sigma: float

    @property
    def num_levels(self) -> int:
        return self.levels.shape[0]

    def sigma(self, k: int) -> float:
        return 0.0 if k == 0 else self.base_sigma * 2.0 ** k


@dataclass
class RetinalImage:
    image: np.ndarray
    fixation: tuple[int, int]
    cone_levels: np.ndarray
    rod_levels: np.ndarray | None
    num_levels: int


def build_pyramid(image, num_levels: int, base_sigma: float = 0.5) -> GaussianPyramid:
    """Stack of progressively blurred copies of ``image``.

    Level 0 is the input itself; level k >= 1 is blurred with
    sigma = base_sigma * 2**k (edge-replicated borders). Color images are
    blurred per channel.
    """
    if num_levels < 2:
        raise ValueError(f"num_levels must be >= 2, got {num_levels}")
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty image")
    out = np.empty((num_levels,) + img.shape, dtype=np.float64)
    out[0] = img
    for k in range(1, num_levels):
        s = base_sigma * 2.0 ** k
        sigma = (s, s) if img.ndim == 2 else (s, s, 0.0)
        out[k] = gaussian_filter(img, sigma=sigma, mode="nearest")
    return GaussianPyramid(out, base_sigma)


def default_num_levels(g: ViewingGeometry) -> int:
    return max(2, math.ceil(math.log2(pixels_per_degree(g) * 2.0)) + 1)


# --- acuity -----------------------------------------------------------------

def eye_frequency(ec, p: AcuityParams):
    """Highest spatial frequency (cycles/deg) the cones resolve at ``ec`` degrees."""
    ec = np.asarray(ec, dtype=float)
    return p.e2 * math.log(1.0 / p.ct0) / (p.alpha_cone * (ec + p.e2))


def display_frequency(d_rad, g: ViewingGeometry):
    """Nyquist frequency (cycles/deg) of the display at ``d_rad`` pixels from gaze.

    One cycle spans the two pixels either side of the point, so the
    frequency is the reciprocal of their angular subtense.
    """
    d = np.asarray(d_rad, dtype=float) * g.dotpitch
    span = np.arctan((d + g.dotpitch) / g.view_distance) - np.arctan((d - g.dotpitch) / g.view_distance)
    return 1.0 / np.degrees(span)


def rod_acuity(ec, p: AcuityParams):
    """Generalized Gamma rod acuity; beta scales the density."""
    z = (np.asarray(ec, dtype=float) - p.rod_mu) / p.rod_sigma
    z = np.maximum(z, 1e-300)
    return p.rod_beta * z ** (p.rod_alpha * p.rod_gamma - 1.0) * np.exp(-(z ** p.rod_gamma))


def cone_level(ec, d_rad, g: ViewingGeometry, p: AcuityParams):
    """Continuous pyramid level for cone vision.

    log2 of display frequency over eye frequency, clipped at 0. When the
    display out-resolves the fovea the foveal excess is subtracted so the
    fixated pixel always samples level 0.
    """
    raw = np.log2(display_frequency(d_rad, g) / eye_frequency(ec, p))
    fovea = float(np.log2(display_frequency(0.0, g) / eye_frequency(0.0, p)))
    lvl = np.maximum(raw - max(fovea, 0.0), 0.0)
    return float(lvl) if lvl.ndim == 0 else lvl


def rod_level(ec, d_rad, g: ViewingGeometry, p: AcuityParams):
    """Continuous pyramid level for rod vision (rod acuity as the denominator)."""
    lvl = np.maximum(np.log2(display_frequency(d_rad, g) / rod_acuity(ec, p)), 0.0)
    return float(lvl) if lvl.ndim == 0 else lvl


def level_fields(fixation, g: ViewingGeometry, p: AcuityParams, num_levels: int):
    """Per-pixel (cone, rod) level maps clipped to [0, num_levels - 1]."""
    ys, xs = np.mgrid[0:g.image_height, 0:g.image_width]
    d_rad = np.hypot(xs - fixation[0], ys - fixation[1])
    ec = eccentricity_degrees(g, fixation, (xs, ys))
    top = num_levels - 1
    cone = np.clip(cone_level(ec, d_rad, g, p), 0, top)
    rod = np.clip(rod_level(ec, d_rad, g, p), 0, top)
    return cone, rod


# --- sampling ---------------------------------------------------------------

def _cubic_weights(t):
    # Keys cubic convolution, a = -0.5
    a = -0.5
    t2, t3 = t * t, t * t * t
    w0 = a * (t3 - 2 * t2 + t)
    w1 = (a + 2) * t3 - (a + 3) * t2 + 1
    w2 = -(a + 2) * t3 + (2 * a + 3) * t2 - a * t
    w3 = a * (t2 - t3)
    return w0, w1, w2, w3


def sample_levels(levels: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Cubic interpolation of a (L, H, W) stack along its first axis.

    ``field`` gives the continuous level for every pixel; taps beyond the
    stack are clamped to the end levels.
    """
    n = levels.shape[0]
    base = np.floor(field).astype(np.intp)
    base = np.minimum(base, n - 1)
    t = field - base
    out = np.zeros(field.shape, dtype=np.float64)
    for offset, w in zip((-1, 0, 1, 2), _cubic_weights(t)):
        idx = np.clip(base + offset, 0, n - 1)
        out += w * np.take_along_axis(levels, idx[None], axis=0)[0]
    return out


# BT.601 full-range YCrCb, offsets applied separately
_TO_YCC = np.array([[0.299, 0.587, 0.114],
                    [0.5, -0.418688, -0.081312],
                    [-0.168736, -0.331264, 0.5]])
_FROM_YCC = np.linalg.inv(_TO_YCC)


def rgb_to_ycrcb(rgb: np.ndarray) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64) @ _TO_YCC.T


def ycrcb_to_rgb(ycc: np.ndarray) -> np.ndarray:
    return ycc @ _FROM_YCC.T


class Foveator:
    """Retinal transform bound to one image.

    Pyramids do not depend on the fixation, so they are built once and
    reused by every :meth:`transform` call.
    """

    def __init__(self, image, g: ViewingGeometry, p: AcuityParams | None = None,
                 num_levels: int | None = None, base_sigma: float = 0.5):
        self.p = p or AcuityParams()
        img = np.asarray(image, dtype=np.float64)
        if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
            raise ValueError(f"expected H x W or H x W x 3 image, got shape {img.shape}")
        if img.size == 0:
            raise ValueError("empty image")
        h, w = img.shape[:2]
        if (g.image_width, g.image_height) != (w, h):
            g = g.with_size(w, h)
        self.g = g
        self.num_levels = num_levels or default_num_levels(g)
        self.color = img.ndim == 3
        if self.color:
            ycc = rgb_to_ycrcb(img)
            planes = [ycc[..., c] for c in range(3)]
        else:
            planes = [img]
        self._pyramids = [build_pyramid(pl, self.num_levels, base_sigma).levels for pl in planes]

    def transform(self, fixation) -> RetinalImage:
        g, p = self.g, self.p
        x, y = fixation
        if not (0 <= x < g.image_width and 0 <= y < g.image_height):
            raise ValueError(f"fixation {fixation} outside {g.image_width}x{g.image_height} image")
        fixation = (int(x), int(y))
        cone, rod = level_fields(fixation, g, p, self.num_levels)

        luma_pyr = self._pyramids[0]
        luma = sample_levels(luma_pyr, cone)
        if p.rod_weight > 0:
            luma = p.cone_weight * luma + p.rod_weight * sample_levels(luma_pyr, rod)
        if not self.color:
            out = luma
        else:
            ycc = np.stack([luma] + [sample_levels(pyr, cone) for pyr in self._pyramids[1:]], axis=-1)
            out = ycrcb_to_rgb(ycc)
        return RetinalImage(out, fixation, cone, rod if p.rod_weight > 0 else None, self.num_levels)


def apply_transform(image, fixation, g: ViewingGeometry, p: AcuityParams | None = None,
                    num_levels: int | None = None, base_sigma: float = 0.5) -> RetinalImage:
    """Foveate ``image`` (H x W gray or H x W x 3 RGB) around ``fixation`` = (x, y).

    The output keeps the input's shape and value scale (as float64).
    """
    return Foveator(image, g, p, num_levels, base_sigma).transform(fixation)
