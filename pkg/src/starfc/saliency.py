"""Central and peripheral attentional-map backends."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .fileio import MAP_SUFFIXES, read_map


@dataclass
class SaliencyMap:
    values: np.ndarray
    backend_id: str = ""

    @property
    def shape(self):
        return self.values.shape


@dataclass
class BackendSpec:
    """Which backend fills a map slot, plus its parameters.

    Built-in kinds: ``spectral_residual``, ``center_surround`` (low level) and
    ``objectness`` (coarse high-level proxy). ``external`` reads precomputed
    maps from ``params["map_dir"]``.
    """

    kind: str
    params: dict = field(default_factory=dict)


_ALIASES = {
    "builtin-lowlevel": "spectral_residual",
    "builtin-highlevel-proxy": "objectness",
    "external-directory": "external",
}


def normalize(values, backend_id: str = "") -> SaliencyMap:
    """Affine rescale to [0, 1]; a constant field becomes all 0.5."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("map contains non-finite values")
    lo, hi = v.min(), v.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return SaliencyMap(np.full(v.shape, 0.5), backend_id)
    return SaliencyMap((v - lo) / (hi - lo), backend_id)


def _as_array(image):
    return np.asarray(getattr(image, "image", image), dtype=np.float64)


def _gray(img):
    return img if img.ndim == 2 else img @ np.array([0.299, 0.587, 0.114])


def _resize_long_side(img, long_side):
    h, w = img.shape[:2]
    s = long_side / max(h, w)
    if s >= 1:
        return img
    size = (max(1, round(w * s)), max(1, round(h * s)))
    return cv2.resize(img, size, interpolation=cv2.INTER_AREA)


def _upsample(m, shape):
    h, w = shape
    if m.shape == (h, w):
        return m
    return cv2.resize(m, (w, h), interpolation=cv2.INTER_LINEAR)


def _is_constant(img):
    # resampling leaves ~1e-13 ripples on flat input
    return np.ptp(img) <= 1e-9 * max(1.0, float(np.abs(img).max()))


def spectral_residual(image, scale: int = 64, sigma: float = 2.5) -> np.ndarray:
    """Spectral-residual saliency (Hou & Zhang 2007), returned unnormalized at full size."""
    img = _as_array(image)
    gray = _resize_long_side(_gray(img), scale)
    spec = np.fft.fft2(gray)
    amp = np.abs(spec)
    log_amp = np.log(amp + 1e-12)
    residual = log_amp - uniform_filter(log_amp, size=3, mode="nearest")
    recon = np.fft.ifft2(np.exp(residual + 1j * np.angle(spec)))
    sal = gaussian_filter(np.abs(recon) ** 2, sigma, mode="nearest")
    return _upsample(sal, img.shape[:2])


def _opponent_channels(img):
    if img.ndim == 2:
        return [img]
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    intensity = (r + g + b) / 3.0
    return [intensity, r - g, b - (r + g) / 2.0]


def _center_surround(channels, center_sigmas, surround_ratio):
    total = None
    for chan in channels:
        feat = np.zeros_like(chan)
        for s in center_sigmas:
            c = gaussian_filter(chan, s, mode="nearest")
            sur = gaussian_filter(chan, s * surround_ratio, mode="nearest")
            feat += np.abs(c - sur)
        peak = feat.max()
        if peak > 0:
            feat = feat / peak
        total = feat if total is None else total + feat
    return total


def center_surround(image, scale: int = 128, center_sigmas=(1.0, 2.0, 4.0),
                    surround_ratio: float = 4.0) -> np.ndarray:
    """Intensity and color-opponent center-surround contrast."""
    img = _as_array(image)
    small = _resize_long_side(img, scale)
    sal = _center_surround(_opponent_channels(small), center_sigmas, surround_ratio)
    return _upsample(sal, img.shape[:2])


def objectness(image, scale: int = 32, center_sigmas=(2.0, 3.0, 4.0),
               surround_ratio: float = 3.0, smooth: float = 1.0) -> np.ndarray:
    """Coarse blob/object-likeness: center-surround on a heavily downsampled image.

    Stands in for a learned high-level model when no exported maps are given.
    """
    img = _as_array(image)
    small = _resize_long_side(img, scale)
    chans = [c - c.mean() for c in _opponent_channels(small)]
    sal = _center_surround(chans, center_sigmas, surround_ratio)
    sal = gaussian_filter(sal, smooth, mode="nearest")
    return _upsample(sal, img.shape[:2])


BUILTIN = {
    "spectral_residual": spectral_residual,
    "center_surround": center_surround,
    "objectness": objectness,
}


def find_map_file(map_dir, image_id: str, fixation_index: int | None = None) -> Path:
    """Locate the map for ``image_id`` (relative path stem) under ``map_dir``.

    With ``fixation_index`` the per-fixation layout ``<map_dir>/<image_id>/<k>.<ext>``
    is searched first.
    """
    root = Path(map_dir)
    candidates = []
    if fixation_index is not None:
        candidates += [root / image_id / f"{fixation_index}{ext}" for ext in MAP_SUFFIXES]
    candidates += [root / f"{image_id}{ext}" for ext in MAP_SUFFIXES]
    found = [c for c in candidates if c.is_file()]
    if not found:
        raise FileNotFoundError(f"no saliency map for {image_id!r} under {root}")
    return found[0]


def load_external(spec: BackendSpec, image_id: str, shape, fixation_index: int | None = None) -> np.ndarray:
    if "map_dir" not in spec.params:
        raise ValueError("external backend needs a 'map_dir' parameter")
    if image_id is None:
        raise ValueError("external backend needs an image id")
    per_fix = fixation_index if spec.params.get("per_fixation") else None
    values = read_map(find_map_file(spec.params["map_dir"], image_id, per_fix))
    if values.shape != tuple(shape):
        if not spec.params.get("resize", False):
            raise ValueError(f"map for {image_id!r} has shape {values.shape}, expected {tuple(shape)}")
        values = _upsample(values, shape)
    return values


def compute_map(image, spec: BackendSpec, image_id: str | None = None,
                fixation_index: int | None = None) -> SaliencyMap:
    kind = _ALIASES.get(spec.kind, spec.kind)
    img = _as_array(image)
    if img.size == 0:
        raise ValueError("empty image")
    shape = img.shape[:2]
    if kind == "external":
        raw = load_external(spec, image_id, shape, fixation_index)
        return normalize(raw, f"external:{spec.params['map_dir']}")
    if kind not in BUILTIN:
        raise ValueError(f"unknown saliency backend {spec.kind!r}")
    if _is_constant(img):
        return SaliencyMap(np.full(shape, 0.5), kind)
    return normalize(BUILTIN[kind](img, **spec.params), kind)


def compute_peripheral(image, spec: BackendSpec | None = None, image_id=None, fixation_index=None) -> SaliencyMap:
    """Low-level conspicuity for the peripheral field."""
    return compute_map(image, spec or BackendSpec("spectral_residual"), image_id, fixation_index)


def compute_central(image, spec: BackendSpec | None = None, image_id=None, fixation_index=None) -> SaliencyMap:
    """High-level conspicuity for the central field."""
    return compute_map(image, spec or BackendSpec("objectness"), image_id, fixation_index)
