"""Fixation-control loop: fusion, inhibition of return and winner-take-all."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import FixationSequence
from .retina import AcuityParams, Foveator
from .saliency import BackendSpec, compute_central, compute_peripheral
from .viewgeom import ViewingGeometry, degrees_to_pixels

CENTRAL_FIELD_DEG = 12.5
IOR_RADIUS_DEG = 1.5
SAR_OVERLAP_DEG = 1.0
FUSIONS = ("SAR", "MCA", "WCA")


@dataclass(frozen=True)
class FusionStrategy:
    kind: str
    r_c: float
    overlap_width: float = 0.0
    g_p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.upper())
        if self.kind not in FUSIONS:
            raise ValueError(f"unknown fusion strategy {self.kind!r}")
        if self.r_c <= 0:
            raise ValueError("r_c must be positive")
        if self.overlap_width < 0:
            raise ValueError("overlap_width must be non-negative")
        if not 0.0 <= self.g_p <= 1.0:
            raise ValueError("g_p must lie in [0, 1]")

    @classmethod
    def for_geometry(cls, kind: str, g: ViewingGeometry, central_deg: float = CENTRAL_FIELD_DEG,
                     overlap_deg: float = SAR_OVERLAP_DEG, g_p: float = 0.0) -> "FusionStrategy":
        return cls(kind, degrees_to_pixels(g, central_deg), degrees_to_pixels(g, overlap_deg), g_p)


@dataclass
class FixationHistory:
    """Previously fixated points with their age in fixations (0 = newest)."""

    ior_radius: float
    decay_span: int = 100
    strength: float = 1.0
    entries: list = field(default_factory=list)

    @classmethod
    def for_geometry(cls, g: ViewingGeometry, radius_deg: float = IOR_RADIUS_DEG,
                     decay_span: int = 100, strength: float = 1.0) -> "FixationHistory":
        return cls(degrees_to_pixels(g, radius_deg), decay_span, strength)

    def fresh(self) -> "FixationHistory":
        return FixationHistory(self.ior_radius, self.decay_span, self.strength)

    def push(self, point) -> None:
        """Age every entry by one fixation and record ``point`` at age 0."""
        self.entries = [(p, a + 1) for p, a in self.entries if a + 1 < self.decay_span]
        self.entries.insert(0, ((float(point[0]), float(point[1])), 0))

    def suppression(self, shape) -> np.ndarray:
        h, w = shape
        out = np.zeros((h, w))
        if not self.entries or self.ior_radius <= 0:
            return out
        ys, xs = np.mgrid[0:h, 0:w]
        for (x, y), age in self.entries:
            time_w = max(0.0, 1.0 - age / self.decay_span)
            if time_w == 0.0:
                continue
            dist = np.hypot(xs - x, ys - y)
            out += self.strength * np.maximum(0.0, 1.0 - dist / self.ior_radius) * time_w
        return out


def _values(m):
    return np.asarray(getattr(m, "values", m), dtype=np.float64)


def radial_distance(shape, fixation) -> np.ndarray:
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w]
    dx, dy = xs - fixation[0], ys - fixation[1]
    return np.sqrt(dx * dx + dy * dy)


def fuse(C, P, fixation, s: FusionStrategy) -> np.ndarray:
    """Combine central map C and peripheral map P around ``fixation`` = (x, y)."""
    C, P = _values(C), _values(P)
    if C.shape != P.shape:
        raise ValueError(f"central {C.shape} and peripheral {P.shape} maps differ in shape")
    r = radial_distance(C.shape, fixation)
    if s.kind == "SAR":
        inner = s.r_c - s.overlap_width / 2.0
        outer = s.r_c + s.overlap_width / 2.0
        return np.where(r < inner, C, np.where(r > outer, P, np.maximum(C, P)))
    if s.kind == "MCA":
        return np.where(r < s.r_c, np.maximum(C, P), P)
    # WCA
    r_max = r.max()
    inside = (s.r_c - r) / s.r_c * C + r / s.r_c * P
    span = r_max - s.r_c
    ramp = (r - s.r_c) / span if span > 0 else np.zeros_like(r)
    outside = (1.0 + ramp) * (1.0 - s.g_p) * P
    return np.where(r < s.r_c, inside, outside)


def apply_ior(CM, h: FixationHistory) -> np.ndarray:
    """Priority map: conspicuity minus the fixation-history suppression."""
    CM = _values(CM)
    return CM - h.suppression(CM.shape)


def select_next(PM) -> tuple[int, int]:
    """(x, y) of the global maximum; ties go to the first pixel in row-major order."""
    PM = _values(PM)
    if PM.size == 0:
        raise ValueError("empty priority map")
    row, col = np.unravel_index(int(np.argmax(PM)), PM.shape)
    return int(col), int(row)


@dataclass
class EngineState:
    fixation: tuple[int, int]
    history: FixationHistory
    step: int = 0
    emitted: list = field(default_factory=list)


def run_sequence(image, g: ViewingGeometry, p: AcuityParams | None = None,
                 backends: tuple[BackendSpec, BackendSpec] | None = None,
                 s: FusionStrategy | None = None, n_fixations: int = 5,
                 history: FixationHistory | None = None, image_id: str | None = None,
                 include_initial: bool = True, num_levels: int | None = None,
                 foveator: Foveator | None = None) -> FixationSequence:
    """Generate a scanpath starting from the image center.

    ``backends`` is (peripheral, central). Each step foveates the image at
    the current fixation, recomputes both maps, fuses them, subtracts IOR and
    moves to the winner. Returns ``n_fixations`` points; with
    ``include_initial=False`` the center is dropped and ``n_fixations`` new
    fixations are returned instead.
    """
    if n_fixations < 1:
        raise ValueError("n_fixations must be >= 1")
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    if (g.image_width, g.image_height) != (w, h):
        g = g.with_size(w, h)
    peripheral, central = backends or (BackendSpec("spectral_residual"), BackendSpec("objectness"))
    s = s or FusionStrategy.for_geometry("WCA", g)
    history = history.fresh() if history is not None else FixationHistory.for_geometry(g)
    fov = foveator or Foveator(img, g, p, num_levels)

    state = EngineState(g.center, history)
    state.history.push(state.fixation)
    state.emitted.append(state.fixation)
    target = n_fixations if include_initial else n_fixations + 1
    while len(state.emitted) < target:
        retinal = fov.transform(state.fixation)
        P = compute_peripheral(retinal, peripheral, image_id, state.step)
        C = compute_central(retinal, central, image_id, state.step)
        CM = fuse(C, P, state.fixation, s)
        nxt = select_next(apply_ior(CM, state.history))
        state.history.push(nxt)
        state.fixation = nxt
        state.step += 1
        state.emitted.append(nxt)
    points = state.emitted if include_initial else state.emitted[1:]
    return FixationSequence(points, source=f"starfc_{s.kind.lower()}", image_id=image_id or "")


def sample_static_map(saliency, n_fixations: int, history: FixationHistory,
                      source: str = "static", image_id: str = "") -> FixationSequence:
    """Iterative WTA with IOR on a fixed map."""
    if n_fixations < 1:
        raise ValueError("n_fixations must be >= 1")
    m = _values(saliency)
    hist = history.fresh()
    points = []
    for _ in range(n_fixations):
        nxt = select_next(apply_ior(m, hist))
        hist.push(nxt)
        points.append(nxt)
    return FixationSequence(points, source=source, image_id=image_id)


def center_sequence(width: int, height: int, n_fixations: int, image_id: str = "") -> FixationSequence:
    """Baseline that fixates the central pixel every time."""
    c = ((width - 1) // 2, (height - 1) // 2)
    return FixationSequence([c] * n_fixations, source="center", image_id=image_id)
