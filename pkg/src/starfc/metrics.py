"""Trajectory metrics, score curves and fixation histograms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

METRICS = ("ED", "FD", "HD")
AUC_SPAN = 5


@dataclass
class FixationSequence:
    """Temporally ordered gaze points in pixel coordinates (x, y)."""

    points: np.ndarray
    source: str = ""
    image_id: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(pts) < 1:
            raise ValueError("a fixation sequence needs at least one point")
        self.points = pts

    def __len__(self):
        return len(self.points)

    def tolist(self):
        return [tuple(p) for p in self.points.tolist()]


def _points(seq) -> np.ndarray:
    if isinstance(seq, FixationSequence):
        return seq.points
    return np.asarray(seq, dtype=np.float64).reshape(-1, 2)


def _prefixes(a, b, k):
    A, B = _points(a), _points(b)
    if k < 1:
        raise ValueError(f"prefix length must be >= 1, got {k}")
    if k > len(A) or k > len(B):
        raise ValueError(f"prefix length {k} exceeds sequence lengths {len(A)}, {len(B)}")
    return A[:k], B[:k]


def _pairwise(A, B):
    return np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1))


def euclidean_distance(a, b, k: int) -> float:
    """Mean distance between temporally corresponding points of the k-prefixes."""
    A, B = _prefixes(a, b, k)
    return float(np.mean(np.hypot(*(A - B).T)))


def _frechet_table(d):
    n, m = d.shape
    ca = np.empty((n, m))
    ca[0, 0] = d[0, 0]
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        for j in range(1, m):
            ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), d[i, j])
    return ca


def frechet_distance(a, b, k: int) -> float:
    """Discrete Fréchet distance of the k-prefixes (Eiter & Mannila DP)."""
    A, B = _prefixes(a, b, k)
    return float(_frechet_table(_pairwise(A, B))[-1, -1])


def hausdorff_distance(a, b, k: int, directed: bool = False) -> float:
    """Hausdorff distance of the k-prefixes as point sets.

    Symmetric by default; ``directed=True`` gives max over a of min over b.
    """
    A, B = _prefixes(a, b, k)
    d = _pairwise(A, B)
    forward = d.min(axis=1).max()
    if directed:
        return float(forward)
    return float(max(forward, d.min(axis=0).max()))


METRIC_FUNCS = {
    "ED": euclidean_distance,
    "FD": frechet_distance,
    "HD": hausdorff_distance,
}


def trapezoid_auc(values, span: int = AUC_SPAN) -> float | None:
    """Trapezoid area over k = 1..span with unit spacing, None if the curve is shorter."""
    if len(values) < span:
        return None
    v = [float(x) for x in values[:span]]
    return math.fsum((v[i] + v[i + 1]) / 2.0 for i in range(span - 1))


@dataclass
class ScoreCurve:
    metric: str
    values: list = field(default_factory=list)

    @property
    def auc(self) -> float | None:
        return trapezoid_auc(self.values)


def _curve_values(a, b, metric, K):
    A, B = _prefixes(a, b, K)
    if metric == "ED":
        return list(np.cumsum(np.hypot(*(A - B).T)) / np.arange(1, K + 1))
    if metric == "FD":
        table = _frechet_table(_pairwise(A, B))
        return [float(table[k, k]) for k in range(K)]
    if metric == "HD":
        return [hausdorff_distance(A, B, k) for k in range(1, K + 1)]
    raise ValueError(f"unknown metric {metric!r}")


def score_curve(a, b, metric: str, K: int) -> ScoreCurve:
    """Metric on the k-prefixes for k = 1..K."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return ScoreCurve(metric, [float(v) for v in _curve_values(a, b, metric, K)])


def mean_curve(curves, metric: str) -> ScoreCurve:
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to average")
    K = min(len(c.values) for c in curves)
    return ScoreCurve(metric, [math.fsum(c.values[k] for c in curves) / len(curves) for k in range(K)])


def pairwise_human_baseline(sequences, metric: str, K: int) -> ScoreCurve:
    """Mean score curve over all unordered pairs of observers."""
    usable = [s for s in sequences if len(_points(s)) >= K]
    if len(usable) < 2:
        raise ValueError("need at least two observer sequences of sufficient length")
    return mean_curve((score_curve(a, b, metric, K) for a, b in combinations(usable, 2)), metric)


def model_vs_humans(model, humans, metric: str, K: int, mode: str = "mean") -> ScoreCurve:
    """Per-k mean (or min) of the model's score against every observer."""
    usable = [h for h in humans if len(_points(h)) >= K]
    if not usable:
        raise ValueError("no usable human sequences")
    curves = [score_curve(model, h, metric, K) for h in usable]
    if mode == "mean":
        return mean_curve(curves, metric)
    if mode == "min":
        return ScoreCurve(metric, [min(c.values[k] for c in curves) for k in range(K)])
    raise ValueError(f"unknown aggregation mode {mode!r}")


# --- histograms ---------------------------------------------------------------

@dataclass
class AmplitudeHistogram:
    bin_width: float
    counts: np.ndarray

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def edges(self) -> np.ndarray:
        return np.arange(len(self.counts) + 1) * self.bin_width


def saccade_amplitudes(sequences) -> np.ndarray:
    amps = [np.hypot(*np.diff(_points(s), axis=0).T) for s in sequences]
    return np.concatenate(amps) if amps else np.empty(0)


def amplitude_histogram(sequences, bin_width: float = 100.0, n_bins: int | None = None) -> AmplitudeHistogram:
    """Proportion of saccades per amplitude bin [i*w, (i+1)*w).

    With ``n_bins`` fixed, longer saccades land in the last bin.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    amps = saccade_amplitudes(sequences)
    if amps.size == 0:
        raise ValueError("no saccades: every sequence has a single fixation")
    idx = np.floor(amps / bin_width).astype(int)
    if n_bins is None:
        n_bins = int(idx.max()) + 1
    idx = np.minimum(idx, n_bins - 1)
    return AmplitudeHistogram(float(bin_width), np.bincount(idx, minlength=n_bins).astype(float))


@dataclass
class SpatialHistogram:
    counts: np.ndarray  # rows x cols
    block: int = 64

    @property
    def bins(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else self.counts.copy()


def spatial_histogram(sequences, width: int, height: int, block: int = 64) -> SpatialHistogram:
    """Fixation counts over block x block pixel cells; edge remainders are full bins."""
    rows, cols = math.ceil(height / block), math.ceil(width / block)
    counts = np.zeros((rows, cols))
    for s in sequences:
        pts = _points(s)
        if np.any(pts < 0) or np.any(pts[:, 0] >= width) or np.any(pts[:, 1] >= height):
            raise ValueError("fixation outside histogram bounds")
        np.add.at(counts, ((pts[:, 1] // block).astype(int), (pts[:, 0] // block).astype(int)), 1)
    return SpatialHistogram(counts, block)


def _proportions(h):
    if isinstance(h, SpatialHistogram):
        return h.bins
    h = np.asarray(h, dtype=np.float64)
    total = h.sum()
    return h / total if total else h


def spatial_histogram_mse(model, human) -> float:
    """Mean squared difference between the two proportion grids."""
    a, b = _proportions(model), _proportions(human)
    if a.shape != b.shape:
        raise ValueError(f"histogram shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))
