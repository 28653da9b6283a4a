"""Dataset ingestion, grooming, batch runs and report emission.

Dataset layout::

    <root>/<category>/<name>.<png|jpg|...>     stimulus
    <root>/<category>/<name>.csv               observer sequences (observer,index,x,y)
    <root>/<category>/<name>/*.csv             ...or one file per observer

``fixation_dir`` may hold the CSVs in a parallel tree instead of ``root``.
"""
from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from . import metrics as M
from .config import RunConfig
from .engine import center_sequence, run_sequence, sample_static_map
from .fileio import (IMAGE_SUFFIXES, SequenceFormatError, fmt, read_image, read_map,
                     read_sequence_csv, write_sequence_csv)
from .metrics import FixationSequence
from .retina import Foveator
from .saliency import BackendSpec, compute_map, find_map_file, normalize

log = logging.getLogger(__name__)

HUMAN = "human"
TABLE_COLUMNS = ("AUC ED", "AUC HD", "AUC FD", "MSE")


# --- sequences --------------------------------------------------------------

def load_sequences(path, image_id: str | None = None) -> list[FixationSequence]:
    """Load one CSV, or every CSV in a directory (sorted by name).

    The image label defaults to the file stem (the directory name for a
    directory); sources are observer labels, prefixed by the file stem when
    several files share an observer label.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise SequenceFormatError(f"{path}: no CSV files")
        label = image_id or path.name
    else:
        files = [path]
        label = image_id or path.stem
    out: list[FixationSequence] = []
    seen: set[str] = set()
    for f in files:
        for obs, pts in read_sequence_csv(f).items():
            source = obs if obs not in seen else f"{f.stem}:{obs}"
            seen.add(source)
            out.append(FixationSequence(pts, source=source, image_id=label))
    return out


@dataclass
class GroomingStats:
    total: int = 0
    kept: int = 0
    truncated: int = 0
    discarded: int = 0
    errors: list = field(default_factory=list)

    def merge(self, other: "GroomingStats") -> None:
        self.total += other.total
        self.kept += other.kept
        self.truncated += other.truncated
        self.discarded += other.discarded
        self.errors += other.errors

    def to_dict(self) -> dict:
        return {"total": self.total, "kept": self.kept, "truncated": self.truncated,
                "discarded": self.discarded, "errors": list(self.errors)}


def groom_sequences(raw, width: int, height: int, min_len: int = 10):
    """Cut each sequence at its first out-of-bounds fixation; drop short leftovers.

    Returns (kept sequences, GroomingStats).
    """
    stats = GroomingStats()
    kept = []
    for seq in raw:
        stats.total += 1
        pts = seq.points
        ok = (np.isfinite(pts).all(axis=1) & (pts[:, 0] >= 0) & (pts[:, 0] < width)
              & (pts[:, 1] >= 0) & (pts[:, 1] < height))
        n = len(pts) if ok.all() else int(np.argmin(ok))
        if n < len(pts):
            stats.truncated += 1
        if n < min_len or n == 0:
            stats.discarded += 1
            continue
        stats.kept += 1
        kept.append(FixationSequence(pts[:n], seq.source, seq.image_id))
    return kept, stats


# --- dataset ----------------------------------------------------------------

@dataclass
class ImageEntry:
    image_id: str
    category: str
    image_path: Path
    sequence_path: Path | None


@dataclass
class Dataset:
    root: Path
    images: list

    @property
    def categories(self) -> list:
        return sorted({e.category for e in self.images})


def load_dataset(root, fixation_dir=None) -> Dataset:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    fix_root = Path(fixation_dir) if fixation_dir else root
    entries = []
    for cat_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for img in sorted(p for p in cat_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES):
            image_id = f"{cat_dir.name}/{img.stem}"
            seq = None
            for cand in (fix_root / cat_dir.name / f"{img.stem}.csv", fix_root / cat_dir.name / img.stem):
                if cand.exists():
                    seq = cand
                    break
            entries.append(ImageEntry(image_id, cat_dir.name, img, seq))
    return Dataset(root, entries)


# --- per-image work ---------------------------------------------------------

def _baseline_map(cfg: RunConfig, name: str, image, image_id: str):
    source = str(cfg.baselines[name])
    if source.startswith("builtin:"):
        return compute_map(image, BackendSpec(source.split(":", 1)[1]))
    values = read_map(find_map_file(source, image_id))
    if values.shape != image.shape[:2]:
        values = cv2.resize(values, (image.shape[1], image.shape[0]), interpolation=cv2.INTER_LINEAR)
    return normalize(values, name)


def generate_model_sequence(cfg: RunConfig, model: str, image, image_id: str, n: int,
                            foveator=None) -> FixationSequence:
    """Produce ``n`` fixations for ``model`` on one image (fixation 0 included)."""
    h, w = image.shape[:2]
    g = cfg.geometry(w, h)
    if model == "center":
        return center_sequence(w, h, n, image_id)
    if model == "starfc" or model.startswith("starfc_"):
        kind = model.split("_", 1)[1] if "_" in model else cfg.fusion
        seq = run_sequence(image, g, cfg.acuity_params(), (cfg.peripheral, cfg.central),
                           cfg.fusion_strategy(g, kind), n, cfg.history(g), image_id,
                           num_levels=cfg.num_levels, foveator=foveator)
        seq.source = model
        return seq
    if model in cfg.baselines:
        sal = _baseline_map(cfg, model, image, image_id)
        if cfg.baseline_prepend_center:
            rest = sample_static_map(sal, n - 1, cfg.history(g)).points if n > 1 else np.empty((0, 2))
            pts = np.vstack([[g.center], rest])
        else:
            pts = sample_static_map(sal, n, cfg.history(g)).points
        return FixationSequence(pts, source=model, image_id=image_id)
    raise ValueError(f"unknown model {model!r}")


@dataclass
class ImageResult:
    image_id: str
    category: str
    width: int
    height: int
    status: str  # "ok" | "skipped"
    reason: str = ""
    grooming: GroomingStats = field(default_factory=GroomingStats)
    humans: list = field(default_factory=list)
    sequences: dict = field(default_factory=dict)  # model -> FixationSequence
    curves: dict = field(default_factory=dict)  # (model, metric) -> values
    full_curves: dict = field(default_factory=dict)


def _score_length(cfg: RunConfig) -> int:
    return cfg.n_fixations


def process_image(entry: ImageEntry, cfg: RunConfig) -> ImageResult:
    image = read_image(entry.image_path)
    h, w = image.shape[:2]
    res = ImageResult(entry.image_id, entry.category, w, h, "ok")
    if entry.sequence_path is None:
        res.status, res.reason = "skipped", "no human sequences"
        return res
    try:
        raw = load_sequences(entry.sequence_path, entry.image_id)
    except (SequenceFormatError, ValueError) as exc:
        res.status, res.reason = "skipped", str(exc)
        res.grooming.errors.append(str(exc))
        return res
    humans, res.grooming = groom_sequences(raw, w, h, cfg.min_len)
    off = 1 if cfg.drop_first else 0
    K = _score_length(cfg)
    humans = [FixationSequence(s.points[off:], s.source, s.image_id) for s in humans]
    humans = [s for s in humans if len(s) >= K]
    if not humans:
        res.status, res.reason = "skipped", "no usable human sequences after grooming"
        return res
    res.humans = humans

    full_n = max(cfg.full_length, K) if cfg.full_curves else K
    foveator = None
    if any(m == "starfc" or m.startswith("starfc_") for m in cfg.models):
        foveator = Foveator(image, cfg.geometry(w, h), cfg.acuity_params(), cfg.num_levels)
    for model in cfg.models:
        seq = generate_model_sequence(cfg, model, image, entry.image_id, full_n + off, foveator)
        seq = FixationSequence(seq.points[off:], seq.source, seq.image_id)
        res.sequences[model] = seq
        for metric in M.METRICS:
            short = FixationSequence(seq.points[:K], seq.source, seq.image_id)
            res.curves[(model, metric)] = M.model_vs_humans(short, humans, metric, K, cfg.aggregate).values
            if cfg.full_curves:
                Kf = min(len(seq), min(len(s) for s in humans))
                res.full_curves[(model, metric)] = M.model_vs_humans(seq, humans, metric, Kf, cfg.aggregate).values
    if len(humans) >= 2:
        for metric in M.METRICS:
            res.curves[(HUMAN, metric)] = M.pairwise_human_baseline(humans, metric, K).values
            if cfg.full_curves:
                Kf = min(full_n, min(len(s) for s in humans))
                res.full_curves[(HUMAN, metric)] = M.pairwise_human_baseline(humans, metric, Kf).values
    return res


def _process(args):
    entry, cfg = args
    return process_image(entry, cfg)


def process_dataset(dataset: Dataset, cfg: RunConfig) -> list[ImageResult]:
    """Per-image work, optionally in worker processes; results keep dataset order."""
    work = [(e, cfg) for e in dataset.images]
    if cfg.workers <= 1 or len(work) <= 1:
        return [_process(w) for w in work]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_process, work))


# --- aggregation ------------------------------------------------------------

def _mean_curves(curve_lists):
    """Element-wise exact mean of equal-length curves."""
    K = min(len(c) for c in curve_lists)
    return [math.fsum(c[k] for c in curve_lists) / len(curve_lists) for k in range(K)]


def aggregate_curves(results, key_attr: str = "curves"):
    """Mean curves per (model, metric): globally and per category.

    Order is fixed: observers/pairs -> image (already in each result) ->
    category and global means over images.
    """
    by_key = defaultdict(list)
    by_cat = defaultdict(lambda: defaultdict(list))
    for r in results:
        if r.status != "ok":
            continue
        for key, values in getattr(r, key_attr).items():
            by_key[key].append(values)
            by_cat[r.category][key].append(values)
    global_ = {k: _mean_curves(v) for k, v in by_key.items()}
    per_cat = {c: {k: _mean_curves(v) for k, v in d.items()} for c, d in by_cat.items()}
    counts = {c: {k: len(v) for k, v in d.items()} for c, d in by_cat.items()}
    return global_, per_cat, counts


def reweighted_global(per_cat: dict, counts: dict, key) -> list:
    """Recombine category means into the global mean, weighting by image count."""
    cats = [c for c in per_cat if key in per_cat[c]]
    total = sum(counts[c][key] for c in cats)
    K = min(len(per_cat[c][key]) for c in cats)
    return [math.fsum(per_cat[c][key][k] * counts[c][key] for c in cats) / total for k in range(K)]


def histograms(results, cfg: RunConfig, models):
    """Amplitude and spatial histograms per model, plus the human reference."""
    ok = [r for r in results if r.status == "ok"]
    w = max(r.width for r in ok)
    h = max(r.height for r in ok)
    K = _score_length(cfg)
    pools = {m: [FixationSequence(r.sequences[m].points[:K]) for r in ok] for m in models}
    pools[HUMAN] = [FixationSequence(s.points[:K]) for r in ok for s in r.humans]
    spatial = {m: M.spatial_histogram(seqs, w, h, cfg.spatial_block) for m, seqs in pools.items()}
    longest = max(float(M.saccade_amplitudes(seqs).max(initial=0.0)) for seqs in pools.values())
    n_bins = int(longest // cfg.amplitude_bin_width) + 1
    amplitude = {}
    for m, seqs in pools.items():
        try:
            amplitude[m] = M.amplitude_histogram(seqs, cfg.amplitude_bin_width, n_bins)
        except ValueError:
            amplitude[m] = None
    return amplitude, spatial


def _table_row(curves: dict, model: str, mse: float | None):
    row = {}
    for metric in ("ED", "HD", "FD"):
        auc = M.trapezoid_auc(curves[(model, metric)]) if (model, metric) in curves else None
        row[f"AUC {metric}"] = auc
    row["MSE"] = mse
    return row


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


def _dump_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_round(obj), indent=2, sort_keys=False) + "\n")


def _write_curves(path: Path, curves: dict, per_cat: dict | None = None) -> None:
    path.mkdir(parents=True, exist_ok=True)
    for metric in M.METRICS:
        lines = ["model,category,k,value"]
        for (model, met), values in curves.items():
            if met == metric:
                lines += [f"{model},ALL,{k + 1},{fmt(v)}" for k, v in enumerate(values)]
        for cat, d in (per_cat or {}).items():
            for (model, met), values in d.items():
                if met == metric:
                    lines += [f"{model},{cat},{k + 1},{fmt(v)}" for k, v in enumerate(values)]
        (path / f"{metric}.csv").write_text("\n".join(lines) + "\n")


def write_report(results, cfg: RunConfig, out_dir) -> dict:
    """Emit every report file and return the summary dictionary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ok = [r for r in results if r.status == "ok"]
    skipped = [r for r in results if r.status != "ok"]
    for r in skipped:
        log.warning("skipped %s: %s", r.image_id, r.reason)

    grooming = GroomingStats()
    for r in results:
        grooming.merge(r.grooming)
    _dump_json(out / "grooming_stats.json", grooming.to_dict())

    for r in ok:
        write_sequence_csv(out / "sequences" / f"{r.image_id}.csv", list(r.sequences.values()))

    summary = {"total": len(results), "processed": len(ok), "skipped": len(skipped),
               "skipped_images": {r.image_id: r.reason for r in skipped}}
    if not ok:
        _dump_json(out / "summary.json", summary)
        return summary

    curves, per_cat, counts = aggregate_curves(ok)
    models = list(cfg.models)
    amplitude, spatial = histograms(ok, cfg, models)
    table = {}
    if any(k[0] == HUMAN for k in curves):
        table[HUMAN] = _table_row(curves, HUMAN, 0.0)
    for m in models:
        table[m] = _table_row(curves, m, M.spatial_histogram_mse(spatial[m], spatial[HUMAN]))
    categories = {c: {m: _table_row(d, m, None) for m in [HUMAN] + models if (m, "ED") in d}
                  for c, d in sorted(per_cat.items())}
    for c in categories:
        for row in categories[c].values():
            row.pop("MSE")
    image_counts = {c: sum(1 for r in ok if r.category == c) for c in sorted(per_cat)}
    summary.update({"table": table, "categories": categories, "category_counts": image_counts,
                    "n_fixations": cfg.n_fixations})
    _dump_json(out / "summary.json", summary)

    _write_curves(out / "curves", curves, per_cat)
    if cfg.full_curves:
        full, full_cat, _ = aggregate_curves(ok, "full_curves")
        _write_curves(out / "curves_full", full, full_cat)

    hist = out / "hist"
    hist.mkdir(exist_ok=True)
    lines = ["model,bin_start,bin_end,proportion"]
    for m, ah in amplitude.items():
        if ah is None:
            continue
        for i, p in enumerate(ah.proportions):
            lines.append(f"{m},{fmt(ah.edges[i])},{fmt(ah.edges[i + 1])},{fmt(p)}")
    (hist / "amplitude.csv").write_text("\n".join(lines) + "\n")
    lines = ["model,row,col,proportion"]
    for m, sh in spatial.items():
        bins = sh.bins
        for (i, j), p in np.ndenumerate(bins):
            lines.append(f"{m},{i},{j},{fmt(p)}")
    (hist / "spatial.csv").write_text("\n".join(lines) + "\n")

    raw = {r.image_id: {"category": r.category,
                        "curves": {f"{m}/{met}": v for (m, met), v in r.curves.items()},
                        "auc": {f"{m}/{met}": M.trapezoid_auc(v) for (m, met), v in r.curves.items()}}
           for r in ok}
    _dump_json(out / "scores.json", raw)
    return summary


def run_experiment(cfg: RunConfig, out_dir=None) -> dict:
    """Generate, score and report every model on the configured dataset."""
    cfg.validate()
    if cfg.dataset_root is None:
        raise ValueError("dataset_root is required")
    dataset = load_dataset(cfg.dataset_root, cfg.fixation_dir)
    results = process_dataset(dataset, cfg)
    return write_report(results, cfg, out_dir or cfg.out_dir)
