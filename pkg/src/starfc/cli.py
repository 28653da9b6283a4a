"""``starfc`` command line: transform | run | sample-map | score | report."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import metrics as M
from .config import RunConfig, load_config
from .engine import center_sequence, sample_static_map
from .fileio import IMAGE_SUFFIXES, MAP_SUFFIXES, fmt, read_image, read_map, write_image, write_sequence_csv
from .harness import _dump_json, generate_model_sequence, load_sequences, run_experiment
from .retina import apply_transform
from .saliency import normalize


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    for attr, key in (("fusion", "fusion"), ("gp", "g_p"), ("n_fix", "n_fixations"),
                      ("dataset_root", "dataset_root"), ("out_dir", "out_dir"), ("workers", "workers")):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, key, value.upper() if attr == "fusion" else value)
    if getattr(args, "full_curves", False):
        cfg.full_curves = True
    return cfg


def _point(text):
    x, y = text.split(",")
    return float(x), float(y)


def cmd_transform(args):
    cfg = _config(args)
    image = read_image(args.image)
    h, w = image.shape[:2]
    g = cfg.geometry(w, h)
    fix = _point(args.fix) if args.fix else g.center
    out = apply_transform(image, fix, g, cfg.acuity_params(), cfg.num_levels)
    write_image(args.out, out.image)
    if args.levels_out:
        write_image(args.levels_out, out.cone_levels / max(out.num_levels - 1, 1) * 255.0)
    return 0


def _images(args):
    if args.image:
        return [(Path(args.image).stem, Path(args.image))]
    root = Path(args.image_dir)
    files = sorted(p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES)
    return [(str(p.relative_to(root).with_suffix("")), p) for p in files]


def cmd_run(args):
    cfg = _config(args)
    model = f"starfc_{cfg.fusion.lower()}"
    outputs = {}
    for image_id, path in _images(args):
        image = read_image(path)
        outputs[image_id] = generate_model_sequence(cfg, model, image, image_id, cfg.n_fixations)
    _write_outputs(args, outputs)
    return 0


def _write_outputs(args, outputs):
    if len(outputs) == 1 and not getattr(args, "image_dir", None) and not getattr(args, "map_dir", None):
        write_sequence_csv(args.out, list(outputs.values()))
    else:
        for image_id, seq in outputs.items():
            write_sequence_csv(Path(args.out) / f"{image_id}.csv", [seq])


def cmd_sample_map(args):
    cfg = _config(args)
    outputs = {}
    if args.center:
        if not (args.width and args.height):
            raise SystemExit("--center needs --width and --height")
        outputs["center"] = center_sequence(args.width, args.height, cfg.n_fixations, "center")
    else:
        if args.map:
            maps = [(Path(args.map).stem, Path(args.map))]
        else:
            root = Path(args.map_dir)
            maps = [(str(p.relative_to(root).with_suffix("")), p)
                    for p in sorted(root.rglob("*")) if p.suffix.lower() in MAP_SUFFIXES]
        for image_id, path in maps:
            sal = normalize(read_map(path))
            h, w = sal.shape
            g = cfg.geometry(w, h)
            outputs[image_id] = sample_static_map(sal, cfg.n_fixations, cfg.history(g), args.label, image_id)
    _write_outputs(args, outputs)
    return 0


def _sequence_sets(path):
    """{image_id: [FixationSequence]} from a CSV file or a tree of CSV files."""
    path = Path(path)
    if path.is_file():
        return {path.stem: load_sequences(path)}
    out = {}
    for f in sorted(path.rglob("*.csv")):
        image_id = str(f.relative_to(path).with_suffix(""))
        out[image_id] = load_sequences(f, image_id)
    return out


def cmd_score(args):
    models = _sequence_sets(args.model)
    humans = _sequence_sets(args.human)
    if Path(args.model).is_file() and Path(args.human).is_file():
        humans = {next(iter(models)): next(iter(humans.values()))}
    elif Path(args.model).is_file() and Path(args.human).is_dir():
        humans = {next(iter(models)): [s for seqs in humans.values() for s in seqs]}
    K = args.n_fix
    report = {"images": {}, "table": {}}
    pooled = {}
    for image_id, seqs in models.items():
        if image_id not in humans:
            logging.warning("no human sequences for %s", image_id)
            continue
        hs = humans[image_id]
        entry = {}
        for seq in seqs:
            curves = {m: M.model_vs_humans(seq, hs, m, K, args.mode).values for m in M.METRICS}
            entry[seq.source] = {"curves": curves, "auc": {m: M.trapezoid_auc(v) for m, v in curves.items()}}
            pooled.setdefault(seq.source, []).append(curves)
        report["images"][image_id] = entry
    for source, curve_list in pooled.items():
        report["table"][source] = {
            f"AUC {m}": M.trapezoid_auc(list(np.mean([c[m] for c in curve_list], axis=0)))
            for m in ("ED", "HD", "FD")}
    all_models = [s for seqs in models.values() for s in seqs]
    all_humans = [s for seqs in humans.values() for s in seqs]
    try:
        report["amplitude_histogram"] = {
            "model": M.amplitude_histogram(all_models, args.bin_width).proportions.tolist(),
            "human": M.amplitude_histogram(all_humans, args.bin_width).proportions.tolist(),
            "bin_width": args.bin_width}
    except ValueError as exc:
        report["amplitude_histogram"] = {"error": str(exc)}
    if args.width and args.height:
        sm = M.spatial_histogram([M.FixationSequence(s.points[:K]) for s in all_models], args.width, args.height)
        sh = M.spatial_histogram([M.FixationSequence(s.points[:K]) for s in all_humans], args.width, args.height)
        report["spatial_histogram"] = {"model": sm.bins.tolist(), "human": sh.bins.tolist(),
                                       "mse": M.spatial_histogram_mse(sm, sh)}
    if args.out:
        _dump_json(Path(args.out), report)
    else:
        print(json.dumps(report["table"], indent=2))
    return 0


def cmd_report(args):
    cfg = _config(args)
    summary = run_experiment(cfg, cfg.out_dir)
    for model, row in summary.get("table", {}).items():
        cells = "  ".join(f"{k}={fmt(v) if v is not None else '-'}" for k, v in row.items())
        print(f"{model:>16}  {cells}")
    print(f"processed {summary['processed']} / {summary['total']} images, skipped {summary['skipped']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="starfc", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="foveate one image")
    p.add_argument("--image", required=True)
    p.add_argument("--fix", help="fixation as x,y (default: image center)")
    p.add_argument("--out", required=True)
    p.add_argument("--levels-out", help="optional PNG of the cone level field")
    p.add_argument("--config")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("run", help="generate fixation sequences")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image")
    src.add_argument("--image-dir")
    p.add_argument("--fusion", choices=["sar", "mca", "wca"])
    p.add_argument("--gp", type=float)
    p.add_argument("--n-fix", type=int)
    p.add_argument("--out", required=True, help="CSV file (single image) or directory")
    p.add_argument("--config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sample-map", help="WTA + IOR sequences from static maps")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--map")
    src.add_argument("--map-dir")
    src.add_argument("--center", action="store_true", help="center baseline")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--label", default="static")
    p.add_argument("--n-fix", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_sample_map)

    p = sub.add_parser("score", help="score model sequences against human sequences")
    p.add_argument("--model", required=True, help="CSV file or directory of CSVs")
    p.add_argument("--human", required=True, help="CSV file or directory of CSVs")
    p.add_argument("--n-fix", type=int, default=5)
    p.add_argument("--mode", choices=["mean", "min"], default="mean")
    p.add_argument("--bin-width", type=float, default=100.0)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="full experiment over a dataset")
    p.add_argument("--config")
    p.add_argument("--dataset-root")
    p.add_argument("--out-dir")
    p.add_argument("--full-curves", action="store_true")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
