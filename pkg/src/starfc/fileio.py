"""Readers and writers for images, maps and fixation-sequence CSVs."""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import cv2
import numpy as np

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")
MAP_SUFFIXES = (".png", ".txt")


class SequenceFormatError(ValueError):
    pass


def read_image(path) -> np.ndarray:
    """Read a raster image as float64 RGB (H x W x 3) or gray (H x W), 0..255."""
    arr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise FileNotFoundError(f"cannot read image {path}")
    if arr.dtype == np.uint16:
        arr = arr / 257.0
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[..., :3]
        arr = arr[..., ::-1]  # BGR -> RGB
    return np.ascontiguousarray(arr, dtype=np.float64)


def write_image(path, image) -> None:
    img = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
    if img.ndim == 3:
        img = img[..., ::-1]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), img):
        raise OSError(f"cannot write image {path}")


def read_map(path) -> np.ndarray:
    """Read a saliency map: grayscale PNG (8/16 bit) or a text matrix.

    Text matrices start with a ``rows cols`` line followed by row-major values.
    """
    path = Path(path)
    if path.suffix.lower() == ".txt":
        tokens = path.read_text().split()
        if len(tokens) < 2:
            raise ValueError(f"{path}: missing 'rows cols' header")
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(t) for t in tokens[2:]], dtype=np.float64)
        if values.size != rows * cols:
            raise ValueError(f"{path}: expected {rows * cols} values, found {values.size}")
        return values.reshape(rows, cols)
    arr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise FileNotFoundError(f"cannot read map {path}")
    if arr.ndim == 3:
        arr = arr[..., :3].mean(axis=2)
    return arr.astype(np.float64)


def write_map_txt(path, values) -> None:
    values = np.asarray(values, dtype=np.float64)
    rows, cols = values.shape
    lines = [f"{rows} {cols}"]
    lines += [" ".join(f"{v:.6g}" for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_sequence_csv(path):
    """Parse an ``observer,index,x,y`` file into {observer: [(x, y), ...]}.

    Rows are ordered by ``index`` within each observer; observers keep
    first-appearance order.
    """
    path = Path(path)
    groups: dict[str, list[tuple[int, float, float]]] = defaultdict(list)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SequenceFormatError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != ["observer", "index", "x", "y"]:
            raise SequenceFormatError(f"{path}:1: expected header observer,index,x,y, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise SequenceFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                groups[row[0].strip()].append((int(row[1]), float(row[2]), float(row[3])))
            except ValueError as exc:
                raise SequenceFormatError(f"{path}:{lineno}: {exc}") from None
    if not groups:
        raise SequenceFormatError(f"{path}: no fixation rows")
    out = {}
    for obs, rows in groups.items():
        rows.sort(key=lambda r: r[0])
        out[obs] = [(x, y) for _, x, y in rows]
    return out


def write_sequence_csv(path, sequences) -> None:
    """Write ``{observer: points}`` (or a list of FixationSequence) as CSV."""
    if not isinstance(sequences, dict):
        sequences = {s.source: s.points for s in sequences}
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["observer", "index", "x", "y"])
        for obs, pts in sequences.items():
            for i, (x, y) in enumerate(pts):
                w.writerow([obs, i, fmt(x), fmt(y)])


def fmt(v) -> str:
    """Six significant digits, the precision of every emitted number."""
    return f"{float(v):.6g}"
