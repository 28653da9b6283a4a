"""Synthetic stimuli and observer data for tests and demos."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .fileio import write_image, write_sequence_csv


def blob_image(width, height, blobs, background=110.0, rng=None, noise=4.0, contrasts=None):
    """Gray RGB image with Gaussian blobs at ``blobs`` = [(x, y, radius), ...].

    ``contrasts`` (one per blob, in gray levels) defaults to random colors.
    """
    rng = rng or np.random.default_rng(0)
    ys, xs = np.mgrid[0:height, 0:width]
    img = np.full((height, width, 3), background, dtype=np.float64)
    for i, (x, y, r) in enumerate(blobs):
        if contrasts is None:
            color = rng.uniform(0, 255, 3)
        else:
            color = np.clip(background + contrasts[i] * np.array([1.0, 0.6, -0.4]), 0, 255)
        wgt = np.exp(-((xs - x) ** 2 + (ys - y) ** 2) / (2.0 * r * r))[..., None]
        img = img * (1 - wgt) + color * wgt
    img += rng.normal(0, noise, img.shape)
    return np.clip(img, 0, 255)


def dispersed_sequences(blobs, width, height, n_observers, length, rng, jitter=6.0, swap=0.3):
    """Observers start at the center, then tour the blobs.

    Blobs are listed most conspicuous first; each observer follows that order
    with random adjacent swaps (probability ``swap``), cycling when done.
    """
    center = ((width - 1) // 2, (height - 1) // 2)
    seqs = {}
    for o in range(n_observers):
        pts = [center]
        order = list(range(len(blobs)))
        for i in range(len(order) - 1):
            if rng.random() < swap:
                order[i], order[i + 1] = order[i + 1], order[i]
        for i in range(length - 1):
            bx, by, _ = blobs[order[i % len(blobs)]]
            x = float(np.clip(bx + rng.normal(0, jitter), 0, width - 1))
            y = float(np.clip(by + rng.normal(0, jitter), 0, height - 1))
            pts.append((round(x, 1), round(y, 1)))
        seqs[f"obs{o}"] = pts
    return seqs


def make_corpus(root, n_images: int = 20, n_categories: int = 4, width: int = 256, height: int = 192,
                n_observers: int = 4, length: int = 12, seed: int = 0, out_of_bounds: bool = True,
                blob_sigma=(3.0, 5.0)):
    """Write a small CAT2000-shaped dataset under ``root`` and return its path.

    Blobs cluster in an off-center region, so human fixations are dispersed
    from the center yet mutually consistent. When
    ``out_of_bounds`` is set, one observer per image leaves the screen late
    in the sequence (truncated, kept) and every fourth image gets an
    observer who leaves early (discarded).
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    for i in range(n_images):
        cat = f"cat{i % n_categories}"
        n_blobs = int(rng.integers(3, 6))
        # content sits in one off-center region: observers agree with each
        # other while staying away from the center
        angle = rng.uniform(0, 2 * np.pi)
        cx = width / 2 + 0.28 * width * np.cos(angle)
        cy = height / 2 + 0.28 * height * np.sin(angle)
        blobs = []
        while len(blobs) < n_blobs:
            x = float(np.clip(cx + rng.uniform(-0.16, 0.16) * width, 0.05 * width, 0.95 * width))
            y = float(np.clip(cy + rng.uniform(-0.16, 0.16) * height, 0.05 * height, 0.95 * height))
            if np.hypot(x - width / 2, y - height / 2) < 0.2 * min(width, height):
                continue
            if any(np.hypot(x - bx, y - by) < 0.06 * width for bx, by, _ in blobs):
                continue
            blobs.append((x, y, float(rng.uniform(blob_sigma[0], blob_sigma[1]))))
        contrasts = np.sort(rng.uniform(40, 140, n_blobs))[::-1]
        img = blob_image(width, height, blobs, rng=rng, contrasts=contrasts)
        stem = f"{i:03d}"
        write_image(root / cat / f"{stem}.png", img)
        seqs = dispersed_sequences(blobs, width, height, n_observers, length, rng)
        if out_of_bounds:
            seqs["obs_late"] = seqs["obs0"][:11] + [(float(width + 5), 10.0)] + seqs["obs0"][11:]
            if i % 4 == 0:
                seqs["obs_early"] = seqs["obs1"][:4] + [(-3.0, 5.0)] + seqs["obs1"][4:]
        write_sequence_csv(root / cat / f"{stem}.csv", seqs)
    return root
