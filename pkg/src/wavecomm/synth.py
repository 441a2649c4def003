"""Seeded synthetic datasets with planted community structure.

Each template is a superposition of oriented cosine waves confined to its
own spatial-frequency ring, so different templates are nearly orthogonal
as images while variants of one template stay tightly correlated.  Dataset
images are templates plus Gaussian pixel noise with sigma = 5% of the
dynamic range, quantized to 8 bits like a decoded PNG.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import ManifestEntry, write_manifest_csv

DYNAMIC_RANGE = 255.0
NOISE_FRACTION = 0.05
TEMPLATE_LOW, TEMPLATE_HIGH = 20.0, 235.0
BASE_RING = 2.0  # cycles per image for the first template
RING_STEP = 1.5
WAVES_PER_TEMPLATE = 6


def _ring_template(shape, rng, ring_radius: float) -> np.ndarray:
    h, w = shape
    yy, xx = np.meshgrid(np.arange(h) / h, np.arange(w) / w, indexing="ij")
    field = np.zeros(shape)
    for _ in range(WAVES_PER_TEMPLATE):
        theta = rng.uniform(0, 2 * np.pi)
        radius = ring_radius + rng.uniform(-0.4, 0.4)
        fu, fv = radius * np.cos(theta), radius * np.sin(theta)
        phase = rng.uniform(0, 2 * np.pi)
        field += rng.uniform(0.5, 1.0) * np.cos(2 * np.pi * (fu * yy + fv * xx) + phase)
    lo, hi = field.min(), field.max()
    span = hi - lo if hi > lo else 1.0
    return TEMPLATE_LOW + (field - lo) / span * (TEMPLATE_HIGH - TEMPLATE_LOW)


def make_templates(n_templates: int, shape=(64, 64), seed: int = 0) -> list[np.ndarray]:
    """Templates on disjoint frequency rings: mutually near-orthogonal."""
    rng = np.random.default_rng(seed)
    return [
        _ring_template(shape, rng, BASE_RING + RING_STEP * i) for i in range(n_templates)
    ]


def noisy_variant(template: np.ndarray, rng) -> np.ndarray:
    noisy = template + rng.normal(0.0, NOISE_FRACTION * DYNAMIC_RANGE, template.shape)
    # quantize like an 8-bit PNG so in-memory and on-disk datasets agree
    return np.clip(np.rint(noisy), 0, 255).astype(np.float64)


def planted_dataset(
    n_templates: int = 3,
    per_template: int = 15,
    shape=(64, 64),
    seed: int = 0,
):
    """In-memory planted dataset: (ids, images, planted labels)."""
    rng = np.random.default_rng(seed + 1)
    templates = make_templates(n_templates, shape, seed)
    ids, images, labels = [], [], []
    for t, template in enumerate(templates):
        for i in range(per_template):
            ids.append(f"t{t}_{i:02d}.png")
            images.append(noisy_variant(template, rng))
            labels.append(f"t{t}")
    return ids, images, labels


def write_planted_dataset(
    out_dir: str | Path,
    n_templates: int = 3,
    per_template: int = 15,
    shape=(64, 64),
    seed: int = 0,
) -> Path:
    """Write the planted dataset as PNGs plus a labeled manifest.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids, images, labels = planted_dataset(n_templates, per_template, shape, seed)
    entries = []
    for image_id, pixels, label in zip(ids, images, labels):
        Image.fromarray(pixels.astype(np.uint8), mode="L").save(out / image_id)
        entries.append(ManifestEntry(id=image_id, path=image_id, label=label))
    write_manifest_csv(out / "manifest.csv", entries)
    return out


def two_class_with_duplicate(per_class: int = 15, shape=(64, 64), seed: int = 0):
    """Two labeled classes plus one ambiguous image duplicated across them.

    The duplicate is the midpoint of the two class templates, so both
    copies are equally similar to either class and must land nearest the
    borderline.  Returns (ids, images, labels, duplicate_ids).
    """
    rng = np.random.default_rng(seed + 2)
    a, b = make_templates(2, shape, seed)
    blend = noisy_variant((a + b) / 2.0, rng)
    ids, images, labels = [], [], []
    for i in range(per_class - 1):
        ids.append(f"pos_{i:02d}.png")
        images.append(noisy_variant(a, rng))
        labels.append("positive")
    for i in range(per_class - 1):
        ids.append(f"neg_{i:02d}.png")
        images.append(noisy_variant(b, rng))
        labels.append("negative")
    dup_ids = ("pos_dup.png", "neg_dup.png")
    ids.extend(dup_ids)
    images.extend([blend.copy(), blend.copy()])
    labels.extend(["positive", "negative"])
    return ids, images, labels, dup_ids
