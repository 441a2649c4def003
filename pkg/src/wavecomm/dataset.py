"""Dataset ingestion: decoding, grayscale conversion, resizing, manifests.

A dataset is either a directory of PNG/JPEG/BMP files (ids are relative
paths, labels absent) or a manifest CSV with header ``id,path,label``
(paths relative to the manifest).  All images are converted to grayscale
with luma weights 0.299/0.587/0.114 and bilinearly resized to one common
shape so that every image produces the same wavelet bookkeeping table.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import WavecommInputError

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
LUMA = (0.299, 0.587, 0.114)


@dataclass
class ImageRecord:
    id: str
    source_path: Path
    pixels: np.ndarray  # (H, W) float64 in [0, 255]; (3, H, W) in channels mode
    label: str | None = None


@dataclass
class ManifestEntry:
    id: str
    path: str  # relative, POSIX separators
    label: str | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    target_size: tuple[int, int]
    checksums: dict[str, str] = field(default_factory=dict)


@dataclass
class LoadReport:
    n_loaded: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.errors


def bilinear_resize(pixels: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resampling on pixel centers; output stays within input range."""
    out_h, out_w = out_shape
    in_h, in_w = pixels.shape
    if (in_h, in_w) == (out_h, out_w):
        return pixels.copy()
    rows = np.clip((np.arange(out_h) + 0.5) * in_h / out_h - 0.5, 0, in_h - 1)
    cols = np.clip((np.arange(out_w) + 0.5) * in_w / out_w - 0.5, 0, in_w - 1)
    r0 = np.floor(rows).astype(np.intp)
    c0 = np.floor(cols).astype(np.intp)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    wr = (rows - r0)[:, None]
    wc = cols - c0
    top = pixels[r0][:, c0] * (1 - wc) + pixels[r0][:, c1] * wc
    bottom = pixels[r1][:, c0] * (1 - wc) + pixels[r1][:, c1] * wc
    return top * (1 - wr) + bottom * wr


def decode_image(data: bytes, color_mode: str = "luma") -> np.ndarray:
    """Decode to float64 pixels in [0, 255].

    luma mode returns (H, W): already-grayscale files pass through
    byte-exact, color images get the luma conversion.  channels mode
    returns (3, H, W) RGB planes (grayscale sources replicate).
    """
    with Image.open(io.BytesIO(data)) as img:
        if color_mode == "channels":
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            return np.moveaxis(rgb, 2, 0)
        if img.mode == "L":
            return np.asarray(img, dtype=np.float64)
        if img.mode in ("I", "I;16", "F"):
            arr = np.asarray(img, dtype=np.float64)
            peak = arr.max()
            return arr * (255.0 / peak) if peak > 255 else arr
        rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    return LUMA[0] * rgb[:, :, 0] + LUMA[1] * rgb[:, :, 1] + LUMA[2] * rgb[:, :, 2]


def _scan_directory(root: Path) -> list[ManifestEntry]:
    entries = []
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES:
            rel = path.relative_to(root).as_posix()
            entries.append(ManifestEntry(id=rel, path=rel, label=None))
    entries.sort(key=lambda e: e.id)
    return entries


def read_manifest_csv(path: Path) -> list[ManifestEntry]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["id", "path"]:
            raise WavecommInputError(
                f"manifest {path} must have header id,path,label (got {reader.fieldnames})"
            )
        entries = []
        for row in reader:
            label = (row.get("label") or "").strip() or None
            entries.append(ManifestEntry(id=row["id"].strip(), path=row["path"].strip(), label=label))
    if len({e.id for e in entries}) != len(entries):
        raise WavecommInputError(f"manifest {path} contains duplicate ids")
    return entries


def write_manifest_csv(path: Path, entries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "path", "label"])
        for e in entries:
            writer.writerow([e.id, e.path, e.label or ""])


def load_dataset(
    source: str | Path,
    target_size: tuple[int, int] = (256, 256),
    with_manifest: bool = False,
    color_mode: str = "luma",
):
    """Load a dataset directory or manifest into uniform ImageRecords.

    Returns (records, report); corrupt files land in the report instead of
    aborting the run, but zero decodable images is fatal.  Records come
    back ordered by id.  color_mode "channels" keeps the RGB planes
    separate instead of collapsing to luma.
    """
    source = Path(source)
    th, tw = int(target_size[0]), int(target_size[1])
    if th < 2 or tw < 2:
        raise WavecommInputError(f"target size must be at least 2x2, got {th}x{tw}")
    if color_mode not in ("luma", "channels"):
        raise WavecommInputError(f"color_mode must be luma or channels, got {color_mode!r}")

    if source.is_dir():
        base = source
        entries = _scan_directory(source)
    elif source.is_file():
        base = source.parent
        entries = read_manifest_csv(source)
    else:
        raise WavecommInputError(f"dataset path {source} does not exist")

    if not entries:
        raise WavecommInputError(f"no images found under {source}")

    report = LoadReport()
    records = []
    checksums = {}
    for entry in sorted(entries, key=lambda e: e.id):
        file_path = base / entry.path
        try:
            data = file_path.read_bytes()
            pixels = decode_image(data, color_mode)
            if pixels.size == 0:
                raise WavecommInputError("decoded to an empty image")
        except (OSError, UnidentifiedImageError, WavecommInputError, ValueError) as exc:
            report.errors.append((entry.path, str(exc)))
            continue
        checksums[entry.id] = hashlib.sha256(data).hexdigest()
        if pixels.ndim == 3:
            resized = np.stack([bilinear_resize(plane, (th, tw)) for plane in pixels])
        else:
            resized = bilinear_resize(pixels, (th, tw))
        records.append(
            ImageRecord(
                id=entry.id,
                source_path=file_path,
                pixels=resized,
                label=entry.label,
            )
        )
    report.n_loaded = len(records)
    if not records:
        raise WavecommInputError(
            f"no readable images under {source}: "
            + "; ".join(f"{p}: {m}" for p, m in report.errors[:5])
        )
    if with_manifest:
        manifest = DatasetManifest(
            entries=[e for e in sorted(entries, key=lambda e: e.id) if e.id in checksums],
            target_size=(th, tw),
            checksums=checksums,
        )
        return records, report, manifest
    return records, report


def load_label_map(manifest_path: str | Path) -> dict[str, str]:
    """id -> label map from a manifest CSV; unlabeled rows are skipped."""
    entries = read_manifest_csv(Path(manifest_path))
    return {e.id: e.label for e in entries if e.label}
