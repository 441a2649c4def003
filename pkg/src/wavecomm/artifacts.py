"""Persistence of pipeline artifacts in a run directory.

Binary matrix format (little-endian throughout):

* square matrices (``distance.wcm``, ``affinity.wcm``): magic ``WCM1``,
  u64 n, then n*n float64 row-major;
* rectangular matrices (``decomps.wcm``, ``coeffs.wcm``): magic ``WCR1``,
  u64 rows, u64 cols, then the float64 data row-major.

Everything else is JSON or CSV.  Files are written via temp-and-rename so
a crashed run never leaves a half-written artifact behind.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from pathlib import Path

import numpy as np

from .affinity import AffinityMatrix, DistanceMatrix
from .errors import ArtifactVersionError, CorruptArtifactError, MissingArtifactError
from .features import CoefficientMatrix, FeatureScores
from .spectral import CommunityResult
from .spectrum import SpectrumPlacement
from .wavelet import BetaEntry, Bookkeeping, DecompResult

MAGIC_SQUARE = b"WCM1"
MAGIC_RECT = b"WCR1"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save_square_matrix(path: Path, values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype="<f8")
    n = values.shape[0]
    if values.shape != (n, n):
        raise ValueError(f"expected a square matrix, got {values.shape}")
    _atomic_write(Path(path), MAGIC_SQUARE + struct.pack("<Q", n) + values.tobytes())


def load_square_matrix(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise CorruptArtifactError(f"{path}: truncated header")
    magic = data[:4]
    if magic != MAGIC_SQUARE:
        raise ArtifactVersionError(
            f"{path}: unknown matrix format {magic!r}; expected {MAGIC_SQUARE!r}"
        )
    (n,) = struct.unpack("<Q", data[4:12])
    expected = 12 + 8 * n * n
    if len(data) != expected:
        raise CorruptArtifactError(f"{path}: expected {expected} bytes, found {len(data)}")
    return np.frombuffer(data[12:], dtype="<f8").reshape(n, n).copy()


def save_rect_matrix(path: Path, values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype="<f8")
    rows, cols = values.shape
    _atomic_write(
        Path(path), MAGIC_RECT + struct.pack("<QQ", rows, cols) + values.tobytes()
    )


def load_rect_matrix(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 20:
        raise CorruptArtifactError(f"{path}: truncated header")
    magic = data[:4]
    if magic != MAGIC_RECT:
        raise ArtifactVersionError(
            f"{path}: unknown matrix format {magic!r}; expected {MAGIC_RECT!r}"
        )
    rows, cols = struct.unpack("<QQ", data[4:20])
    expected = 20 + 8 * rows * cols
    if len(data) != expected:
        raise CorruptArtifactError(f"{path}: expected {expected} bytes, found {len(data)}")
    return np.frombuffer(data[20:], dtype="<f8").reshape(rows, cols).copy()


def matrix_to_csv(path: Path, values: np.ndarray) -> None:
    np.savetxt(path, values, delimiter=",", fmt="%.17g")


def _dump_json(payload) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=1) + "\n").encode("utf-8")


class RunDirectory:
    """Layout and load/save for one pipeline run's artifacts."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def ensure(self) -> "RunDirectory":
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "report").mkdir(exist_ok=True)
        return self

    # ---- paths ------------------------------------------------------
    @property
    def manifest_csv(self) -> Path:
        return self.path / "manifest.csv"

    @property
    def beta_json(self) -> Path:
        return self.path / "beta.json"

    @property
    def decomps_wcm(self) -> Path:
        return self.path / "decomps.wcm"

    @property
    def coeffs_wcm(self) -> Path:
        return self.path / "coeffs.wcm"

    @property
    def features_csv(self) -> Path:
        return self.path / "features.csv"

    @property
    def distance_wcm(self) -> Path:
        return self.path / "distance.wcm"

    @property
    def affinity_wcm(self) -> Path:
        return self.path / "affinity.wcm"

    @property
    def communities_json(self) -> Path:
        return self.path / "communities.json"

    @property
    def spectrum_json(self) -> Path:
        return self.path / "spectrum.json"

    @property
    def spectrum_csv(self) -> Path:
        return self.path / "spectrum.csv"

    @property
    def summary_json(self) -> Path:
        return self.path / "summary.json"

    @property
    def run_config_json(self) -> Path:
        return self.path / "run_config.json"

    @property
    def checksums_json(self) -> Path:
        return self.path / "checksums.json"

    @property
    def labels_json(self) -> Path:
        return self.path / "labels.json"

    @property
    def report_dir(self) -> Path:
        return self.path / "report"

    @property
    def thumbs_dir(self) -> Path:
        return self.path / "thumbs"

    def require(self, path: Path, what: str) -> Path:
        if not path.exists():
            raise MissingArtifactError(f"run {self.path} is missing {what} ({path.name})")
        return path

    # ---- decompositions ---------------------------------------------
    def save_decomps(self, decomps: list[DecompResult], basis_name: str, channels: int = 1) -> None:
        """One row per DecompResult; consecutive ``channels`` rows form one image."""
        beta = decomps[0].beta
        save_rect_matrix(self.decomps_wcm, np.vstack([d.omega for d in decomps]))
        payload = {
            "basis": basis_name,
            "levels": decomps[0].levels,
            "channels": channels,
            "image_shape": list(beta.image_shape),
            "entries": [[e.level, e.subband, e.rows, e.cols] for e in beta.entries],
        }
        _atomic_write(self.beta_json, _dump_json(payload))

    def load_decomps(self):
        """Returns (decomps, basis_name, channels); flat list of DecompResult."""
        self.require(self.decomps_wcm, "decompositions")
        self.require(self.beta_json, "bookkeeping")
        with open(self.beta_json, encoding="utf-8") as fh:
            payload = json.load(fh)
        beta = Bookkeeping(
            entries=tuple(BetaEntry(lv, sb, r, c) for lv, sb, r, c in payload["entries"]),
            image_shape=tuple(payload["image_shape"]),
        )
        omegas = load_rect_matrix(self.decomps_wcm)
        if omegas.shape[1] != beta.total_size():
            raise CorruptArtifactError(
                f"{self.decomps_wcm}: width {omegas.shape[1]} does not match bookkeeping"
            )
        decomps = [
            DecompResult(omega=row, beta=beta, levels=payload["levels"]) for row in omegas
        ]
        return decomps, payload["basis"], payload.get("channels", 1)

    # ---- coefficient matrix ------------------------------------------
    def save_coefficients(self, C: CoefficientMatrix) -> None:
        save_rect_matrix(self.coeffs_wcm, C.values)
        sidecar = {
            "image_ids": list(C.image_ids),
            "feature_ids": list(C.feature_ids),
        }
        _atomic_write(self.path / "coeffs.meta.json", _dump_json(sidecar))

    def load_coefficients(self) -> CoefficientMatrix:
        self.require(self.coeffs_wcm, "coefficient matrix")
        meta_path = self.require(self.path / "coeffs.meta.json", "coefficient metadata")
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        return CoefficientMatrix(
            values=load_rect_matrix(self.coeffs_wcm),
            image_ids=tuple(meta["image_ids"]),
            feature_ids=tuple(meta["feature_ids"]),
        )

    # ---- feature scores -----------------------------------------------
    def save_feature_scores(self, scores: FeatureScores, selected: set[str]) -> None:
        with open(self.features_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature_id", "score", "raw_score", "selected"])
            for fid, score, raw in zip(scores.ids, scores.score, scores.raw):
                writer.writerow(
                    [fid, f"{score:.17g}", f"{raw:.17g}", int(fid in selected)]
                )

    # ---- matrices ------------------------------------------------------
    def save_distance(self, D: DistanceMatrix) -> None:
        save_square_matrix(self.distance_wcm, D.values)

    def load_distance(self, metric: str) -> DistanceMatrix:
        self.require(self.distance_wcm, "distance matrix")
        return DistanceMatrix(values=load_square_matrix(self.distance_wcm), metric=metric)

    def save_affinity(self, W: AffinityMatrix) -> None:
        save_square_matrix(self.affinity_wcm, W.values)
        _atomic_write(self.path / "affinity.meta.json", _dump_json({"sigma": W.sigma}))

    def load_affinity(self) -> AffinityMatrix:
        self.require(self.affinity_wcm, "affinity matrix")
        sigma = 0.0
        meta = self.path / "affinity.meta.json"
        if meta.exists():
            with open(meta, encoding="utf-8") as fh:
                sigma = json.load(fh).get("sigma", 0.0)
        return AffinityMatrix(values=load_square_matrix(self.affinity_wcm), sigma=sigma)

    # ---- results --------------------------------------------------------
    def save_communities(self, result: CommunityResult) -> None:
        _atomic_write(self.communities_json, result.to_json().encode("utf-8"))

    def load_communities(self) -> CommunityResult:
        path = self.require(self.communities_json, "communities")
        return CommunityResult.from_json(path.read_text(encoding="utf-8"))

    def save_spectrum(self, placements: list[SpectrumPlacement], meta: dict) -> None:
        payload = {"images": [p.payload() for p in placements], **meta}
        _atomic_write(self.spectrum_json, _dump_json(payload))
        with open(self.spectrum_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "label", "in_class_sim", "out_class_sim", "position", "flags"])
            for p in placements:
                writer.writerow(
                    [
                        p.image_id,
                        p.class_label,
                        f"{p.in_class_sim:.17g}",
                        f"{p.out_class_sim:.17g}",
                        f"{p.position:.17g}",
                        "|".join(sorted(p.flags)),
                    ]
                )

    def load_spectrum(self) -> list[SpectrumPlacement]:
        path = self.require(self.spectrum_json, "spectrum report")
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return [
            SpectrumPlacement(
                image_id=row["id"],
                class_label=row["label"],
                in_class_sim=row["in"],
                out_class_sim=row["out"],
                position=row["position"],
                flags=frozenset(row["flags"]),
            )
            for row in payload["images"]
        ]

    # ---- json blobs -----------------------------------------------------
    def save_json(self, path: Path, payload) -> None:
        _atomic_write(path, _dump_json(payload))

    def load_json(self, path: Path):
        self.require(path, path.stem)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
