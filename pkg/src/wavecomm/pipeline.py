"""End-to-end orchestration: load -> decompose -> select -> graph -> cluster.

Each stage writes its artifacts into the run directory as it completes, so
a failed run leaves everything up to the failure behind for debugging, and
the stage subcommands can resume from any point.
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np

from .affinity import (
    METRICS,
    AffinityMatrix,
    affinity_from_distances,
    graph_laplacian,
    pairwise_distances,
)
from .artifacts import RunDirectory
from .dataset import ImageRecord, load_dataset, write_manifest_csv
from .errors import ConfigurationError
from .features import (
    assemble_coefficient_matrix,
    laplacian_score,
    select_features,
)
from .spectral import eigendecompose, estimate_num_clusters, spectral_cluster
from .spectrum import infer_spectrum
from .errors import WavecommError
from .wavelet import BASIS_NAMES, basis_filters, wavedec2

DEFAULT_MAX_K_CAP = 50


@contextmanager
def _stage(name: str, hint: str):
    """Tag escaping errors with the failing stage and a remediation hint."""
    try:
        yield
    except WavecommError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
            exc.hint = hint
        raise


def thread_count() -> int:
    """Worker cap from WAVECOMM_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("WAVECOMM_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigurationError(f"WAVECOMM_THREADS must be an integer, got {raw!r}")
    return max(1, os.cpu_count() or 1)


@dataclass
class RunConfig:
    """Validated configuration of one detection run; persisted for provenance."""

    dataset: str
    out: str
    basis: str = "db3"
    levels: int = 3
    metric: str = "correlation"
    color_mode: str = "luma"
    keep_top: float | None = 0.2
    tau_w: float | None = None
    max_k: int | None = None
    tau_c: float | None = None
    count_mode: str = "eigengap"
    n_c: int | None = None
    seed: int = 7
    target_size: tuple[int, int] = (256, 256)
    k_neighbors: int | None = None
    bandwidth: float | None = None
    save_coefficients: bool = True

    def validate(self) -> "RunConfig":
        if self.basis not in BASIS_NAMES:
            raise ConfigurationError(
                f"basis must be one of {', '.join(BASIS_NAMES)}, got {self.basis!r}"
            )
        if self.levels < 1:
            raise ConfigurationError(f"levels must be >= 1, got {self.levels}")
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.color_mode not in ("luma", "channels"):
            raise ConfigurationError(
                f"color_mode must be luma or channels, got {self.color_mode!r}"
            )
        if (self.keep_top is None) == (self.tau_w is None):
            raise ConfigurationError("give exactly one of keep_top or tau_w")
        if self.keep_top is not None and not 0.0 < self.keep_top <= 1.0:
            raise ConfigurationError(f"keep_top must be in (0, 1], got {self.keep_top}")
        if self.count_mode not in ("eigengap", "near_zero"):
            raise ConfigurationError(f"unknown count mode {self.count_mode!r}")
        if self.n_c is not None and self.n_c < 1:
            raise ConfigurationError(f"n_c override must be >= 1, got {self.n_c}")
        if len(self.target_size) != 2 or min(self.target_size) < 2:
            raise ConfigurationError(f"bad target size {self.target_size}")
        return self

    def payload(self) -> dict:
        data = asdict(self)
        data["target_size"] = list(self.target_size)
        return data


@dataclass
class DetectOutcome:
    run: RunDirectory
    n_images: int
    n_features_total: int
    n_features_kept: int
    n_c: int
    summary: dict = field(default_factory=dict)


def decompose_images(records: list[ImageRecord], basis_name: str, levels: int):
    """Wavelet-decompose every image; parallel across images.

    2-D pixels give one DecompResult per image; (C, H, W) pixels (channels
    color mode) give a per-channel list per image.
    """
    basis = basis_filters(basis_name)

    def one(record: ImageRecord):
        if record.pixels.ndim == 3:
            return [wavedec2(plane, basis, levels) for plane in record.pixels]
        return wavedec2(record.pixels, basis, levels)

    workers = min(thread_count(), len(records)) or 1
    if workers == 1:
        return [one(r) for r in records]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, records))


def resolve_max_k(n_images: int, configured: int | None) -> int:
    if configured is not None:
        return max(1, min(configured, n_images - 1))
    return max(1, min(DEFAULT_MAX_K_CAP, n_images // 4))


def detect(config: RunConfig) -> DetectOutcome:
    """Run the whole detection pipeline and persist all artifacts."""
    config.validate()
    t0 = time.monotonic()
    run = RunDirectory(config.out).ensure()
    run.save_json(run.run_config_json, config.payload())

    with _stage("load", "check the dataset path, image formats, and --size"):
        records, report, manifest = load_dataset(
            config.dataset,
            config.target_size,
            with_manifest=True,
            color_mode=config.color_mode,
        )
    write_manifest_csv(run.manifest_csv, manifest.entries)
    run.save_json(run.checksums_json, manifest.checksums)

    with _stage("decompose", "reduce --levels or pick a larger --size"):
        decomps = decompose_images(records, config.basis, config.levels)
        ids = [r.id for r in records]
        if config.color_mode == "channels":
            from .features import assemble_channel_matrix

            C_full = assemble_channel_matrix(decomps, ids)
        else:
            C_full = assemble_coefficient_matrix(decomps, ids)

    with _stage("select", "loosen --keep-top / --tau-w, or audit features.csv"):
        scores = laplacian_score(C_full, config.k_neighbors, config.bandwidth)
        if config.keep_top is not None:
            C = select_features(C_full, scores, keep_top=config.keep_top)
        else:
            C = select_features(C_full, scores, threshold=config.tau_w)
    run.save_feature_scores(scores, set(C.feature_ids))
    if config.save_coefficients:
        if config.color_mode == "channels":
            flat = [d for per_image in decomps for d in per_image]
            run.save_decomps(flat, config.basis, channels=len(decomps[0]))
        else:
            run.save_decomps(decomps, config.basis)
        run.save_coefficients(C)

    with _stage("graph", "look for constant images, or try --metric cosine"):
        D = pairwise_distances(C, config.metric)
        run.save_distance(D)
        W = affinity_from_distances(D)
        run.save_affinity(W)

    n = len(records)
    max_k = resolve_max_k(n, config.max_k)
    with _stage("cluster", "inspect report eigenvalues, or set --n-c explicitly"):
        L = graph_laplacian(W, "symmetric")
        spectrum = eigendecompose(L, min(n, max_k + 1))
        if config.n_c is not None:
            # explicit override: no estimation, gaps kept for reporting only
            estimate = None
            gaps = np.diff(spectrum.eigenvalues)
            n_c = config.n_c
        else:
            estimate = estimate_num_clusters(
                spectrum.eigenvalues, max_k, tau_c=config.tau_c, mode=config.count_mode
            )
            gaps = estimate.gaps
            n_c = estimate.n_c

        result = spectral_cluster(
            W,
            n_c,
            seed=config.seed,
            image_ids=[r.id for r in records],
            eigenvalues=spectrum.eigenvalues,
            eigengap_profile=gaps,
        )
    run.save_communities(result)

    summary = {
        "n_images": n,
        "load_errors": report.errors,
        "n_features_total": C_full.n_features,
        "n_features_kept": C.n_features,
        "selection_threshold": scores.threshold,
        "metric": config.metric,
        "basis": config.basis,
        "levels": config.levels,
        "sigma": W.sigma,
        "max_k": max_k,
        "n_c": result.n_c,
        "n_c_by_eigengap": estimate.by_eigengap if estimate else None,
        "n_c_by_near_zero": estimate.by_near_zero if estimate else None,
        "tau_c": estimate.tau_c if estimate else config.tau_c,
        "n_c_overridden": config.n_c is not None,
        "eigengap_profile": [float(g) for g in gaps],
        "cluster_sizes": result.cluster_sizes(),
        "seed": config.seed,
        "elapsed_seconds": round(time.monotonic() - t0, 3),
    }
    run.save_json(run.summary_json, summary)
    return DetectOutcome(
        run=run,
        n_images=n,
        n_features_total=C_full.n_features,
        n_features_kept=C.n_features,
        n_c=result.n_c,
        summary=summary,
    )


def spectrum_report(
    run: RunDirectory,
    label_map: dict[str, str],
    positive_class: str | None = None,
    band: float | None = None,
    quantile: float = 0.05,
):
    """Severity-axis report for a completed run with two-class labels.

    Images without labels are excluded (listed in the returned meta).
    """
    W = run.load_affinity()
    result = run.load_communities()
    ids = list(result.image_ids)

    missing = [i for i in ids if i not in label_map]
    unknown = sorted(set(label_map) - set(ids))
    keep = [k for k, i in enumerate(ids) if i in label_map]
    if missing:
        warnings.warn(
            f"{len(missing)} image(s) have no label and are excluded from the spectrum",
            stacklevel=2,
        )
    W_kept = AffinityMatrix(values=W.values[np.ix_(keep, keep)], sigma=W.sigma)
    kept_ids = [ids[k] for k in keep]
    labels = [label_map[i] for i in kept_ids]

    placements = infer_spectrum(
        W_kept,
        labels,
        image_ids=kept_ids,
        positive_class=positive_class,
        band=band,
        quantile=quantile,
    )
    meta = {
        "excluded_unlabeled": missing,
        "unknown_label_ids": unknown,
        "classes": sorted(set(labels)),
        "positive_class": positive_class
        if positive_class is not None
        else sorted(set(labels))[1],
    }
    run.save_spectrum(placements, meta)
    return placements, meta
