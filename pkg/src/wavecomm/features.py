"""Per-image coefficient matrix assembly and Laplacian-score feature selection.

The selection score follows He, Cai & Niyogi (NeurIPS 2005): build a
k-nearest-neighbour similarity graph over the images, and rate each
coefficient column by how smoothly it varies over that graph.  The raw
score favours *small* values, while the pipeline's threshold discards
small scores, so the published importance is the inversion
``1 / (1 + raw)`` — larger means keep.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    HeterogeneousDatasetError,
    ThresholdTooAggressiveError,
    WavecommInputError,
)
from .validation import as_float_matrix, check_positive_int
from .wavelet import DecompResult, coefficient_labels


@dataclass
class CoefficientMatrix:
    """n_images x n_features matrix; rows are images, columns coefficients."""

    values: np.ndarray
    image_ids: tuple[str, ...]
    feature_ids: tuple[str, ...]

    def __post_init__(self):
        self.values = as_float_matrix(self.values, "coefficient matrix")
        self.image_ids = tuple(str(i) for i in self.image_ids)
        self.feature_ids = tuple(str(f) for f in self.feature_ids)
        n, m = self.values.shape
        if len(self.image_ids) != n:
            raise WavecommInputError(f"{len(self.image_ids)} image ids for {n} rows")
        if len(set(self.image_ids)) != n:
            raise WavecommInputError("image ids must be unique")
        if len(self.feature_ids) != m:
            raise WavecommInputError(f"{len(self.feature_ids)} feature ids for {m} columns")

    @property
    def n_images(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass
class FeatureScores:
    """Per-column importance; larger = more worth keeping.

    ``raw`` is the un-inverted He-et-al. score (smaller = better), kept for
    audit dumps; ``score`` is ``1 / (1 + raw)`` in (0, 1], with constant
    columns pinned to the sentinel 0.
    """

    ids: tuple[str, ...]
    score: np.ndarray
    raw: np.ndarray
    k_neighbors: int
    bandwidth: float
    threshold: float | None = field(default=None)


def assemble_coefficient_matrix(decomps, image_ids) -> CoefficientMatrix:
    """Stack per-image coefficient vectors into the dataset matrix.

    All decompositions must share an identical bookkeeping table; differing
    tables mean the images were not resized to a common shape upstream.
    """
    decomps = list(decomps)
    image_ids = [str(i) for i in image_ids]
    if not decomps:
        raise WavecommInputError("no decompositions given")
    if len(decomps) != len(image_ids):
        raise WavecommInputError(
            f"{len(decomps)} decompositions but {len(image_ids)} image ids"
        )
    beta = decomps[0].beta
    for dec, image_id in zip(decomps, image_ids):
        if dec.beta != beta:
            raise HeterogeneousDatasetError(
                f"image {image_id!r} produced a different bookkeeping table; "
                "resize all images to a common shape before decomposing"
            )
    values = np.vstack([np.asarray(d.omega, dtype=np.float64) for d in decomps])
    return CoefficientMatrix(
        values=values,
        image_ids=tuple(image_ids),
        feature_ids=tuple(coefficient_labels(beta)),
    )


def assemble_channel_matrix(channel_decomps, image_ids) -> CoefficientMatrix:
    """Per-channel-concatenation assembly for color datasets.

    ``channel_decomps`` holds, per image, one DecompResult per channel; the
    row is the concatenation of the per-channel coefficient vectors and
    feature ids carry a ``c{k}:`` prefix.
    """
    channel_decomps = [list(per_image) for per_image in channel_decomps]
    image_ids = [str(i) for i in image_ids]
    if not channel_decomps:
        raise WavecommInputError("no decompositions given")
    n_channels = len(channel_decomps[0])
    betas = [d.beta for d in channel_decomps[0]]
    for per_image, image_id in zip(channel_decomps, image_ids):
        if len(per_image) != n_channels or [d.beta for d in per_image] != betas:
            raise HeterogeneousDatasetError(
                f"image {image_id!r} has a different channel/bookkeeping layout; "
                "resize and decode all images identically before decomposing"
            )
    values = np.vstack(
        [np.concatenate([d.omega for d in per_image]) for per_image in channel_decomps]
    )
    labels = coefficient_labels(betas[0])
    feature_ids = [f"c{k}:{label}" for k in range(n_channels) for label in labels]
    return CoefficientMatrix(
        values=values, image_ids=tuple(image_ids), feature_ids=tuple(feature_ids)
    )


def knn_heat_graph(X: np.ndarray, k_neighbors: int, bandwidth: float | None = None):
    """Symmetric kNN similarity graph over the rows of X.

    Edges join i and j when either is among the other's k nearest
    (euclidean) neighbours; weights are ``exp(-d^2 / (2 t^2))`` with ``t``
    the median of the kNN distances unless given.  Returns (W, t) with W
    a sparse CSR matrix.
    """
    n = X.shape[0]
    sq = np.sum(X**2, axis=1)
    dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0))
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]
    knn_d = np.take_along_axis(dist, order, axis=1)

    t = float(np.median(knn_d)) if bandwidth is None else float(bandwidth)
    rows = np.repeat(np.arange(n), k_neighbors)
    cols = order.ravel()
    d = knn_d.ravel()
    if t > 0:
        w = np.exp(-(d**2) / (2.0 * t * t))
    else:
        # all kNN distances zero (heavily duplicated rows): unit weights on
        # coincident pairs, nothing else
        w = (d == 0).astype(np.float64)
    W = sp.coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
    W = W.maximum(W.T)  # union symmetrization
    return W, t


def laplacian_score(
    C: CoefficientMatrix,
    k_neighbors: int | None = None,
    bandwidth: float | None = None,
) -> FeatureScores:
    """Score every column of C by locality preservation over the image graph.

    raw(r) = (f~' L f~) / (f~' Deg f~) with f~ the degree-weighted-mean
    centred column; published score = 1 / (1 + raw).  Zero-variance columns
    get score 0 with a warning rather than an error.
    """
    n = C.n_images
    if n < 3:
        raise WavecommInputError(f"Laplacian score needs at least 3 images, got {n}")
    if k_neighbors is None:
        k_neighbors = min(5, n - 1)
    k_neighbors = check_positive_int(k_neighbors, "k_neighbors")
    if k_neighbors >= n:
        raise WavecommInputError(f"k_neighbors={k_neighbors} must be < n={n}")

    W, t = knn_heat_graph(C.values, k_neighbors, bandwidth)
    deg = np.asarray(W.sum(axis=1)).ravel()
    total = deg.sum()

    X = C.values
    mean = (deg @ X) / total if total > 0 else X.mean(axis=0)
    Xc = X - mean[None, :]

    quad_deg = deg @ (Xc**2)  # f~' Deg f~ per column
    quad_w = np.einsum("ij,ij->j", Xc, W @ Xc)  # f~' W f~ per column
    num = np.maximum(quad_deg - quad_w, 0.0)  # f~' L f~, PSD so clip fp noise

    score = np.zeros(C.n_features)
    raw = np.full(C.n_features, np.inf)
    constant = np.ptp(X, axis=0) == 0
    live = ~constant & (quad_deg > 0)
    raw[live] = num[live] / quad_deg[live]
    score[live] = 1.0 / (1.0 + raw[live])

    n_constant = int((~live).sum())
    if n_constant:
        warnings.warn(
            f"{n_constant} constant coefficient column(s) received importance 0",
            stacklevel=2,
        )

    return FeatureScores(
        ids=C.feature_ids,
        score=score,
        raw=raw,
        k_neighbors=k_neighbors,
        bandwidth=t,
    )


def resolve_threshold(scores: FeatureScores, keep_top: float) -> float:
    """Absolute importance threshold that keeps the top ``keep_top`` fraction."""
    if not 0.0 < keep_top <= 1.0:
        raise WavecommInputError(f"keep_top must be in (0, 1], got {keep_top}")
    m = len(scores.score)
    n_keep = max(1, int(np.ceil(keep_top * m)))
    return float(np.sort(scores.score)[::-1][n_keep - 1])


def select_features(
    C: CoefficientMatrix,
    scores: FeatureScores,
    threshold: float | None = None,
    keep_top: float | None = None,
) -> CoefficientMatrix:
    """Drop columns whose importance falls below the threshold.

    Exactly one of ``threshold`` (absolute: columns with score < threshold
    are discarded) or ``keep_top`` (fraction of columns to retain, resolved
    to an absolute threshold; ties may keep slightly more) must be given.
    Surviving columns keep their original order.
    """
    if (threshold is None) == (keep_top is None):
        raise WavecommInputError("give exactly one of threshold or keep_top")
    if scores.ids != C.feature_ids:
        raise WavecommInputError("scores are not aligned with the matrix columns")
    if keep_top is not None:
        threshold = resolve_threshold(scores, keep_top)
    mask = scores.score >= threshold
    if not mask.any():
        raise ThresholdTooAggressiveError(
            f"threshold {threshold} discards every column "
            f"(max observed score {scores.score.max():.6g})"
        )
    scores.threshold = float(threshold)
    return CoefficientMatrix(
        values=C.values[:, mask],
        image_ids=C.image_ids,
        feature_ids=tuple(np.asarray(C.feature_ids, dtype=object)[mask]),
    )
