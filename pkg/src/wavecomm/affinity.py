"""Pairwise distances, Gaussian affinity, and graph Laplacian.

The affinity kernel is ``W(i,j) = exp(-D(i,j)^2 / (2 sigma^2))`` with
``sigma`` the standard deviation of the off-diagonal distances, diagonal
forced to zero.  ``literal_scaled_exponential`` keeps the alternative
growth-with-distance formula ``(1/std(D)) * exp(D*D)`` available for
archaeology; it is not an affinity and nothing downstream uses it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFeatureError,
    DegenerateGeometryError,
    WavecommInputError,
)
from .features import CoefficientMatrix
from .validation import as_float_matrix, check_square_symmetric

METRICS = ("correlation", "cosine", "euclidean")


@dataclass
class DistanceMatrix:
    """Symmetric pairwise distances with zero diagonal."""

    values: np.ndarray
    metric: str

    def __post_init__(self):
        self.values = check_square_symmetric(self.values, "distance matrix", tol=1e-12)
        if self.metric not in METRICS:
            raise WavecommInputError(f"unknown metric {self.metric!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def off_diagonal(self) -> np.ndarray:
        mask = ~np.eye(self.n, dtype=bool)
        return self.values[mask]


@dataclass
class AffinityMatrix:
    """Symmetric similarities in [0, 1] with zero diagonal."""

    values: np.ndarray
    sigma: float

    def __post_init__(self):
        self.values = check_square_symmetric(self.values, "affinity matrix", tol=1e-12)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class LaplacianMatrix:
    values: np.ndarray
    normalization: str  # "unnormalized" | "symmetric"

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_distances(C: CoefficientMatrix | np.ndarray, metric: str = "correlation") -> DistanceMatrix:
    """Full symmetric distance matrix between the rows of C.

    correlation: 1 - Pearson correlation; cosine: 1 - cosine similarity;
    euclidean: plain L2.  Correlation requires every row to have nonzero
    variance.
    """
    if isinstance(C, CoefficientMatrix):
        X = C.values
        ids = C.image_ids
    else:
        X = as_float_matrix(C, "matrix")
        ids = None
    n, m = X.shape
    if n < 2:
        raise WavecommInputError(f"need at least 2 rows, got {n}")
    if metric not in METRICS:
        raise WavecommInputError(f"unknown metric {metric!r}; expected one of {METRICS}")

    if metric == "euclidean":
        sq = np.sum(X**2, axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
        D = np.sqrt(d2)
    else:
        if metric == "correlation":
            if m < 2:
                raise WavecommInputError("correlation distance needs at least 2 columns")
            Xr = X - X.mean(axis=1, keepdims=True)
        else:
            Xr = X
        norms = np.linalg.norm(Xr, axis=1)
        bad = np.flatnonzero(norms == 0)
        if bad.size:
            label = ids[bad[0]] if ids is not None else f"row {bad[0]}"
            kind = "zero variance" if metric == "correlation" else "zero norm"
            raise DegenerateFeatureError(
                f"image {label!r} has {kind}; {metric} distance is undefined for it"
            )
        sim = (Xr @ Xr.T) / np.outer(norms, norms)
        D = 1.0 - np.clip(sim, -1.0, 1.0)

    D = np.maximum((D + D.T) / 2.0, 0.0)
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(values=D, metric=metric)


def affinity_from_distances(D: DistanceMatrix, sparsify_k: int | None = None) -> AffinityMatrix:
    """Gaussian-kernel affinity W = exp(-D^2 / (2 sigma^2)), zero diagonal.

    sigma = population std of the off-diagonal distances; all equal
    distances leave no usable bandwidth and raise.  The kernel is computed
    as exp(-(D/sigma)^2 / 2) on peak-scaled distances so extreme distance
    magnitudes cannot underflow the ratio.  ``sparsify_k`` keeps only each
    node's k nearest neighbours (union-symmetrized); default is the dense
    matrix, which is fine at the few-thousand-image scale.
    """
    off = D.off_diagonal()
    if off.size == 0 or np.ptp(off) == 0.0:
        raise DegenerateGeometryError(
            "all pairwise distances are equal; affinity bandwidth is undefined"
        )
    peak = float(np.abs(off).max())
    sigma_scaled = float(np.std(off / peak))
    ratio = (D.values / peak) / sigma_scaled
    W = np.exp(-(ratio**2) / 2.0)
    np.fill_diagonal(W, 0.0)
    if sparsify_k is not None:
        n = D.n
        if not 1 <= sparsify_k < n:
            raise WavecommInputError(f"sparsify_k must be in [1, {n - 1}], got {sparsify_k}")
        dag = D.values + np.diag(np.full(n, np.inf))
        keep = np.zeros_like(W, dtype=bool)
        nearest = np.argsort(dag, axis=1, kind="stable")[:, :sparsify_k]
        np.put_along_axis(keep, nearest, True, axis=1)
        keep |= keep.T
        W = np.where(keep, W, 0.0)
    return AffinityMatrix(values=W, sigma=sigma_scaled * peak)


def literal_scaled_exponential(D: DistanceMatrix) -> np.ndarray:
    """The growth-with-distance variant (1/std) * exp(D*D), diagonal zeroed."""
    sigma = float(np.std(D.off_diagonal()))
    if sigma == 0.0:
        raise DegenerateGeometryError("all pairwise distances are equal")
    S = np.exp(D.values * D.values) / sigma
    np.fill_diagonal(S, 0.0)
    return S


def graph_laplacian(W: AffinityMatrix, normalization: str = "symmetric") -> LaplacianMatrix:
    """Graph Laplacian of the affinity graph.

    unnormalized: L = Deg - W.  symmetric: L = I - Deg^{-1/2} W Deg^{-1/2};
    zero-degree (isolated) nodes get an identity row so L stays symmetric
    PSD with eigenvalues in [0, 2].
    """
    A = check_square_symmetric(W.values, "affinity matrix", tol=1e-10)
    if A.min() < -1e-12:
        raise WavecommInputError("affinity entries must be non-negative")
    deg = A.sum(axis=1)
    if normalization == "unnormalized":
        L = np.diag(deg) - A
    elif normalization == "symmetric":
        inv_sqrt = np.zeros_like(deg)
        positive = deg > 0
        inv_sqrt[positive] = 1.0 / np.sqrt(deg[positive])
        L = np.eye(A.shape[0]) - (inv_sqrt[:, None] * A) * inv_sqrt[None, :]
    else:
        raise WavecommInputError(f"unknown normalization {normalization!r}")
    L = (L + L.T) / 2.0
    return LaplacianMatrix(values=L, normalization=normalization)
