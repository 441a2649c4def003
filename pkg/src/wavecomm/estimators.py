"""scikit-learn style estimators wrapping the pipeline stages.

These make the stages composable with the wider ecosystem::

    pipe = Pipeline([
        ("wavelet", WaveletFeatures(basis="db3", levels=3)),
        ("select", LaplacianScoreSelector(keep_top=0.2)),
        ("communities", SpectralCommunities(seed=7)),
    ])
    labels = pipe.fit_predict(images)   # images: (n, H, W)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.feature_selection import SelectorMixin

from .affinity import affinity_from_distances, graph_laplacian, pairwise_distances
from .errors import WavecommInputError
from .features import CoefficientMatrix, laplacian_score, resolve_threshold
from .pipeline import resolve_max_k
from .spectral import eigendecompose, estimate_num_clusters, spectral_cluster
from .wavelet import basis_filters, coefficient_labels, wavedec2


def _as_image_stack(X) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise WavecommInputError(
            f"expected images shaped (n, H, W), got array of shape {arr.shape}"
        )
    return arr


class WaveletFeatures(TransformerMixin, BaseEstimator):
    """Transform a stack of grayscale images into wavelet coefficient rows.

    Parameters
    ----------
    basis : str, default "db3"
        Daubechies basis name, db1..db5.
    levels : int, default 3
        Decomposition depth.

    Attributes
    ----------
    bookkeeping_ : Bookkeeping
        Subband shape table of the fitted image size.
    feature_names_ : list of str
        Stable column labels (subband + position).
    """

    def __init__(self, basis: str = "db3", levels: int = 3):
        self.basis = basis
        self.levels = levels

    def fit(self, X, y=None):
        images = _as_image_stack(X)
        dec = wavedec2(images[0], basis_filters(self.basis), self.levels)
        self.bookkeeping_ = dec.beta
        self.feature_names_ = coefficient_labels(dec.beta)
        self.n_features_out_ = len(self.feature_names_)
        return self

    def transform(self, X):
        images = _as_image_stack(X)
        basis = basis_filters(self.basis)
        rows = [wavedec2(img, basis, self.levels).omega for img in images]
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names_, dtype=object)


class LaplacianScoreSelector(SelectorMixin, BaseEstimator):
    """Unsupervised column selection by Laplacian-score importance.

    Parameters
    ----------
    keep_top : float or None, default 0.2
        Fraction of columns to keep (by importance).  Mutually exclusive
        with ``threshold``.
    threshold : float or None
        Absolute importance cutoff; columns scoring below it are dropped.
    k_neighbors : int or None
        Neighbour count of the image graph; default min(5, n-1).
    bandwidth : float or None
        Heat-kernel bandwidth; default median of the kNN distances.

    Attributes
    ----------
    scores_ : ndarray
        Importance per column, larger = keep.
    threshold_ : float
        Resolved absolute cutoff.
    support_ : boolean ndarray
        Mask of surviving columns.
    """

    def __init__(self, keep_top=0.2, threshold=None, k_neighbors=None, bandwidth=None):
        self.keep_top = keep_top
        self.threshold = threshold
        self.k_neighbors = k_neighbors
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if (self.keep_top is None) == (self.threshold is None):
            raise WavecommInputError("give exactly one of keep_top or threshold")
        C = CoefficientMatrix(
            values=X,
            image_ids=tuple(str(i) for i in range(X.shape[0])),
            feature_ids=tuple(str(j) for j in range(X.shape[1])),
        )
        scores = laplacian_score(C, self.k_neighbors, self.bandwidth)
        self.scores_ = scores.score
        self.raw_scores_ = scores.raw
        self.bandwidth_ = scores.bandwidth
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
        else:
            self.threshold_ = resolve_threshold(scores, self.keep_top)
        self.support_ = self.scores_ >= self.threshold_
        if not self.support_.any():
            from .errors import ThresholdTooAggressiveError

            raise ThresholdTooAggressiveError(
                f"threshold {self.threshold_} discards every column "
                f"(max observed score {self.scores_.max():.6g})"
            )
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        return self.support_


class SpectralCommunities(ClusterMixin, BaseEstimator):
    """Community detection over rows of a feature matrix.

    fit_predict(X) builds the pairwise-distance matrix under ``metric``,
    turns it into a Gaussian affinity, estimates the community count from
    the Laplacian eigengaps (unless ``n_clusters`` pins it), and runs
    normalized spectral clustering.

    Attributes
    ----------
    labels_ : ndarray of cluster ids
    n_clusters_ : int
    affinity_matrix_ : AffinityMatrix
    eigenvalues_ : ndarray
    eigengap_profile_ : ndarray
    permutation_ : ndarray
        Image order grouping communities contiguously.
    """

    def __init__(
        self,
        n_clusters: int | None = None,
        metric: str = "correlation",
        max_k: int | None = None,
        tau_c: float | None = None,
        count_mode: str = "eigengap",
        seed: int = 0,
    ):
        self.n_clusters = n_clusters
        self.metric = metric
        self.max_k = max_k
        self.tau_c = tau_c
        self.count_mode = count_mode
        self.seed = seed

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        D = pairwise_distances(X, self.metric)
        W = affinity_from_distances(D)
        n = W.n
        max_k = resolve_max_k(n, self.max_k)
        L = graph_laplacian(W, "symmetric")
        spectrum = eigendecompose(L, min(n, max_k + 1))
        estimate = estimate_num_clusters(
            spectrum.eigenvalues, max_k, tau_c=self.tau_c, mode=self.count_mode
        )
        n_c = self.n_clusters if self.n_clusters is not None else estimate.n_c
        result = spectral_cluster(
            W,
            n_c,
            seed=self.seed,
            eigenvalues=spectrum.eigenvalues,
            eigengap_profile=estimate.gaps,
        )
        self.affinity_matrix_ = W
        self.distance_matrix_ = D
        self.estimate_ = estimate
        self.eigenvalues_ = spectrum.eigenvalues
        self.eigengap_profile_ = estimate.gaps
        self.labels_ = result.labels
        self.n_clusters_ = result.n_c
        self.permutation_ = result.permutation
        self.community_result_ = result
        return self
