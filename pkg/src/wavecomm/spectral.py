"""Eigendecomposition, cluster-count estimation, spectral clustering, reordering.

Cluster count comes from the eigengap heuristic on the smallest Laplacian
eigenvalues (the standard reading); a near-zero count mode
(#{eigenvalues < tau_c}) is computed alongside it because the two readings
disagree on real spectra and both are worth reporting.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .affinity import AffinityMatrix, LaplacianMatrix, graph_laplacian
from .errors import NumericalError, WavecommInputError
from .validation import as_float_vector, check_positive_int

logger = logging.getLogger("wavecomm")

GAP_NOISE_FLOOR = 1e-12


@dataclass
class LaplacianSpectrum:
    """The k smallest eigenpairs of a symmetric matrix, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # n x k, column i pairs with eigenvalues[i]


@dataclass
class ClusterCountEstimate:
    """Cluster-count readings of one eigenvalue sequence.

    ``n_c`` is the chosen estimate (per ``mode``); both heuristics are
    always reported.
    """

    n_c: int
    by_eigengap: int
    by_near_zero: int
    gaps: np.ndarray
    tau_c: float
    mode: str


@dataclass
class CommunityResult:
    """Cluster assignments plus the spectral evidence behind them."""

    n_c: int
    image_ids: tuple[str, ...]
    labels: np.ndarray  # cluster id per image index
    permutation: np.ndarray  # image indices grouped by cluster
    eigenvalues: np.ndarray
    eigengap_profile: np.ndarray
    seed: int = 0

    @property
    def assignments(self) -> dict[str, int]:
        return {i: int(c) for i, c in zip(self.image_ids, self.labels)}

    def members(self, cluster_id: int) -> list[str]:
        return [self.image_ids[i] for i in np.flatnonzero(self.labels == cluster_id)]

    def cluster_sizes(self) -> list[int]:
        return [int(np.sum(self.labels == c)) for c in range(self.n_c)]

    def to_json(self) -> str:
        payload = {
            "n_c": int(self.n_c),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "gaps": [float(g) for g in self.eigengap_profile],
            "clusters": [
                {"id": c, "size": int(np.sum(self.labels == c)), "members": self.members(c)}
                for c in range(self.n_c)
            ],
            "permutation": [int(i) for i in self.permutation],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CommunityResult":
        payload = json.loads(text)
        member_to_cluster = {}
        ids_in_order = []
        for cluster in payload["clusters"]:
            for member in cluster["members"]:
                member_to_cluster[member] = cluster["id"]
        permutation = np.asarray(payload["permutation"], dtype=np.int64)
        # members are listed per cluster; rebuild index order via permutation
        flat = [m for cluster in payload["clusters"] for m in cluster["members"]]
        n = len(flat)
        ids_in_order = [""] * n
        for pos, idx in enumerate(permutation):
            ids_in_order[int(idx)] = flat[pos]
        labels = np.array([member_to_cluster[i] for i in ids_in_order], dtype=np.int64)
        return cls(
            n_c=int(payload["n_c"]),
            image_ids=tuple(ids_in_order),
            labels=labels,
            permutation=permutation,
            eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
            eigengap_profile=np.asarray(payload["gaps"], dtype=np.float64),
        )


def eigendecompose(L: LaplacianMatrix | np.ndarray, k: int) -> LaplacianSpectrum:
    """k smallest eigenpairs of a symmetric matrix, ascending order."""
    values = L.values if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=np.float64)
    n = values.shape[0]
    k = check_positive_int(k, "k")
    if k > n:
        raise WavecommInputError(f"k={k} exceeds matrix size {n}")
    try:
        eigvals, eigvecs = scipy.linalg.eigh(values, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise NumericalError(f"eigendecomposition failed to converge: {exc}") from exc
    return LaplacianSpectrum(eigenvalues=eigvals, eigenvectors=eigvecs)


def estimate_num_clusters(
    eigenvalues,
    max_k: int,
    tau_c: float | None = None,
    mode: str = "eigengap",
) -> ClusterCountEstimate:
    """Estimate the community count from ascending Laplacian eigenvalues.

    eigengap mode picks argmax over 1 <= i <= max_k of (lambda_{i+1} -
    lambda_i); ties break to the smallest index.  near-zero mode counts
    eigenvalues below ``tau_c`` (default: 1e-6 times the largest eigenvalue
    seen).  Needs at least max_k + 1 eigenvalues.
    """
    eigs = as_float_vector(eigenvalues, "eigenvalues")
    max_k = check_positive_int(max_k, "max_k")
    if eigs.size < max_k + 1:
        raise WavecommInputError(
            f"need at least max_k+1={max_k + 1} eigenvalues, got {eigs.size}"
        )
    if np.any(np.diff(eigs) < -1e-10):
        raise WavecommInputError("eigenvalues must be ascending")
    if mode not in ("eigengap", "near_zero"):
        raise WavecommInputError(f"unknown mode {mode!r}")

    gaps = np.diff(eigs[: max_k + 1])
    if gaps.max() < GAP_NOISE_FLOOR:
        warnings.warn(
            "undifferentiated spectrum: all eigengaps below noise floor; n_c = 1",
            stacklevel=2,
        )
        by_eigengap = 1
    else:
        if np.ptp(gaps) < GAP_NOISE_FLOOR:
            warnings.warn(
                "uniformly spaced eigenvalues: taking the largest gap at the smallest index",
                stacklevel=2,
            )
        # ties (within noise) break to the smallest index
        by_eigengap = int(np.argmax(gaps >= gaps.max() - GAP_NOISE_FLOOR)) + 1

    if tau_c is None:
        scale = float(np.abs(eigs).max())
        tau_c = 1e-6 * scale if scale > 0 else GAP_NOISE_FLOOR
    by_near_zero = max(1, int(np.sum(eigs < tau_c)))

    n_c = by_eigengap if mode == "eigengap" else by_near_zero
    return ClusterCountEstimate(
        n_c=n_c,
        by_eigengap=by_eigengap,
        by_near_zero=by_near_zero,
        gaps=gaps,
        tau_c=float(tau_c),
        mode=mode,
    )


def _canonical_relabel(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters by descending size, ties by smallest member index."""
    ids = [c for c in np.unique(labels)]
    order = sorted(
        ids,
        key=lambda c: (-int(np.sum(labels == c)), int(np.flatnonzero(labels == c)[0])),
    )
    mapping = {old: new for new, old in enumerate(order)}
    return np.array([mapping[c] for c in labels], dtype=np.int64)


def spectral_cluster(
    W: AffinityMatrix,
    n_c: int,
    seed: int = 0,
    image_ids=None,
    eigenvalues: np.ndarray | None = None,
    eigengap_profile: np.ndarray | None = None,
) -> CommunityResult:
    """Normalized spectral clustering of the affinity graph into n_c groups.

    Rows of the n x n_c matrix of the smallest symmetric-Laplacian
    eigenvectors are unit-normalized and clustered with k-means (k-means++
    from ``seed``, 50 restarts, best inertia).  Deterministic given
    (W, n_c, seed).  Isolated nodes become singleton clusters when n_c
    leaves room, otherwise they follow the nearest centroid.
    """
    from sklearn.cluster import KMeans

    n = W.n
    n_c = check_positive_int(n_c, "n_c")
    if n_c > n:
        raise WavecommInputError(f"n_c={n_c} exceeds the number of images {n}")
    if image_ids is None:
        image_ids = tuple(str(i) for i in range(n))
    image_ids = tuple(str(i) for i in image_ids)
    if len(image_ids) != n:
        raise WavecommInputError(f"{len(image_ids)} image ids for {n} images")

    degrees = W.values.sum(axis=1)
    isolated = np.flatnonzero(degrees == 0)
    connected = np.flatnonzero(degrees > 0)

    L = graph_laplacian(W, "symmetric")
    if eigenvalues is None:
        eigenvalues = eigendecompose(L, min(n, n_c + 1)).eigenvalues
    if eigengap_profile is None:
        eigengap_profile = np.diff(np.asarray(eigenvalues))

    labels = np.full(n, -1, dtype=np.int64)
    if n_c == 1:
        labels[:] = 0
    elif isolated.size and n_c > isolated.size and connected.size:
        logger.warning(
            "%d isolated node(s): assigning each its own singleton cluster",
            isolated.size,
        )
        k_rest = n_c - isolated.size
        sub = W.values[np.ix_(connected, connected)]
        sub_result = _cluster_embedding(sub, k_rest, seed, KMeans)
        labels[connected] = sub_result
        for offset, idx in enumerate(isolated):
            labels[idx] = k_rest + offset
    else:
        if isolated.size:
            logger.warning(
                "%d isolated node(s) with n_c=%d: assigning by nearest centroid",
                isolated.size,
                n_c,
            )
        labels[:] = _cluster_embedding(W.values, n_c, seed, KMeans)

    labels = _canonical_relabel(labels)
    order = np.lexsort((np.arange(n), labels))
    return CommunityResult(
        n_c=int(labels.max()) + 1,
        image_ids=image_ids,
        labels=labels,
        permutation=np.asarray(order, dtype=np.int64),
        eigenvalues=np.asarray(eigenvalues, dtype=np.float64),
        eigengap_profile=np.asarray(eigengap_profile, dtype=np.float64),
        seed=seed,
    )


def _cluster_embedding(W_values: np.ndarray, k: int, seed: int, KMeans) -> np.ndarray:
    """k-means over the row-normalized spectral embedding of W."""
    if k == 1:
        return np.zeros(W_values.shape[0], dtype=np.int64)
    L = graph_laplacian(AffinityMatrix(values=W_values, sigma=1.0), "symmetric")
    spectrum = eigendecompose(L, k)
    U = spectrum.eigenvectors
    norms = np.linalg.norm(U, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    embedding = U / safe[:, None]
    km = KMeans(n_clusters=k, n_init=50, random_state=seed)
    return km.fit_predict(embedding).astype(np.int64)


def reorder_similarity(W: AffinityMatrix, result: CommunityResult):
    """Symmetric permutation grouping clusters contiguously.

    Returns (reordered matrix, block boundaries) where boundaries[c] is the
    end index (exclusive) of cluster c in permutation order.
    """
    if len(result.labels) != W.n:
        raise WavecommInputError("assignments do not cover the affinity matrix")
    perm = result.permutation
    reordered = W.values[np.ix_(perm, perm)]
    sizes = result.cluster_sizes()
    boundaries = np.cumsum(sizes).tolist()
    return reordered, boundaries
