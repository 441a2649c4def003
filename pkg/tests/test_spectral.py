import numpy as np
import pytest

from wavecomm.affinity import AffinityMatrix, graph_laplacian
from wavecomm.errors import WavecommInputError
from wavecomm.spectral import (
    CommunityResult,
    eigendecompose,
    estimate_num_clusters,
    reorder_similarity,
    spectral_cluster,
)


def block_affinity(sizes, within=0.9, cross=0.05, jitter=0.0, seed=0):
    """Planted block-structured affinity matrix."""
    rng = np.random.default_rng(seed)
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            base = within if labels[i] == labels[j] else cross
            w = base + (rng.uniform(-jitter, jitter) if jitter else 0.0)
            W[i, j] = W[j, i] = min(max(w, 0.0), 1.0)
    return AffinityMatrix(values=W, sigma=1.0), labels


def count_components_brute_force(adjacency):
    """Flood-fill component count; independent of any Laplacian math."""
    n = adjacency.shape[0]
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        while stack:
            u = stack.pop()
            if seen[u]:
                continue
            seen[u] = True
            stack.extend(v for v in range(n) if adjacency[u, v] and not seen[v])
    return count


# ------------------------------------------------------------ eigensolver

def test_identity_spectrum():
    spec = eigendecompose(np.eye(5), 3)
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0, 1.0], atol=1e-12)


def test_diagonal_matrix():
    spec = eigendecompose(np.diag([0.0, 1.0, 2.0]), 2)
    np.testing.assert_allclose(spec.eigenvalues, [0.0, 1.0], atol=1e-12)


def test_eigenpairs_residual_and_reconstruction():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(8, 8))
    A = (M + M.T) / 2
    spec = eigendecompose(A, 8)
    assert np.all(np.diff(spec.eigenvalues) >= -1e-12)
    norm = np.abs(A).max()
    for i in range(8):
        v = spec.eigenvectors[:, i]
        residual = np.abs(A @ v - spec.eigenvalues[i] * v).max()
        assert residual < 1e-8 * norm
    rebuilt = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.T
    assert np.abs(rebuilt - A).max() < 1e-8


def test_k_bounds():
    with pytest.raises(WavecommInputError):
        eigendecompose(np.eye(3), 4)
    with pytest.raises(WavecommInputError):
        eigendecompose(np.eye(3), 0)


# ------------------------------------------------------- cluster count

def test_three_component_spectrum():
    eigs = np.array([0.0, 0.0, 0.0, 0.8, 0.9, 1.0, 1.1])
    est = estimate_num_clusters(eigs, max_k=5, tau_c=0.1)
    assert est.by_eigengap == 3
    assert est.by_near_zero == 3
    assert est.n_c == 3


def test_uniform_spacing_warns_and_tie_breaks_to_smallest():
    eigs = np.linspace(0.0, 1.0, 11)
    with pytest.warns(UserWarning, match="uniform"):
        est = estimate_num_clusters(eigs, max_k=8)
    assert est.n_c == 1


def test_flat_spectrum_warns_n_c_one():
    eigs = np.full(10, 0.5)
    with pytest.warns(UserWarning, match="undifferentiated"):
        est = estimate_num_clusters(eigs, max_k=6)
    assert est.n_c == 1


def test_planted_four_blocks_estimated_and_verified_by_components():
    W, _ = block_affinity([10, 10, 10, 10], within=0.9, cross=0.05, jitter=0.04, seed=1)
    # independent check: thresholding midway disconnects exactly 4 components
    adjacency = W.values > 0.5
    assert count_components_brute_force(adjacency) == 4

    L = graph_laplacian(W, "symmetric")
    eigs = eigendecompose(L, 15).eigenvalues
    est = estimate_num_clusters(eigs, max_k=10)
    assert est.by_eigengap == 4


def test_disconnected_graph_both_heuristics_agree():
    for k in (2, 3, 5):
        W, _ = block_affinity([4] * k, within=0.8, cross=0.0, jitter=0.0)
        L = graph_laplacian(W, "symmetric")
        eigs = eigendecompose(L, 4 * k).eigenvalues
        est = estimate_num_clusters(eigs, max_k=2 * k)
        assert est.by_eigengap == k
        assert est.by_near_zero == k


def test_requires_enough_eigenvalues():
    with pytest.raises(WavecommInputError):
        estimate_num_clusters([0.0, 0.1, 0.2], max_k=3)


# --------------------------------------------------------- clustering

def test_two_exact_blocks_recovered():
    W, truth = block_affinity([5, 3], within=0.9, cross=0.0)
    result = spectral_cluster(W, 2, seed=0)
    # canonical ids: bigger block first
    assert result.members(0) == [str(i) for i in range(5)]
    assert result.members(1) == [str(i) for i in range(5, 8)]


def test_single_cluster():
    W, _ = block_affinity([6], within=0.7)
    result = spectral_cluster(W, 1, seed=0)
    assert set(result.labels) == {0}
    assert result.n_c == 1


def test_determinism_same_bytes():
    W, _ = block_affinity([6, 5, 4], within=0.85, cross=0.1, jitter=0.05, seed=2)
    a = spectral_cluster(W, 3, seed=7)
    b = spectral_cluster(W, 3, seed=7)
    assert a.to_json() == b.to_json()


def test_partition_equivariant_under_relabeling():
    W, _ = block_affinity([6, 5, 4], within=0.9, cross=0.05, jitter=0.02, seed=3)
    ids = tuple(f"img{i}" for i in range(15))
    base = spectral_cluster(W, 3, seed=5, image_ids=ids)

    rng = np.random.default_rng(4)
    perm = rng.permutation(15)
    Wp = AffinityMatrix(values=W.values[np.ix_(perm, perm)], sigma=W.sigma)
    permuted_ids = tuple(ids[i] for i in perm)
    moved = spectral_cluster(Wp, 3, seed=5, image_ids=permuted_ids)

    # distinct block sizes make canonical cluster ids line up exactly
    assert moved.assignments == base.assignments


def test_isolated_node_becomes_singleton():
    W_vals = np.zeros((5, 5))
    W_vals[0, 1] = W_vals[1, 0] = 0.9
    W_vals[2, 3] = W_vals[3, 2] = 0.9
    W = AffinityMatrix(values=W_vals, sigma=1.0)
    result = spectral_cluster(W, 3, seed=0)
    singleton = [c for c in range(result.n_c) if result.members(c) == ["4"]]
    assert len(singleton) == 1


def test_json_roundtrip():
    W, _ = block_affinity([4, 3], within=0.9, cross=0.1)
    result = spectral_cluster(W, 2, seed=1, image_ids=[f"x{i}" for i in range(7)])
    clone = CommunityResult.from_json(result.to_json())
    assert clone.to_json() == result.to_json()
    assert clone.assignments == result.assignments


# --------------------------------------------------------- reordering

def test_already_ordered_identity_permutation():
    W, _ = block_affinity([4, 2], within=0.9, cross=0.0)
    result = spectral_cluster(W, 2, seed=0)
    np.testing.assert_array_equal(result.permutation, np.arange(6))
    reordered, boundaries = reorder_similarity(W, result)
    np.testing.assert_array_equal(reordered, W.values)
    assert boundaries == [4, 6]


def test_label_reversal_same_blocks():
    W, _ = block_affinity([4, 2], within=0.9, cross=0.0)
    result = spectral_cluster(W, 2, seed=0)
    flipped = CommunityResult(
        n_c=2,
        image_ids=result.image_ids,
        labels=1 - result.labels,
        permutation=np.lexsort((np.arange(6), 1 - result.labels)),
        eigenvalues=result.eigenvalues,
        eigengap_profile=result.eigengap_profile,
    )
    _, boundaries_a = reorder_similarity(W, result)
    _, boundaries_b = reorder_similarity(W, flipped)
    assert sorted(np.diff([0] + boundaries_a).tolist()) == sorted(np.diff([0] + boundaries_b).tolist())


def test_scrambled_block_matrix_recovers_blocks():
    rng = np.random.default_rng(5)
    W, truth = block_affinity([5, 4, 3], within=0.9, cross=0.02, jitter=0.01, seed=6)
    perm = rng.permutation(12)
    scrambled = AffinityMatrix(values=W.values[np.ix_(perm, perm)], sigma=1.0)
    result = spectral_cluster(scrambled, 3, seed=0)
    reordered, boundaries = reorder_similarity(scrambled, result)
    assert boundaries == [5, 9, 12]
    # total off-block mass unchanged by any permutation
    def offblock_mass(M, bounds):
        mask = np.ones_like(M, dtype=bool)
        start = 0
        for end in bounds:
            mask[start:end, start:end] = False
            start = end
        return M[mask].sum()

    assert offblock_mass(reordered, boundaries) == pytest.approx(
        offblock_mass(W.values, [5, 9, 12]), abs=1e-9
    )
    # within-block affinities dominate in the reordered matrix
    start = 0
    for end in boundaries:
        block = reordered[start:end, start:end]
        off = np.ones_like(reordered, dtype=bool)
        assert block[~np.eye(end - start, dtype=bool)].mean() > 0.5
        start = end
