import numpy as np
import pytest

from wavecomm.errors import (
    HeterogeneousDatasetError,
    ThresholdTooAggressiveError,
    WavecommInputError,
)
from wavecomm.features import (
    CoefficientMatrix,
    assemble_coefficient_matrix,
    laplacian_score,
    resolve_threshold,
    select_features,
)
from wavecomm.wavelet import basis_filters, wavedec2


from helpers import brute_force_laplacian_scores as brute_force_scores


def toy_matrix(n=6, m=4, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(n, m))
    return CoefficientMatrix(
        values=values,
        image_ids=tuple(f"img{i}" for i in range(n)),
        feature_ids=tuple(f"f{j}" for j in range(m)),
    )


# ----------------------------------------------------------------- assembly

def test_identical_images_give_identical_rows():
    basis = basis_filters("db1")
    image = np.arange(64.0).reshape(8, 8)
    decs = [wavedec2(image, basis, 2) for _ in range(3)]
    C = assemble_coefficient_matrix(decs, ["a", "b", "c"])
    assert C.values.shape == (3, 64)
    np.testing.assert_array_equal(C.values[0], C.values[1])
    np.testing.assert_array_equal(C.values[0], C.values[2])


def test_mixed_sizes_rejected():
    basis = basis_filters("db1")
    decs = [
        wavedec2(np.ones((8, 8)), basis, 2),
        wavedec2(np.ones((16, 16)), basis, 2),
    ]
    with pytest.raises(HeterogeneousDatasetError):
        assemble_coefficient_matrix(decs, ["a", "b"])


def test_matrix_shape_from_bookkeeping():
    rng = np.random.default_rng(1)
    basis = basis_filters("db1")
    decs = [wavedec2(rng.uniform(0, 255, (16, 16)), basis, 2) for _ in range(5)]
    C = assemble_coefficient_matrix(decs, [f"i{k}" for k in range(5)])
    assert C.values.shape == (5, 256)
    assert len(C.feature_ids) == 256


def test_duplicate_image_ids_rejected():
    basis = basis_filters("db1")
    decs = [wavedec2(np.ones((4, 4)), basis, 1) for _ in range(2)]
    with pytest.raises(WavecommInputError):
        assemble_coefficient_matrix(decs, ["same", "same"])


# ------------------------------------------------------------------ scoring

def test_scores_match_brute_force_oracle():
    C = toy_matrix(n=6, m=4, seed=3)
    scores = laplacian_score(C, k_neighbors=2)
    expected_raw = brute_force_scores(C.values, k=2)
    np.testing.assert_allclose(scores.raw, expected_raw, atol=1e-10)
    np.testing.assert_allclose(scores.score, 1.0 / (1.0 + expected_raw), atol=1e-10)


def test_duplicated_columns_share_scores():
    base = toy_matrix(n=8, m=3, seed=4)
    dup = CoefficientMatrix(
        values=np.hstack([base.values, base.values[:, [1]]]),
        image_ids=base.image_ids,
        feature_ids=base.feature_ids + ("f1_copy",),
    )
    scores = laplacian_score(dup, k_neighbors=3)
    assert scores.score[1] == pytest.approx(scores.score[3], abs=1e-12)


def test_constant_column_scores_zero_with_warning():
    C = toy_matrix(n=6, m=3, seed=5)
    C.values[:, 1] = 7.0
    with pytest.warns(UserWarning, match="constant"):
        scores = laplacian_score(C, k_neighbors=2)
    assert scores.score[1] == 0.0
    assert scores.score[0] > 0.0


def test_row_permutation_invariance():
    C = toy_matrix(n=9, m=5, seed=6)
    scores = laplacian_score(C, k_neighbors=3)
    perm = np.random.default_rng(7).permutation(9)
    permuted = CoefficientMatrix(
        values=C.values[perm],
        image_ids=tuple(np.asarray(C.image_ids, dtype=object)[perm]),
        feature_ids=C.feature_ids,
    )
    scores_p = laplacian_score(permuted, k_neighbors=3)
    np.testing.assert_allclose(scores.score, scores_p.score, atol=1e-10)


def test_too_few_images_rejected():
    C = toy_matrix(n=2, m=3)
    with pytest.raises(WavecommInputError):
        laplacian_score(C)
    with pytest.raises(WavecommInputError):
        laplacian_score(toy_matrix(n=5, m=3), k_neighbors=5)


# ---------------------------------------------------------------- selection

def test_zero_threshold_keeps_everything():
    C = toy_matrix()
    scores = laplacian_score(C, k_neighbors=2)
    selected = select_features(C, scores, threshold=0.0)
    assert selected.feature_ids == C.feature_ids
    np.testing.assert_array_equal(selected.values, C.values)


def test_threshold_above_max_errors_with_max_named():
    C = toy_matrix()
    scores = laplacian_score(C, k_neighbors=2)
    with pytest.raises(ThresholdTooAggressiveError, match="max observed score"):
        select_features(C, scores, threshold=float(scores.score.max()) + 0.5)


def test_keep_top_half_of_distinct_scores():
    C = toy_matrix(n=10, m=4, seed=8)
    scores = laplacian_score(C, k_neighbors=3)
    assert len(set(np.round(scores.score, 12))) == 4  # distinct by construction
    selected = select_features(C, scores, keep_top=0.5)
    assert selected.n_features == 2
    expected = sorted(np.argsort(scores.score)[::-1][:2])
    assert selected.feature_ids == tuple(C.feature_ids[i] for i in expected)


def test_keep_top_matches_sort_oracle():
    C = toy_matrix(n=12, m=9, seed=9)
    scores = laplacian_score(C, k_neighbors=4)
    tau = resolve_threshold(scores, keep_top=0.33)
    assert tau == sorted(scores.score, reverse=True)[int(np.ceil(0.33 * 9)) - 1]


def test_threshold_nesting_is_monotone():
    C = toy_matrix(n=10, m=6, seed=10)
    scores = laplacian_score(C, k_neighbors=3)
    kept = []
    for tau in (0.9, 0.6, 0.3, 0.0):
        try:
            sel = select_features(C, scores, threshold=tau)
            kept.append(set(sel.feature_ids))
        except ThresholdTooAggressiveError:
            kept.append(set())
    for tighter, looser in zip(kept, kept[1:]):
        assert tighter <= looser


def test_selection_preserves_column_order():
    C = toy_matrix(n=10, m=6, seed=11)
    scores = laplacian_score(C, k_neighbors=3)
    sel = select_features(C, scores, keep_top=0.5)
    positions = [C.feature_ids.index(f) for f in sel.feature_ids]
    assert positions == sorted(positions)


def test_exactly_one_selection_mode():
    C = toy_matrix()
    scores = laplacian_score(C, k_neighbors=2)
    with pytest.raises(WavecommInputError):
        select_features(C, scores)
    with pytest.raises(WavecommInputError):
        select_features(C, scores, threshold=0.1, keep_top=0.5)
