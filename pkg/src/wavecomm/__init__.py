"""wavecomm: community detection in image datasets via wavelets and spectral methods."""

from .affinity import (
    AffinityMatrix,
    DistanceMatrix,
    LaplacianMatrix,
    affinity_from_distances,
    graph_laplacian,
    pairwise_distances,
)
from .estimators import LaplacianScoreSelector, SpectralCommunities, WaveletFeatures
from .features import (
    CoefficientMatrix,
    FeatureScores,
    assemble_coefficient_matrix,
    laplacian_score,
    select_features,
)
from .pipeline import RunConfig, detect, spectrum_report
from .spectral import (
    CommunityResult,
    LaplacianSpectrum,
    eigendecompose,
    estimate_num_clusters,
    reorder_similarity,
    spectral_cluster,
)
from .spectrum import (
    SpectrumPlacement,
    class_similarity_stats,
    find_borderline,
    find_isolated,
    infer_spectrum,
    spectrum_position,
)
from .wavelet import (
    BASIS_NAMES,
    Bookkeeping,
    DecompResult,
    WaveletBasis,
    basis_filters,
    dwt_step_1d,
    idwt_step_1d,
    wavedec2,
    waverec2,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "BASIS_NAMES",
    "Bookkeeping",
    "CoefficientMatrix",
    "CommunityResult",
    "DecompResult",
    "DistanceMatrix",
    "FeatureScores",
    "LaplacianMatrix",
    "LaplacianScoreSelector",
    "LaplacianSpectrum",
    "RunConfig",
    "SpectralCommunities",
    "SpectrumPlacement",
    "WaveletBasis",
    "WaveletFeatures",
    "affinity_from_distances",
    "assemble_coefficient_matrix",
    "basis_filters",
    "class_similarity_stats",
    "detect",
    "dwt_step_1d",
    "eigendecompose",
    "estimate_num_clusters",
    "find_borderline",
    "find_isolated",
    "graph_laplacian",
    "idwt_step_1d",
    "infer_spectrum",
    "laplacian_score",
    "pairwise_distances",
    "reorder_similarity",
    "select_features",
    "spectral_cluster",
    "spectrum_position",
    "spectrum_report",
    "wavedec2",
    "waverec2",
]
