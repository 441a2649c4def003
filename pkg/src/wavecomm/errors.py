"""Exception hierarchy shared by all wavecomm modules.

``WavecommInputError`` covers everything a caller can fix by changing their
input (bad paths, bad configuration, malformed data); the CLI maps it to
exit code 2.  Every other ``WavecommError`` is a stage failure (exit code 1).
"""


class WavecommError(Exception):
    """Base class for all wavecomm errors."""


class WavecommInputError(WavecommError, ValueError):
    """Invalid user input: bad configuration, paths, or malformed data."""


class ConfigurationError(WavecommInputError):
    """Unsupported or inconsistent configuration value."""


class DecompositionDepthError(WavecommInputError):
    """Requested wavelet level count too deep for the image size."""


class CorruptDecompositionError(WavecommError):
    """Coefficient vector and bookkeeping table disagree."""


class HeterogeneousDatasetError(WavecommInputError):
    """Images in one dataset produced different bookkeeping tables."""


class ThresholdTooAggressiveError(WavecommInputError):
    """Feature selection threshold would discard every column."""


class DegenerateFeatureError(WavecommInputError):
    """A row has zero variance under a metric that requires variance."""


class DegenerateGeometryError(WavecommError):
    """All pairwise distances are equal; no affinity bandwidth exists."""


class InvalidAffinityError(WavecommInputError):
    """Affinity input is not symmetric (or otherwise malformed)."""


class NumericalError(WavecommError):
    """An iterative numerical routine failed to converge."""


class InsufficientClassError(WavecommInputError):
    """A label class is too small for the requested analysis."""


class CorruptArtifactError(WavecommError):
    """A persisted artifact file is truncated or malformed."""


class ArtifactVersionError(CorruptArtifactError):
    """A persisted artifact was written with an unknown format version."""


class MissingArtifactError(WavecommInputError):
    """A required artifact is absent from the run directory."""
