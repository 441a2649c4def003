"""Input validation helpers used across the package."""

from __future__ import annotations

import numpy as np

from .errors import InvalidAffinityError, WavecommInputError


def as_float_matrix(x, name: str = "array") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise WavecommInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise WavecommInputError(f"{name} contains non-finite values")
    return arr


def as_float_vector(x, name: str = "array") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise WavecommInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise WavecommInputError(f"{name} contains non-finite values")
    return arr


def check_square_symmetric(a, name: str = "matrix", tol: float = 1e-10) -> np.ndarray:
    """Validate an n-by-n symmetric float matrix; returns the coerced array."""
    arr = as_float_matrix(a, name)
    n, m = arr.shape
    if n != m:
        raise InvalidAffinityError(f"{name} must be square, got {arr.shape}")
    scale = max(1.0, float(np.abs(arr).max(initial=0.0)))
    asym = float(np.abs(arr - arr.T).max(initial=0.0))
    if asym > tol * scale:
        raise InvalidAffinityError(
            f"{name} is asymmetric beyond tolerance (max |A - A.T| = {asym:.3e})"
        )
    return arr


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise WavecommInputError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
