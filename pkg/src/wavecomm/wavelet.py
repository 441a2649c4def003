"""Multi-level 2-D discrete wavelet transform for the Daubechies family.

The transform uses periodic (circular) boundary extension with stride-2
downsampling, which keeps the filter bank exactly orthonormal: the total
coefficient count equals the (padded) pixel count, the coefficient vector
has the same 2-norm as the padded image, and reconstruction is exact to
rounding.  Odd-sized inputs are padded by edge replication to the next even
size at each level; the bookkeeping records the original shape so the
inverse can crop.

Coefficient ordering inside the flat vector is fixed: the level-N
approximation first, then per level N..1 the horizontal, vertical, and
diagonal detail subbands (coarsest to finest), each flattened row-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    CorruptDecompositionError,
    DecompositionDepthError,
    WavecommInputError,
)
from .validation import as_float_matrix, as_float_vector, check_positive_int

# Orthonormal Daubechies decomposition low-pass taps (sum h = sqrt(2),
# sum h^2 = 1), computed by spectral factorization at 60-digit precision
# and rounded to the nearest float64.
_LO_D = {
    "db1": (
        0.7071067811865475244,
        0.7071067811865475244,
    ),
    "db2": (
        -0.12940952255126038117,
        0.22414386804201338103,
        0.83651630373780790558,
        0.48296291314453414337,
    ),
    "db3": (
        0.035226291885709536603,
        -0.085441273882026661693,
        -0.1350110200102545887,
        0.4598775021184915701,
        0.80689150931109257649,
        0.332670552950082616,
    ),
    "db4": (
        -0.010597401785069032105,
        0.032883011666885199735,
        0.030841381835560763627,
        -0.18703481171909308408,
        -0.027983769416859854211,
        0.63088076792985890788,
        0.71484657055291564709,
        0.23037781330889650086,
    ),
    "db5": (
        0.003335725285473771278,
        -0.012580751999081999469,
        -0.0062414902127982742742,
        0.077571493840045713523,
        -0.032244869584638374648,
        -0.24229488706638203186,
        0.13842814590132073151,
        0.72430852843777292773,
        0.60382926979718967054,
        0.16010239797419291448,
    ),
}

BASIS_NAMES = tuple(sorted(_LO_D))

SUBBAND_CODES = {"approx": "a", "horizontal": "h", "vertical": "v", "diagonal": "d"}


@dataclass(frozen=True)
class WaveletBasis:
    """Named orthonormal Daubechies filter bank.

    ``lo_d``/``hi_d`` are the decomposition low/high-pass taps; the
    reconstruction filters ``lo_r``/``hi_r`` are their time reversals.
    The high-pass is the quadrature mirror of the low-pass:
    ``hi_d[k] = (-1)**k * lo_d[2*order - 1 - k]``.
    """

    name: str
    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray

    @property
    def order(self) -> int:
        return len(self.lo_d) // 2


@dataclass(frozen=True)
class BetaEntry:
    """Shape record for one subband: (level, subband, rows, cols)."""

    level: int
    subband: str
    rows: int
    cols: int

    @property
    def size(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Bookkeeping:
    """Subband shape table plus the original image shape (for cropping).

    Depends only on (image size, basis order, levels): identical for every
    image of one dataset.
    """

    entries: tuple[BetaEntry, ...]
    image_shape: tuple[int, int]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def total_size(self) -> int:
        return sum(e.size for e in self.entries)


@dataclass
class DecompResult:
    """Flat coefficient vector with its bookkeeping table."""

    omega: np.ndarray
    beta: Bookkeeping
    levels: int


def basis_filters(name: str) -> WaveletBasis:
    """Return the filter bank for a supported basis name (db1..db5)."""
    try:
        lo_d = np.array(_LO_D[name], dtype=np.float64)
    except (KeyError, TypeError):
        raise ConfigurationError(
            f"unsupported wavelet basis {name!r}; expected one of {', '.join(BASIS_NAMES)}"
        ) from None
    taps = len(lo_d)
    signs = (-1.0) ** np.arange(taps)
    hi_d = signs * lo_d[::-1]
    return WaveletBasis(
        name=name,
        lo_d=lo_d,
        hi_d=hi_d,
        lo_r=lo_d[::-1].copy(),
        hi_r=hi_d[::-1].copy(),
    )


def _dwt_along_axis(x: np.ndarray, basis: WaveletBasis, axis: int):
    """One analysis step along ``axis`` (length must be even)."""
    x = np.moveaxis(x, axis, 0)
    n = x.shape[0]
    half = n // 2
    taps = len(basis.lo_d)
    idx = (2 * np.arange(half)[:, None] + np.arange(taps)[None, :]) % n
    windows = x[idx]  # (half, taps, ...)
    approx = np.tensordot(windows, basis.lo_d, axes=([1], [0]))
    detail = np.tensordot(windows, basis.hi_d, axes=([1], [0]))
    return np.moveaxis(approx, 0, axis), np.moveaxis(detail, 0, axis)


def _idwt_along_axis(approx: np.ndarray, detail: np.ndarray, basis: WaveletBasis, axis: int):
    """Exact inverse of :func:`_dwt_along_axis` (transpose of the analysis map)."""
    a = np.moveaxis(approx, axis, 0)
    d = np.moveaxis(detail, axis, 0)
    half = a.shape[0]
    n = 2 * half
    out = np.zeros((n,) + a.shape[1:], dtype=np.float64)
    positions = 2 * np.arange(half)
    for k in range(len(basis.lo_d)):
        out[(positions + k) % n] += basis.lo_d[k] * a + basis.hi_d[k] * d
    return np.moveaxis(out, 0, axis)


def dwt_step_1d(signal, basis: WaveletBasis):
    """Single-level 1-D analysis: (approx, detail), each half the length.

    The signal length must be at least 2 and even.
    """
    x = as_float_vector(signal, "signal")
    if x.size == 0:
        raise WavecommInputError("empty signal")
    if x.size < 2 or x.size % 2:
        raise WavecommInputError(
            f"signal length must be >= 2 and even, got {x.size}"
        )
    approx, detail = _dwt_along_axis(x, basis, 0)
    return approx, detail


def idwt_step_1d(approx, detail, basis: WaveletBasis) -> np.ndarray:
    """Invert one 1-D analysis step."""
    a = as_float_vector(approx, "approx")
    d = as_float_vector(detail, "detail")
    if a.size != d.size or a.size == 0:
        raise WavecommInputError("approx and detail must be non-empty and equal length")
    return _idwt_along_axis(a, d, basis, 0)


def _pad_even(a: np.ndarray) -> np.ndarray:
    """Edge-replicate the last row/column so both dims are even."""
    pr = a.shape[0] % 2
    pc = a.shape[1] % 2
    if pr or pc:
        a = np.pad(a, ((0, pr), (0, pc)), mode="edge")
    return a


def _level_shapes(image_shape: tuple[int, int], levels: int):
    """Per-level (input_shape, padded_shape) cascade, level 1..levels."""
    shapes = []
    shape = tuple(image_shape)
    for _ in range(levels):
        if shape[0] < 2 or shape[1] < 2:
            raise DecompositionDepthError(
                f"{levels} levels is too deep for a {image_shape[0]}x{image_shape[1]} image"
            )
        padded = (shape[0] + shape[0] % 2, shape[1] + shape[1] % 2)
        shapes.append((shape, padded))
        shape = (padded[0] // 2, padded[1] // 2)
    return shapes


def wavedec2(image, basis: WaveletBasis, levels: int) -> DecompResult:
    """Multi-level separable 2-D decomposition of a grayscale matrix.

    Recursively splits the approximation subband; each level yields
    horizontal (high-pass along axis 1), vertical (high-pass along axis 0)
    and diagonal (high-pass along both) details.
    """
    img = as_float_matrix(image, "image")
    levels = check_positive_int(levels, "levels")
    cascade = _level_shapes(img.shape, levels)

    details = []  # (level, h, v, d), finest first
    approx = img
    for level, (_, _padded) in enumerate(cascade, start=1):
        approx = _pad_even(approx)
        lo_c, hi_c = _dwt_along_axis(approx, basis, 1)
        ll, lh = _dwt_along_axis(lo_c, basis, 0)
        hl, hh = _dwt_along_axis(hi_c, basis, 0)
        # high-pass along axis 1 only -> horizontal structure
        details.append((level, hl, lh, hh))
        approx = ll

    entries = [BetaEntry(levels, "approx", approx.shape[0], approx.shape[1])]
    chunks = [approx.ravel()]
    for level, h, v, d in reversed(details):
        for subband, block in (("horizontal", h), ("vertical", v), ("diagonal", d)):
            entries.append(BetaEntry(level, subband, block.shape[0], block.shape[1]))
            chunks.append(block.ravel())

    beta = Bookkeeping(entries=tuple(entries), image_shape=(img.shape[0], img.shape[1]))
    return DecompResult(omega=np.concatenate(chunks), beta=beta, levels=levels)


def waverec2(decomp: DecompResult, basis: WaveletBasis) -> np.ndarray:
    """Reconstruct the image from a :class:`DecompResult`.

    Exact inverse of :func:`wavedec2` for the same basis; output has the
    original image shape.
    """
    beta = decomp.beta
    omega = np.asarray(decomp.omega, dtype=np.float64)
    if omega.ndim != 1 or beta.total_size() != omega.size:
        raise CorruptDecompositionError(
            f"bookkeeping expects {beta.total_size()} coefficients, omega has {omega.size}"
        )

    cascade = _level_shapes(beta.image_shape, decomp.levels)

    blocks = {}
    offset = 0
    for entry in beta:
        block = omega[offset : offset + entry.size].reshape(entry.rows, entry.cols)
        blocks[(entry.level, entry.subband)] = block
        offset += entry.size

    approx = blocks.get((decomp.levels, "approx"))
    if approx is None:
        raise CorruptDecompositionError("bookkeeping is missing the approximation subband")

    for level in range(decomp.levels, 0, -1):
        input_shape, padded = cascade[level - 1]
        try:
            h = blocks[(level, "horizontal")]
            v = blocks[(level, "vertical")]
            d = blocks[(level, "diagonal")]
        except KeyError:
            raise CorruptDecompositionError(
                f"bookkeeping is missing detail subbands for level {level}"
            ) from None
        expect = (padded[0] // 2, padded[1] // 2)
        if not (approx.shape == h.shape == v.shape == d.shape == expect):
            raise CorruptDecompositionError(
                f"subband shapes at level {level} do not match the image-size cascade"
            )
        lo_c = _idwt_along_axis(approx, v, basis, 0)
        hi_c = _idwt_along_axis(h, d, basis, 0)
        full = _idwt_along_axis(lo_c, hi_c, basis, 1)
        approx = full[: input_shape[0], : input_shape[1]]

    return approx


def coefficient_labels(beta: Bookkeeping) -> list[str]:
    """Stable per-coefficient column labels, e.g. ``L3a_0_0``, ``L1d_7_4``."""
    labels = []
    for entry in beta:
        code = SUBBAND_CODES[entry.subband]
        prefix = f"L{entry.level}{code}"
        labels.extend(
            f"{prefix}_{r}_{c}" for r in range(entry.rows) for c in range(entry.cols)
        )
    return labels


def max_levels(image_shape: tuple[int, int]) -> int:
    """Largest level count wavedec2 accepts for this image size."""
    rows, cols = image_shape
    levels = 0
    while rows >= 2 and cols >= 2:
        levels += 1
        rows = (rows + rows % 2) // 2
        cols = (cols + cols % 2) // 2
    return levels
