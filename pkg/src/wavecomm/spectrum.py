"""Severity-axis placement from in-class vs out-class affinities.

Each labeled image gets ``position = class_sign * (in_class_sim -
out_class_sim)``: images whose similarities straddle the two classes land
near 0 (the borderline), strongly in-class images land far out on their
class's side.  This realization of the severity axis is a documented
interpretation; the flags are:

* ``borderline`` - |position| below the band, or position on the wrong
  side of the borderline for its class;
* ``isolated``   - in-class similarity in the bottom quantile of its class;
* ``extreme``    - |position| in the top decile, on the correct side.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .affinity import AffinityMatrix
from .errors import InsufficientClassError, WavecommInputError

DEFAULT_ISOLATION_QUANTILE = 0.05
MIN_CLASS_FOR_QUANTILE = 5


@dataclass
class SpectrumPlacement:
    image_id: str
    class_label: str
    in_class_sim: float
    out_class_sim: float
    position: float
    flags: frozenset[str] = field(default_factory=frozenset)

    def payload(self) -> dict:
        return {
            "id": self.image_id,
            "label": self.class_label,
            "in": self.in_class_sim,
            "out": self.out_class_sim,
            "position": self.position,
            "flags": sorted(self.flags),
        }


def _check_labels(W: AffinityMatrix, labels) -> np.ndarray:
    labels = np.asarray([str(l) for l in labels], dtype=object)
    if labels.size != W.n:
        raise WavecommInputError(f"{labels.size} labels for {W.n} images")
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise InsufficientClassError(
            "spectrum inference needs two classes, got " + repr(list(classes))
        )
    small = [str(c) for c, k in zip(classes, counts) if k < 2]
    if small:
        raise InsufficientClassError(f"class(es) {small} have fewer than 2 members")
    return labels


def class_similarity_stats(W: AffinityMatrix, labels):
    """Per-image mean affinity to its own class (self excluded) vs the rest.

    With more than two classes the out-class mean pools every other class
    (one-vs-rest per query image's class).
    """
    labels = _check_labels(W, labels)
    n = W.n
    in_sim = np.zeros(n)
    out_sim = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        same[i] = False
        in_sim[i] = W.values[i, same].mean()
        out_sim[i] = W.values[i, ~same & (np.arange(n) != i)].mean()
    return in_sim, out_sim


def spectrum_position(in_class_sim, out_class_sim, class_sign: int):
    """Signed severity-axis coordinate; borderline sits at zero."""
    if class_sign not in (1, -1):
        raise WavecommInputError(f"class_sign must be +1 or -1, got {class_sign}")
    return class_sign * (np.asarray(in_class_sim) - np.asarray(out_class_sim))


def find_isolated(W: AffinityMatrix, labels, quantile: float = DEFAULT_ISOLATION_QUANTILE):
    """Images whose in-class similarity is anomalously low for their class.

    Returns indices of images below their class's ``quantile`` of the
    in-class-similarity distribution; classes smaller than 5 members are
    skipped with a warning.
    """
    if not 0.0 < quantile < 1.0:
        raise WavecommInputError(f"quantile must be in (0, 1), got {quantile}")
    labels = _check_labels(W, labels)
    in_sim, _ = class_similarity_stats(W, labels)
    flagged = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < MIN_CLASS_FOR_QUANTILE:
            warnings.warn(
                f"class {cls!r} has only {members.size} members; "
                "isolation quantile is not meaningful, skipping",
                stacklevel=2,
            )
            continue
        cutoff = np.quantile(in_sim[members], quantile)
        flagged.extend(int(i) for i in members[in_sim[members] < cutoff])
    return sorted(flagged)


def infer_spectrum(
    W: AffinityMatrix,
    labels,
    image_ids=None,
    positive_class: str | None = None,
    band: float | None = None,
    quantile: float = DEFAULT_ISOLATION_QUANTILE,
) -> list[SpectrumPlacement]:
    """Place every labeled image on the severity axis and flag outliers.

    Requires exactly two classes.  ``positive_class`` picks the +1 side
    (default: lexicographically larger label).  ``band`` is the borderline
    half-width (default: 10th percentile of |position|).
    """
    labels = _check_labels(W, labels)
    classes = sorted(np.unique(labels))
    if len(classes) != 2:
        raise InsufficientClassError(
            f"severity axis needs exactly two classes, got {len(classes)}"
        )
    if positive_class is None:
        positive_class = classes[1]
    elif positive_class not in classes:
        raise WavecommInputError(f"positive_class {positive_class!r} not among {classes}")
    if image_ids is None:
        image_ids = [str(i) for i in range(W.n)]
    image_ids = [str(i) for i in image_ids]
    if len(image_ids) != W.n:
        raise WavecommInputError(f"{len(image_ids)} image ids for {W.n} images")

    in_sim, out_sim = class_similarity_stats(W, labels)
    signs = np.where(labels == positive_class, 1, -1)
    positions = spectrum_position(in_sim, out_sim, 1) * signs

    abs_pos = np.abs(positions)
    if band is None:
        band = float(np.quantile(abs_pos, 0.10))
    elif band <= 0:
        raise WavecommInputError(f"band must be positive, got {band}")
    extreme_cut = np.quantile(abs_pos, 0.90)

    isolated = set(find_isolated(W, labels, quantile))

    placements = []
    for i in range(W.n):
        flags = set()
        wrong_side = in_sim[i] < out_sim[i]
        if abs_pos[i] < band or wrong_side:
            flags.add("borderline")
        if i in isolated:
            flags.add("isolated")
        if abs_pos[i] >= extreme_cut and not wrong_side and "borderline" not in flags:
            flags.add("extreme")
        placements.append(
            SpectrumPlacement(
                image_id=image_ids[i],
                class_label=str(labels[i]),
                in_class_sim=float(in_sim[i]),
                out_class_sim=float(out_sim[i]),
                position=float(positions[i]),
                flags=frozenset(flags),
            )
        )
    return placements


def find_borderline(placements: list[SpectrumPlacement], band: float | None = None):
    """Borderline images per class, sorted by |position| ascending.

    ``band=None`` reuses the flags already on the placements; an explicit
    band re-derives the rule (|position| < band, or wrong side).
    """
    per_class: dict[str, list[SpectrumPlacement]] = {}
    if band is None:
        chosen = [p for p in placements if "borderline" in p.flags]
    else:
        if band <= 0:
            raise WavecommInputError(f"band must be positive, got {band}")
        chosen = [
            p
            for p in placements
            if abs(p.position) < band or p.in_class_sim < p.out_class_sim
        ]
    for p in sorted(chosen, key=lambda p: (abs(p.position), p.image_id)):
        per_class.setdefault(p.class_label, []).append(p)
    return {cls: [p.image_id for p in members] for cls, members in per_class.items()}
