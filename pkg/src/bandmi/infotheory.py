"""Histogram estimators: entropy, mutual information, normalized MI, Fano bounds.

All measures use base-2 logarithms and the convention 0*log(0) = 0. Band
values are discretized by per-band linear min-max quantization (256 bins by
default) before any histogram is taken; class labels are used as-is. Every
function here is a pure function of immutable inputs, so callers may fan
out over bands or band pairs freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import GroundTruth, HsiCube, all_positions, band_at, labeled_mask
from .errors import ConfigError, DataFormatError

# Round-off tolerance: any negative MI from summation drift is clamped to
# 0; drift beyond this magnitude would indicate a bug, not round-off.
MI_EPSILON = 1e-12

# Tolerance for mi <= class_entropy checks in conditional_entropy().
ENTROPY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class QuantizationSpec:
    """Linear min-max binning of band samples.

    When per_band_min/per_band_max are None the band's own min and max over
    the evaluation mask are used, so each band fills its bin range.
    """

    num_bins: int = 256
    per_band_min: int | None = None
    per_band_max: int | None = None

    def __post_init__(self):
        if self.num_bins < 2:
            raise ConfigError(f"num_bins must be >= 2, got {self.num_bins}")
        if (
            self.per_band_min is not None
            and self.per_band_max is not None
            and self.per_band_max < self.per_band_min
        ):
            raise ConfigError("per_band_max must be >= per_band_min")


@dataclass(frozen=True)
class DiscreteDistribution:
    """Joint (or marginal, when num_bins_b == 1) histogram counts."""

    num_bins_a: int
    num_bins_b: int
    joint_counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.joint_counts, dtype=np.int64)
        if counts.shape != (self.num_bins_a, self.num_bins_b):
            raise ConfigError(
                f"joint_counts shape {counts.shape} does not match "
                f"({self.num_bins_a}, {self.num_bins_b})"
            )
        if (counts < 0).any():
            raise ConfigError("joint_counts must be non-negative")
        if self.total < 1:
            raise ConfigError("total must be >= 1")
        if int(counts.sum()) != self.total:
            raise ConfigError("sum of joint_counts must equal total")
        counts = np.ascontiguousarray(counts)
        counts.setflags(write=False)
        object.__setattr__(self, "joint_counts", counts)

    @property
    def is_marginal(self) -> bool:
        return self.num_bins_b == 1


@dataclass(frozen=True)
class FanoBounds:
    """Error-probability envelope derived from conditional entropy."""

    lower: float
    upper: float
    conditional_entropy: float
    class_entropy: float
    num_classes: int


def quantize_band(
    cube: HsiCube,
    band: int,
    mask: np.ndarray,
    spec: QuantizationSpec = QuantizationSpec(),
) -> np.ndarray:
    """Map band samples at mask positions to bin indices in [0, num_bins-1].

    Bin of sample s is floor((s - min) * B / (max - min + 1)), computed in
    integer arithmetic. min/max default to the band's own range over the
    mask; a constant band maps to bin 0 everywhere. Samples outside an
    explicitly supplied min/max are clipped into the bin range.
    """
    if mask.size == 0:
        raise ConfigError("mask must be non-empty")
    values = band_at(cube, band, mask).astype(np.int64)
    mn = int(values.min()) if spec.per_band_min is None else int(spec.per_band_min)
    mx = int(values.max()) if spec.per_band_max is None else int(spec.per_band_max)
    if mx < mn:
        raise ConfigError("per_band_max must be >= per_band_min")
    bins = (values - mn) * spec.num_bins // (mx - mn + 1)
    return np.clip(bins, 0, spec.num_bins - 1)


def joint_histogram(
    xs: np.ndarray, ys: np.ndarray, bins_x: int, bins_y: int
) -> DiscreteDistribution:
    """Count co-occurrences of bin-index pairs into a bins_x * bins_y table."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ConfigError(
            f"xs and ys must be 1-D arrays of equal length, got {xs.shape} / {ys.shape}"
        )
    if xs.size == 0:
        raise ConfigError("xs and ys must be non-empty")
    if xs.min() < 0 or xs.max() >= bins_x or ys.min() < 0 or ys.max() >= bins_y:
        raise ConfigError("bin index out of range for declared bin counts")
    counts = np.bincount(xs * bins_y + ys, minlength=bins_x * bins_y)
    return DiscreteDistribution(
        num_bins_a=bins_x,
        num_bins_b=bins_y,
        joint_counts=counts.reshape(bins_x, bins_y),
        total=xs.size,
    )


def marginal_histogram(xs: np.ndarray, bins: int) -> DiscreteDistribution:
    """Histogram of a single bin-index array as an n x 1 distribution."""
    ones = np.zeros(np.asarray(xs).shape, dtype=np.int64)
    return joint_histogram(xs, ones, bins, 1)


def _entropy_of(counts: np.ndarray, total: int | None = None) -> float:
    """Entropy in bits from non-negative counts: log2 N - sum c*log2(c) / N.

    The count form is exact for degenerate marginals (a single nonzero
    cell yields exactly 0.0), which the zero-entropy conventions below
    rely on.
    """
    counts = np.asarray(counts, dtype=np.float64)
    n = float(counts.sum()) if total is None else float(total)
    nz = counts[counts > 0]
    h = float(np.log2(n) - np.sum(nz * np.log2(nz)) / n)
    return max(h, 0.0)


def entropy(dist: DiscreteDistribution) -> float:
    """Shannon entropy of a marginal distribution, in bits."""
    if not dist.is_marginal:
        raise ConfigError("entropy() expects a marginal (num_bins_b == 1)")
    return _entropy_of(dist.joint_counts[:, 0], dist.total)


def marginal_entropies(dist: DiscreteDistribution) -> tuple[float, float]:
    """(H(A), H(B)) from the joint's row and column marginals, in bits."""
    counts = dist.joint_counts
    return (
        _entropy_of(counts.sum(axis=1), dist.total),
        _entropy_of(counts.sum(axis=0), dist.total),
    )


def mutual_information(dist: DiscreteDistribution) -> float:
    """I(A;B) = sum p(a,b) log2 p(a,b)/(p(a)p(b)) over nonzero cells, in bits.

    Computed from integer counts, c_ab/N * log2(c_ab*N / (c_a*c_b)), so
    exact dependence and independence cancel cleanly. Terms are summed in
    sorted order, making the result invariant under transposition of the
    joint table. Negative round-off is clamped to 0 (see MI_EPSILON).
    """
    counts = dist.joint_counts.astype(np.float64)
    n = float(dist.total)
    ca = counts.sum(axis=1)
    cb = counts.sum(axis=0)
    nz = counts > 0
    ratio = counts[nz] * n / (ca[:, None] * cb[None, :])[nz]
    terms = counts[nz] / n * np.log2(ratio)
    mi = float(np.sort(terms).sum())
    return max(mi, 0.0)


def conditional_entropy(class_entropy: float, mi: float) -> float:
    """H(C|X) = H(C) - I(C;X), clamped at 0.

    Raises if mi exceeds class_entropy by more than a small tolerance,
    which indicates inconsistent inputs rather than round-off.
    """
    if mi > class_entropy + ENTROPY_TOLERANCE:
        raise ConfigError(
            f"mutual information {mi} exceeds class entropy {class_entropy}"
        )
    return max(0.0, class_entropy - mi)


def fano_bounds(class_entropy: float, mi: float, num_classes: int) -> FanoBounds:
    """Lower/upper bounds on classification error probability.

    lower = (H(C|X) - 1) / log2(Nc), upper = H(C|X) / log2(Nc), both
    clamped into [0, 1]. High MI with the classes drives H(C|X), and with
    it the whole error envelope, toward zero.
    """
    if num_classes < 2:
        raise ConfigError(f"num_classes must be >= 2, got {num_classes}")
    h_cond = conditional_entropy(class_entropy, mi)
    log_nc = np.log2(num_classes)
    lower = min(1.0, max(0.0, (h_cond - 1.0) / log_nc))
    upper = min(1.0, max(0.0, h_cond / log_nc))
    return FanoBounds(
        lower=lower,
        upper=upper,
        conditional_entropy=h_cond,
        class_entropy=class_entropy,
        num_classes=num_classes,
    )


def normalized_mi_as(dist: DiscreteDistribution, direction: str = "a") -> float:
    """Asymmetric normalized MI: I(A;B)/H(A) for direction "a", /H(B) for "b".

    Near 1 means the direction's variable shares essentially all of its
    information with the other, i.e. it is redundant given the other. A
    zero-entropy (constant) variable returns 0: it carries no information,
    so it must never look redundant with everything.
    """
    if direction not in ("a", "b"):
        raise ConfigError(f"direction must be 'a' or 'b', got {direction!r}")
    ha, hb = marginal_entropies(dist)
    denom = ha if direction == "a" else hb
    if denom == 0.0:
        return 0.0
    return mutual_information(dist) / denom


def normalized_mi_u(dist: DiscreteDistribution) -> float:
    """Symmetric-uncertainty form: I(A;B)/sqrt(H(A)*H(B)); 0 on zero entropy."""
    ha, hb = marginal_entropies(dist)
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return mutual_information(dist) / float(np.sqrt(ha * hb))


def resolve_positions(gt: GroundTruth, mask_mode: str = "labeled") -> np.ndarray:
    """Evaluation positions for a mask mode: "labeled" pixels or "all"."""
    if mask_mode == "labeled":
        return labeled_mask(gt)
    if mask_mode == "all":
        return all_positions(gt.rows, gt.cols)
    raise ConfigError(f"mask_mode must be 'labeled' or 'all', got {mask_mode!r}")


def label_values(gt: GroundTruth, positions: np.ndarray) -> np.ndarray:
    """Label at each position, as int64 bin indices in [0, num_classes]."""
    return gt.labels[positions[:, 0], positions[:, 1]].astype(np.int64)


def band_gt_mi_curve(
    cube: HsiCube,
    gt: GroundTruth,
    spec: QuantizationSpec = QuantizationSpec(),
    mask_mode: str = "labeled",
) -> np.ndarray:
    """MI (bits) between each quantized band and the class label variable.

    By default only labeled pixels participate; pass mask_mode="all" to
    score bands against the full frame including unlabeled zeros.
    """
    if (cube.rows, cube.cols) != (gt.rows, gt.cols):
        raise DataFormatError(
            f"cube is {cube.rows}x{cube.cols} but ground truth is "
            f"{gt.rows}x{gt.cols}"
        )
    positions = resolve_positions(gt, mask_mode)
    labels = label_values(gt, positions)
    label_bins = gt.num_classes + 1
    curve = np.empty(cube.bands, dtype=np.float64)
    for b in range(cube.bands):
        bins = quantize_band(cube, b, positions, spec)
        dist = joint_histogram(bins, labels, spec.num_bins, label_bins)
        curve[b] = mutual_information(dist)
    return curve
