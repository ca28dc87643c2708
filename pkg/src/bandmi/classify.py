"""Train/test evaluation of a band subset and label-map reconstruction.

The stratified 50/50 split and the two built-in classifiers (nearest
centroid, k-NN) are deliberately simple and fully deterministic: fixed
seeds give identical splits, predictions, and reports. Any external
classifier can be evaluated instead by exporting the train/test design
matrices and scoring its predictions elsewhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple
import json

import numpy as np

from .cube import GroundTruth, HsiCube, band_at, labeled_mask
from .errors import ConfigError

_PREDICT_CHUNK = 512


@dataclass(frozen=True)
class SplitSpec:
    """Random train/test partition of the labeled pixels."""

    train_fraction: float = 0.5
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


@dataclass(frozen=True)
class ClassifierConfig:
    """Built-in classifier choice. k must be odd so votes cannot deadlock
    between two classes; standardization uses training statistics only."""

    kind: str = "nearest_centroid"
    k: int = 5
    standardize: bool = True

    def __post_init__(self):
        if self.kind not in ("nearest_centroid", "knn"):
            raise ConfigError(
                f"classifier kind must be 'nearest_centroid' or 'knn', got {self.kind!r}"
            )
        if self.kind == "knn" and (self.k < 1 or self.k % 2 == 0):
            raise ConfigError(f"knn k must be odd and >= 1, got {self.k}")


class SplitResult(NamedTuple):
    train: np.ndarray  # (n_train, 2) positions
    test: np.ndarray  # (n_test, 2) positions
    excluded_classes: tuple[int, ...]


@dataclass(frozen=True)
class EvalReport:
    """Accuracy summary for one seeded evaluation."""

    overall_accuracy: float
    per_class_accuracy: np.ndarray  # NaN for classes without test samples
    confusion: np.ndarray  # (C, C), rows true, cols predicted
    num_bands_used: int
    split_seed: int


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split(gt: GroundTruth, spec: SplitSpec = SplitSpec()) -> SplitResult:
    """Partition labeled positions into disjoint train/test sets.

    Stratified mode draws round(class_count * fraction) training pixels
    per class (at least 1 train and 1 test where the class has >= 2
    pixels); classes with fewer than 2 pixels are excluded entirely and
    reported. Deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    labels = gt.labels
    if not spec.stratified:
        pos = labeled_mask(gt)
        perm = rng.permutation(pos.shape[0])
        n_train = min(max(_round_half_up(pos.shape[0] * spec.train_fraction), 1),
                      pos.shape[0] - 1)
        return SplitResult(pos[perm[:n_train]], pos[perm[n_train:]], ())

    train_parts, test_parts, excluded = [], [], []
    for c in range(1, gt.num_classes + 1):
        pos_c = np.argwhere(labels == c)
        n_c = pos_c.shape[0]
        if n_c == 0:
            continue
        if n_c < 2:
            excluded.append(c)
            warnings.warn(
                f"class {c} has {n_c} labeled pixel(s); excluded from the split"
            )
            continue
        perm = rng.permutation(n_c)
        n_train = min(max(_round_half_up(n_c * spec.train_fraction), 1), n_c - 1)
        train_parts.append(pos_c[perm[:n_train]])
        test_parts.append(pos_c[perm[n_train:]])
    if not train_parts:
        raise ConfigError("no class has enough labeled pixels to split")
    return SplitResult(
        np.concatenate(train_parts),
        np.concatenate(test_parts),
        tuple(excluded),
    )


def _design_matrix(cube: HsiCube, selected, positions: np.ndarray) -> np.ndarray:
    cols = [band_at(cube, int(b), positions).astype(np.float64) for b in selected]
    return np.stack(cols, axis=1)


def _pairwise_sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (n_a, n_b) squared euclidean distances, chunk-friendly expansion.
    aa = np.einsum("ij,ij->i", a, a)[:, None]
    bb = np.einsum("ij,ij->i", b, b)[None, :]
    d = aa + bb - 2.0 * (a @ b.T)
    return np.maximum(d, 0.0)


def fit_predict(
    cube: HsiCube,
    gt: GroundTruth,
    selected,
    train: np.ndarray,
    test: np.ndarray,
    config: ClassifierConfig = ClassifierConfig(),
) -> np.ndarray:
    """Train on the train positions and predict labels for the test positions.

    Tie rules are fixed: centroid distance ties resolve to the lowest
    class label, k-NN distance ties to the lowest training position index,
    and vote ties to the lowest class label. Bands with zero variance on
    the training data are dropped from the distance computation.
    """
    selected = [int(b) for b in selected]
    if not selected:
        raise ConfigError("selected band set must be non-empty")
    bad = [b for b in selected if not 0 <= b < cube.bands]
    if bad:
        raise ConfigError(f"band indices {bad} out of range for {cube.bands}-band cube")
    if train.shape[0] == 0:
        raise ConfigError("training set must be non-empty")

    x_train = _design_matrix(cube, selected, train)
    x_test = _design_matrix(cube, selected, test)
    y_train = gt.labels[train[:, 0], train[:, 1]].astype(np.int64)

    mu = x_train.mean(axis=0)
    sd = x_train.std(axis=0)
    usable = sd > 0
    if not usable.all():
        dropped = [selected[i] for i in np.flatnonzero(~usable)]
        warnings.warn(f"bands {dropped} have zero training variance; dropped")
    x_train = x_train[:, usable]
    x_test = x_test[:, usable]
    if config.standardize and x_train.shape[1]:
        x_train = (x_train - mu[usable]) / sd[usable]
        x_test = (x_test - mu[usable]) / sd[usable]

    classes = np.unique(y_train)
    if config.kind == "nearest_centroid":
        centroids = np.stack([x_train[y_train == c].mean(axis=0) for c in classes])
        pred = np.empty(x_test.shape[0], dtype=np.int64)
        for start in range(0, x_test.shape[0], _PREDICT_CHUNK):
            chunk = x_test[start : start + _PREDICT_CHUNK]
            d = _pairwise_sq_dist(chunk, centroids)
            pred[start : start + _PREDICT_CHUNK] = classes[np.argmin(d, axis=1)]
        return pred

    k = min(config.k, x_train.shape[0])
    num_labels = gt.num_classes + 1
    pred = np.empty(x_test.shape[0], dtype=np.int64)
    for start in range(0, x_test.shape[0], _PREDICT_CHUNK):
        chunk = x_test[start : start + _PREDICT_CHUNK]
        d = _pairwise_sq_dist(chunk, x_train)
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        votes = y_train[nearest]
        for i in range(votes.shape[0]):
            counts = np.bincount(votes[i], minlength=num_labels)
            pred[start + i] = int(np.argmax(counts))
    return pred


def evaluate(
    cube: HsiCube,
    gt: GroundTruth,
    selected,
    split_spec: SplitSpec = SplitSpec(),
    classifier_config: ClassifierConfig = ClassifierConfig(),
) -> EvalReport:
    """Split, train, predict, and summarize accuracy; deterministic per seed."""
    parts = split(gt, split_spec)
    pred = fit_predict(cube, gt, selected, parts.train, parts.test, classifier_config)
    truth = gt.labels[parts.test[:, 0], parts.test[:, 1]].astype(np.int64)

    c = gt.num_classes
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (truth - 1, pred - 1), 1)
    total = confusion.sum()
    overall = float(np.trace(confusion) / total)
    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore"):
        per_class = np.where(
            row_sums > 0, np.diag(confusion) / np.maximum(row_sums, 1), np.nan
        )
    return EvalReport(
        overall_accuracy=overall,
        per_class_accuracy=per_class,
        confusion=confusion,
        num_bands_used=len(list(selected)),
        split_seed=split_spec.seed,
    )


def reconstruct_map(
    cube: HsiCube,
    gt: GroundTruth,
    selected,
    split_spec: SplitSpec = SplitSpec(),
    classifier_config: ClassifierConfig = ClassifierConfig(),
    scope: str = "labeled",
) -> GroundTruth:
    """Predicted label map over the frame.

    scope "labeled": training pixels keep their true labels, test pixels
    get predictions, unlabeled pixels stay 0. scope "full": every pixel
    of the frame is predicted, unlabeled ones included.
    """
    if scope not in ("labeled", "full"):
        raise ConfigError(f"scope must be 'labeled' or 'full', got {scope!r}")
    parts = split(gt, split_spec)
    out = np.zeros_like(gt.labels, dtype=np.uint8)
    if scope == "labeled":
        out[parts.train[:, 0], parts.train[:, 1]] = gt.labels[
            parts.train[:, 0], parts.train[:, 1]
        ]
        pred = fit_predict(
            cube, gt, selected, parts.train, parts.test, classifier_config
        )
        out[parts.test[:, 0], parts.test[:, 1]] = pred.astype(np.uint8)
    else:
        rr, cc = np.meshgrid(
            np.arange(gt.rows), np.arange(gt.cols), indexing="ij"
        )
        everywhere = np.column_stack([rr.ravel(), cc.ravel()])
        pred = fit_predict(
            cube, gt, selected, parts.train, everywhere, classifier_config
        )
        out = pred.reshape(gt.rows, gt.cols).astype(np.uint8)
    return GroundTruth(out, gt.num_classes)


def design_matrix_rows(cube: HsiCube, gt: GroundTruth, selected, positions):
    """(header, rows) for a CSV design-matrix export: position, label, bands."""
    selected = [int(b) for b in selected]
    header = ["row", "col", "label"] + [f"band_{b}" for b in selected]
    matrix = _design_matrix(cube, selected, positions)
    rows = []
    for i, (r, c) in enumerate(positions):
        label = int(gt.labels[r, c])
        rows.append([int(r), int(c), label] + [float(v) for v in matrix[i]])
    return header, rows


def report_to_json(report: EvalReport) -> str:
    """JSON text for an evaluation report (NaN per-class entries as null)."""
    per_class = [
        None if v != v else float(v) for v in report.per_class_accuracy
    ]
    payload = {
        "overall_accuracy": report.overall_accuracy,
        "per_class_accuracy": per_class,
        "confusion": report.confusion.tolist(),
        "num_bands_used": report.num_bands_used,
        "split_seed": report.split_seed,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
