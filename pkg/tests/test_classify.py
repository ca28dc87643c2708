import json

import numpy as np
import pytest

from bandmi import (
    ClassifierConfig,
    ConfigError,
    GroundTruth,
    HsiCube,
    SplitSpec,
    evaluate,
    fit_predict,
    reconstruct_map,
    split,
)
from bandmi.classify import report_to_json
from bandmi.synth import SceneRecipe, SyntheticBandSpec, generate_scene

from helpers import grid_gt


def one_class_gt(n=10):
    labels = np.zeros((1, n + 2), dtype=np.uint8)
    labels[0, 1 : n + 1] = 1
    return GroundTruth(labels, num_classes=1)


class TestSplit:
    def test_ten_pixels_half_split(self):
        parts = split(one_class_gt(10), SplitSpec(train_fraction=0.5, seed=1))
        assert parts.train.shape[0] == 5 and parts.test.shape[0] == 5

    def test_rounding_four_and_six(self):
        labels = np.zeros((1, 10), dtype=np.uint8)
        labels[0, :4] = 1
        labels[0, 4:] = 2
        gt = GroundTruth(labels, num_classes=2)
        parts = split(gt, SplitSpec(train_fraction=0.5, seed=2))
        y_train = gt.labels[parts.train[:, 0], parts.train[:, 1]]
        assert int((y_train == 1).sum()) == 2  # round(4 * 0.5)
        assert int((y_train == 2).sum()) == 3  # round(6 * 0.5)

    def test_same_seed_identical(self):
        gt = grid_gt(20, 20, 4, 0.7, seed=3)
        a = split(gt, SplitSpec(seed=9))
        b = split(gt, SplitSpec(seed=9))
        assert np.array_equal(a.train, b.train) and np.array_equal(a.test, b.test)

    def test_different_seed_differs(self):
        gt = grid_gt(20, 20, 4, 0.7, seed=3)
        a = split(gt, SplitSpec(seed=1))
        b = split(gt, SplitSpec(seed=2))
        assert not np.array_equal(a.train, b.train)

    def test_disjoint_cover(self):
        gt = grid_gt(15, 17, 4, 0.6, seed=4)
        parts = split(gt, SplitSpec(seed=5))
        train = {tuple(p) for p in parts.train.tolist()}
        test = {tuple(p) for p in parts.test.tolist()}
        labeled = {tuple(p) for p in np.argwhere(gt.labels != 0).tolist()}
        assert train.isdisjoint(test)
        assert train | test == labeled

    def test_singleton_class_excluded_with_warning(self):
        labels = np.zeros((2, 4), dtype=np.uint8)
        labels[0] = [1, 1, 1, 1]
        labels[1, 0] = 2  # class 2 has a single pixel
        gt = GroundTruth(labels, num_classes=2)
        with pytest.warns(UserWarning, match="class 2"):
            parts = split(gt, SplitSpec(seed=1))
        assert parts.excluded_classes == (2,)
        got = {tuple(p) for p in np.vstack([parts.train, parts.test]).tolist()}
        assert (1, 0) not in got

    def test_unstratified_split(self):
        gt = grid_gt(12, 12, 4, 0.8, seed=6)
        parts = split(gt, SplitSpec(train_fraction=0.3, seed=7, stratified=False))
        n = np.argwhere(gt.labels != 0).shape[0]
        assert parts.train.shape[0] == int(np.floor(n * 0.3 + 0.5))
        assert parts.train.shape[0] + parts.test.shape[0] == n

    def test_fraction_validated(self):
        with pytest.raises(ConfigError, match="train_fraction"):
            SplitSpec(train_fraction=1.0)


def blob_scene(seed=0, num_classes=3, pixels_per_class=40, bands=3, sigma=900.0):
    """Gaussian blobs per class across a few bands, as a (cube, gt) pair."""
    rng = np.random.default_rng(seed)
    rows = num_classes * pixels_per_class
    labels = np.repeat(np.arange(1, num_classes + 1, dtype=np.uint8), pixels_per_class)
    gt = GroundTruth(labels.reshape(rows, 1), num_classes)
    centers = rng.uniform(10_000, 50_000, (num_classes, bands))
    data = np.empty((bands, rows, 1), dtype=np.uint16)
    for b in range(bands):
        vals = centers[labels - 1, b] + rng.normal(0, sigma, rows)
        data[b, :, 0] = np.clip(np.rint(vals), 0, 65535).astype(np.uint16)
    return HsiCube(data), gt


def oracle_predict(x_train, y_train, x_test, kind, k, standardize):
    """Naive loop reimplementation of both classifiers' tie rules."""
    x_train = x_train.astype(float).copy()
    x_test = x_test.astype(float).copy()
    mu, sd = x_train.mean(axis=0), x_train.std(axis=0)
    usable = sd > 0
    x_train, x_test = x_train[:, usable], x_test[:, usable]
    if standardize and usable.any():
        x_train = (x_train - mu[usable]) / sd[usable]
        x_test = (x_test - mu[usable]) / sd[usable]
    preds = []
    if kind == "nearest_centroid":
        classes = sorted(set(int(v) for v in y_train))
        cents = {c: x_train[y_train == c].mean(axis=0) for c in classes}
        for row in x_test:
            best, best_d = None, None
            for c in classes:  # ascending: ties go to the lowest label
                d = float(((row - cents[c]) ** 2).sum())
                if best_d is None or d < best_d:
                    best, best_d = c, d
            preds.append(best)
    else:
        for row in x_test:
            d = [float(((row - t) ** 2).sum()) for t in x_train]
            order = sorted(range(len(d)), key=lambda i: (d[i], i))[:k]
            votes = {}
            for i in order:
                votes[int(y_train[i])] = votes.get(int(y_train[i]), 0) + 1
            top = max(votes.values())
            preds.append(min(c for c, v in votes.items() if v == top))
    return np.array(preds)


class TestFitPredict:
    def test_separable_constant_classes(self):
        labels = np.array([[1, 1, 2, 2]], dtype=np.uint8)
        gt = GroundTruth(labels, 2)
        band = np.array([[100, 100, 40000, 40000]], dtype=np.uint16)
        cube = HsiCube(band[None, :, :])
        pos = np.argwhere(labels != 0)
        pred = fit_predict(cube, gt, [0], pos, pos, ClassifierConfig())
        assert pred.tolist() == [1, 1, 2, 2]

    def test_memorization_knn_k1(self):
        cube, gt = blob_scene(seed=1)
        pos = np.argwhere(gt.labels != 0)
        pred = fit_predict(cube, gt, [0, 1, 2], pos, pos,
                           ClassifierConfig(kind="knn", k=1))
        truth = gt.labels[pos[:, 0], pos[:, 1]]
        assert (pred == truth).all()

    @pytest.mark.parametrize("kind,k", [("nearest_centroid", 5), ("knn", 5), ("knn", 1)])
    @pytest.mark.parametrize("standardize", [True, False])
    def test_matches_bruteforce_oracle(self, kind, k, standardize):
        cube, gt = blob_scene(seed=2)
        parts = split(gt, SplitSpec(seed=3))
        config = ClassifierConfig(kind=kind, k=k, standardize=standardize)
        pred = fit_predict(cube, gt, [0, 1, 2], parts.train, parts.test, config)
        x_train = np.stack(
            [cube.samples[b, parts.train[:, 0], parts.train[:, 1]] for b in range(3)], 1
        )
        x_test = np.stack(
            [cube.samples[b, parts.test[:, 0], parts.test[:, 1]] for b in range(3)], 1
        )
        y_train = gt.labels[parts.train[:, 0], parts.train[:, 1]].astype(int)
        oracle = oracle_predict(x_train, y_train, x_test, kind, k, standardize)
        assert (pred == oracle).all()

    def test_empty_selection_rejected(self):
        cube, gt = blob_scene(seed=4)
        pos = np.argwhere(gt.labels != 0)
        with pytest.raises(ConfigError, match="non-empty"):
            fit_predict(cube, gt, [], pos, pos)

    def test_even_k_rejected(self):
        with pytest.raises(ConfigError, match="odd"):
            ClassifierConfig(kind="knn", k=4)

    def test_zero_variance_band_guard(self):
        cube, gt = blob_scene(seed=5)
        const = np.full((1, gt.rows, gt.cols), 777, dtype=np.uint16)
        widened = HsiCube(np.concatenate([cube.samples, const]))
        parts = split(gt, SplitSpec(seed=6))
        base = fit_predict(widened, gt, [0, 1, 2], parts.train, parts.test,
                           ClassifierConfig())
        with pytest.warns(UserWarning, match="zero training variance"):
            with_const = fit_predict(widened, gt, [0, 1, 2, 3], parts.train,
                                     parts.test, ClassifierConfig())
        assert (base == with_const).all()


class TestEvaluate:
    def test_perfectly_separable_scene(self):
        gt = grid_gt(20, 20, 4, 1.0, seed=7)
        cube = generate_scene(
            gt, SceneRecipe((SyntheticBandSpec("clean"),), master_seed=1)
        )
        report = evaluate(cube, gt, [0], SplitSpec(seed=8))
        assert report.overall_accuracy == 1.0
        off_diag = report.confusion[~np.eye(4, dtype=bool)]
        assert not off_diag.any()

    def test_single_class(self):
        report_gt = one_class_gt(12)
        band = np.arange(14, dtype=np.uint16).reshape(1, 1, 14) * 100
        cube = HsiCube(band)
        report = evaluate(cube, report_gt, [0], SplitSpec(seed=9))
        assert report.overall_accuracy == 1.0

    def test_confusion_consistency(self):
        cube, gt = blob_scene(seed=10, sigma=8000.0)
        report = evaluate(cube, gt, [0, 1, 2], SplitSpec(seed=11))
        parts = split(gt, SplitSpec(seed=11))
        truth = gt.labels[parts.test[:, 0], parts.test[:, 1]]
        # row sums equal per-class test counts; trace/total is the accuracy
        for c in range(1, 4):
            assert report.confusion[c - 1].sum() == int((truth == c).sum())
        assert report.overall_accuracy == np.trace(report.confusion) / len(truth)

    def test_seed_determinism(self):
        cube, gt = blob_scene(seed=12, sigma=6000.0)
        a = evaluate(cube, gt, [0, 1], SplitSpec(seed=13))
        b = evaluate(cube, gt, [0, 1], SplitSpec(seed=13))
        assert a.overall_accuracy == b.overall_accuracy
        assert np.array_equal(a.confusion, b.confusion)

    def test_report_json_nan_as_null(self):
        labels = np.zeros((2, 6), dtype=np.uint8)
        labels[0] = 1
        labels[1, :3] = 3  # class 2 absent
        gt = GroundTruth(labels, num_classes=3)
        band = (gt.labels.astype(np.uint16) * 9000)[None]
        cube = HsiCube(band)
        report = evaluate(cube, gt, [0], SplitSpec(seed=14))
        payload = json.loads(report_to_json(report))
        assert payload["per_class_accuracy"][1] is None
        assert payload["num_bands_used"] == 1


class TestReconstructMap:
    def setup_method(self):
        self.gt = grid_gt(16, 16, 4, 0.6, seed=15)
        self.cube = generate_scene(
            self.gt,
            SceneRecipe(
                (SyntheticBandSpec("clean"),
                 SyntheticBandSpec("noisy", noise_sigma=0.4)),
                master_seed=3,
            ),
        )
        self.split_spec = SplitSpec(seed=16)

    def test_labeled_scope_keeps_train_labels(self):
        out = reconstruct_map(self.cube, self.gt, [0, 1], self.split_spec)
        parts = split(self.gt, self.split_spec)
        rr, cc = parts.train[:, 0], parts.train[:, 1]
        assert np.array_equal(out.labels[rr, cc], self.gt.labels[rr, cc])
        unlabeled = self.gt.labels == 0
        assert not out.labels[unlabeled].any()

    def test_full_scope_has_no_zeros(self):
        out = reconstruct_map(self.cube, self.gt, [0, 1], self.split_spec,
                              scope="full")
        assert (out.labels != 0).all()

    def test_map_agreement_equals_report_accuracy(self):
        out = reconstruct_map(self.cube, self.gt, [0, 1], self.split_spec)
        report = evaluate(self.cube, self.gt, [0, 1], self.split_spec)
        parts = split(self.gt, self.split_spec)
        rr, cc = parts.test[:, 0], parts.test[:, 1]
        agree = (out.labels[rr, cc] == self.gt.labels[rr, cc]).mean()
        assert agree == pytest.approx(report.overall_accuracy)

    def test_bad_scope(self):
        with pytest.raises(ConfigError, match="scope"):
            reconstruct_map(self.cube, self.gt, [0], self.split_spec, scope="both")
