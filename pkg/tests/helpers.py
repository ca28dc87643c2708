"""Shared oracles and scene builders for the test suite.

The oracles here are deliberately independent of the library's
implementation paths: mutual information is recomputed with a pure-Python
double loop over value pairs, and the selection loop is re-walked with a
naive reimplementation when auditing admission decisions.
"""

from __future__ import annotations

import math

import numpy as np

from bandmi import GroundTruth
from bandmi.synth import SceneRecipe, SyntheticBandSpec


def mi_bruteforce(xs, ys) -> float:
    """MI in bits via an explicit double loop over the two value sets."""
    xs = [int(v) for v in xs]
    ys = [int(v) for v in ys]
    n = len(xs)
    count_x: dict = {}
    count_y: dict = {}
    count_xy: dict = {}
    for a, b in zip(xs, ys):
        count_x[a] = count_x.get(a, 0) + 1
        count_y[b] = count_y.get(b, 0) + 1
        count_xy[(a, b)] = count_xy.get((a, b), 0) + 1
    mi = 0.0
    for a in sorted(count_x):
        for b in sorted(count_y):
            nab = count_xy.get((a, b), 0)
            if nab == 0:
                continue
            pab = nab / n
            mi += pab * math.log2(pab / ((count_x[a] / n) * (count_y[b] / n)))
    return mi


def entropy_bruteforce(xs) -> float:
    """Entropy in bits from sample counts, explicit loop."""
    xs = [int(v) for v in xs]
    n = len(xs)
    counts: dict = {}
    for v in xs:
        counts[v] = counts.get(v, 0) + 1
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def replay_selection(cells: np.ndarray, th_redundancy: float):
    """Naive re-walk of the greedy loop; returns (selected, trace tuples).

    Independent of the library loop: scans for the minimum cell by
    explicit iteration, applies the admission rule, overwrites with the
    sentinel. Trace tuples are (x, y, value, admitted).
    """
    working = [list(map(float, row)) for row in np.asarray(cells)]
    n = len(working)
    selected: list[int] = []
    trace = []
    while True:
        best = None
        for i in range(n):
            for j in range(n):
                if best is None or working[i][j] < best[2]:
                    best = (i, j, working[i][j])
        x, y, value = best
        if value >= th_redundancy:
            break
        ok = all(working[x][l] < th_redundancy for l in selected)
        admitted = ok and x not in selected
        if admitted:
            selected.append(x)
        trace.append((x, y, value, admitted))
        working[x][y] = 2.0
    return selected, trace


def grid_gt(rows: int, cols: int, num_classes: int, labeled_fraction: float,
            seed: int) -> GroundTruth:
    """Equal-mass block label map with a seeded unlabeled speckle."""
    side = int(np.ceil(np.sqrt(num_classes)))
    r_idx = np.minimum(np.arange(rows) * side // rows, side - 1)
    c_idx = np.minimum(np.arange(cols) * side // cols, side - 1)
    labels = ((r_idx[:, None] * side + c_idx[None, :]) % num_classes) + 1
    rng = np.random.default_rng(seed)
    keep = rng.random((rows, cols)) < labeled_fraction
    return GroundTruth(np.where(keep, labels, 0).astype(np.uint8), num_classes)


def disjoint_pair_specs(num_classes: int):
    """Two occluded specs whose surviving class sets are mutually exclusive."""
    k = max(1, num_classes // 5)
    keep_a = set(range(1, k + 1))
    keep_b = set(range(k + 1, 2 * k + 1))
    drop_a = tuple(x for x in range(1, num_classes + 1) if x not in keep_a)
    drop_b = tuple(x for x in range(1, num_classes + 1) if x not in keep_b)
    return (
        SyntheticBandSpec("occluded", occluded_classes=drop_a),
        SyntheticBandSpec("occluded", occluded_classes=drop_b),
    )


def walkthrough_recipe(num_classes: int, master_seed: int = 5) -> SceneRecipe:
    """clean + exact duplicate + disjoint occlusion pair + pure noise.

    Band layout: 0 clean, 1 duplicate of 0, 2 and 3 the disjoint pair,
    4 pure noise. With 64-bin quantization and thresholds (0.4, 0.7) the
    disjoint pair is admitted first and the duplicate is blocked.
    """
    occ_a, occ_b = disjoint_pair_specs(num_classes)
    return SceneRecipe(
        (
            SyntheticBandSpec("clean"),
            SyntheticBandSpec("duplicate_of", source_band=0),
            occ_a,
            occ_b,
            SyntheticBandSpec("pure_noise"),
        ),
        master_seed=master_seed,
    )


def benefit_recipe(num_classes: int = 8, master_seed: int = 0) -> SceneRecipe:
    """4 informative quarter bands + 10 pure noise + 5 exact duplicates."""
    per = num_classes // 4
    informative = []
    for q in range(4):
        keep = set(range(per * q + 1, per * (q + 1) + 1))
        drop = tuple(x for x in range(1, num_classes + 1) if x not in keep)
        informative.append(SyntheticBandSpec("occluded", occluded_classes=drop))
    noise = [SyntheticBandSpec("pure_noise") for _ in range(10)]
    dups = [SyntheticBandSpec("duplicate_of", source_band=s) for s in (0, 0, 1, 2, 3)]
    return SceneRecipe(tuple(informative + noise + dups), master_seed=master_seed)
