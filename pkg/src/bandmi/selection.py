"""Relevance thresholding and greedy redundancy-controlled band selection.

The selection pipeline is a pure filter: it never calls a classifier.
Bands are first ranked by MI with the ground truth and cut at a relevance
threshold; the survivors' pairwise normalized-MI matrix D is then swept by
a greedy loop that repeatedly takes the least-redundant cell and admits
its row band when it clears the redundancy threshold against everything
already selected.

Loop semantics, fixed precisely: while the minimum over all cells of D is
below th_redundancy, take (x, y) at the minimum (row-major first occurrence
on ties); admit band x into the selection iff the current cells D(x, l) are
below th_redundancy for every already-selected l; then overwrite D(x, y)
with the sentinel 2.0 so that cell can never be the minimum again. Each
iteration retires exactly one cell, so the loop runs at most n*n times.
The sentinel is 2.0 rather than 1.0 so termination also holds when
th_redundancy is exactly 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .classify import ClassifierConfig, SplitSpec, evaluate
from .cube import GroundTruth, HsiCube
from .errors import ConfigError
from .infotheory import (
    QuantizationSpec,
    band_gt_mi_curve,
    joint_histogram,
    mutual_information,
    quantize_band,
    resolve_positions,
    _entropy_of,
)

SENTINEL = 2.0

MEASURE_KINDS = ("AS", "U")

ZONE_NO_ACTION = "no-action"
ZONE_HARD_SELECTION = "hard-selection"
ZONE_USEFUL = "useful"
ZONE_VERY_USEFUL = "very-useful"
ZONE_OVER_CONTROLLED = "over-controlled"
ZONE_UNDER_CONTROLLED = "under-controlled"


def normalize_measure(token: str) -> str:
    kind = str(token).upper()
    if kind not in MEASURE_KINDS:
        raise ConfigError(f"measure_kind must be one of {MEASURE_KINDS}, got {token!r}")
    return kind


@dataclass(frozen=True)
class SelectionConfig:
    """Thresholds and estimation settings for one selection run."""

    th_relevance: float
    th_redundancy: float
    measure_kind: str = "AS"
    quantization: QuantizationSpec = QuantizationSpec()
    mask_mode: str = "labeled"

    def __post_init__(self):
        if not 0.0 < self.th_redundancy <= 1.0:
            raise ConfigError(
                f"th_redundancy must be in (0, 1], got {self.th_redundancy}"
            )
        if self.th_relevance < 0.0:
            raise ConfigError(f"th_relevance must be >= 0, got {self.th_relevance}")
        object.__setattr__(self, "measure_kind", normalize_measure(self.measure_kind))


@dataclass(frozen=True)
class RedundancyMatrix:
    """Pairwise normalized-MI table over a relevance-sorted band pool.

    cells[i, j] is the measure of band_order[i] paired with band_order[j];
    for the asymmetric form the row band's entropy is the normalizer.
    """

    size: int
    cells: np.ndarray
    measure_kind: str
    band_order: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        order = np.asarray(self.band_order, dtype=np.int64)
        if cells.shape != (self.size, self.size):
            raise ConfigError("cells must be size x size")
        if order.shape != (self.size,) or len(set(order.tolist())) != self.size:
            raise ConfigError("band_order must be size distinct band indices")
        cells = np.ascontiguousarray(cells)
        cells.setflags(write=False)
        order = np.ascontiguousarray(order)
        order.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "band_order", order)


@dataclass(frozen=True)
class TraceStep:
    """One loop iteration: cell (x, y) in pool coordinates was the minimum."""

    x: int
    y: int
    value: float
    admitted: bool
    band: int  # original index of the row band x


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection run, with a replayable audit trail."""

    selected: tuple[int, ...]
    relevant_pool: tuple[int, ...]
    mi_curve: np.ndarray
    trace: tuple[TraceStep, ...]
    matrix: RedundancyMatrix | None
    config: SelectionConfig


def select_relevant(mi_curve: np.ndarray, th_relevance: float) -> np.ndarray:
    """Band indices with MI >= th_relevance, sorted ascending by MI.

    Ties break by ascending band index. An empty result is legal.
    """
    curve = np.asarray(mi_curve, dtype=np.float64)
    if curve.size == 0:
        raise ConfigError("mi_curve must be non-empty")
    order = np.lexsort((np.arange(curve.size), curve))
    return order[curve[order] >= th_relevance]


def build_redundancy_matrix(
    cube: HsiCube,
    gt_or_mask,
    pool: np.ndarray,
    measure_kind: str = "AS",
    spec: QuantizationSpec = QuantizationSpec(),
) -> RedundancyMatrix:
    """Full n x n normalized-MI table over the pool, diagonal included.

    gt_or_mask is a GroundTruth (its labeled pixels form the mask) or an
    (N, 2) array of positions.
    """
    kind = normalize_measure(measure_kind)
    pool = np.asarray(pool, dtype=np.int64)
    if pool.size == 0:
        raise ConfigError("pool must be non-empty")
    if pool.min() < 0 or pool.max() >= cube.bands:
        raise ConfigError("pool index out of range")
    if isinstance(gt_or_mask, GroundTruth):
        positions = resolve_positions(gt_or_mask, "labeled")
    else:
        positions = np.asarray(gt_or_mask)

    n = pool.size
    binned = [quantize_band(cube, int(b), positions, spec) for b in pool]
    entropies = np.empty(n)
    for i, bins in enumerate(binned):
        entropies[i] = _entropy_of(np.bincount(bins, minlength=spec.num_bins))

    cells = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        # self-measure is 1 by definition for any non-constant band
        cells[i, i] = 1.0 if entropies[i] > 0 else 0.0
        for j in range(i + 1, n):
            dist = joint_histogram(binned[i], binned[j], spec.num_bins, spec.num_bins)
            mi = mutual_information(dist)
            if kind == "AS":
                cells[i, j] = mi / entropies[i] if entropies[i] > 0 else 0.0
                cells[j, i] = mi / entropies[j] if entropies[j] > 0 else 0.0
            else:
                denom = np.sqrt(entropies[i] * entropies[j])
                u = mi / denom if denom > 0 else 0.0
                cells[i, j] = u
                cells[j, i] = u
    return RedundancyMatrix(size=n, cells=cells, measure_kind=kind, band_order=pool)


def _selection_loop(cells: np.ndarray, th_redundancy: float):
    """Greedy argmin sweep; returns (admitted pool indices, trace)."""
    working = cells.copy()
    n = working.shape[0]
    selected: list[int] = []
    member = set()
    trace: list[TraceStep] = []
    for _ in range(n * n):
        flat = int(np.argmin(working))
        x, y = divmod(flat, n)
        value = float(working[x, y])
        if value >= th_redundancy:
            break
        rule_ok = all(working[x, l] < th_redundancy for l in selected)
        admitted = rule_ok and x not in member
        if admitted:
            selected.append(x)
            member.add(x)
        trace.append(TraceStep(x=x, y=y, value=value, admitted=admitted, band=-1))
        working[x, y] = SENTINEL
    return selected, trace


def select_bands(
    cube: HsiCube, gt: GroundTruth, config: SelectionConfig
) -> SelectionResult:
    """Relevance cut followed by the greedy redundancy sweep.

    Deterministic for fixed inputs and config; an empty relevant pool
    yields an empty (but valid) result.
    """
    mi_curve = band_gt_mi_curve(cube, gt, config.quantization, config.mask_mode)
    pool = select_relevant(mi_curve, config.th_relevance)
    if pool.size == 0:
        return SelectionResult(
            selected=(),
            relevant_pool=(),
            mi_curve=mi_curve,
            trace=(),
            matrix=None,
            config=config,
        )
    positions = resolve_positions(gt, config.mask_mode)
    matrix = build_redundancy_matrix(
        cube, positions, pool, config.measure_kind, config.quantization
    )
    picked, trace = _selection_loop(matrix.cells, config.th_redundancy)
    trace = tuple(
        TraceStep(t.x, t.y, t.value, t.admitted, band=int(pool[t.x])) for t in trace
    )
    return SelectionResult(
        selected=tuple(int(pool[i]) for i in picked),
        relevant_pool=tuple(int(b) for b in pool),
        mi_curve=mi_curve,
        trace=trace,
        matrix=matrix,
        config=config,
    )


@dataclass(frozen=True)
class SweepCell:
    """One (th_relevance, th_redundancy) evaluation."""

    th_relevance: float
    th_redundancy: float
    num_selected: int
    accuracy: float
    selected: tuple[int, ...]


@dataclass(frozen=True)
class SweepResult:
    """Grid of selection/accuracy outcomes, ordered by (relevance, redundancy)."""

    cells: tuple[SweepCell, ...]
    total_bands: int
    measure_kind: str


def threshold_sweep(
    cube: HsiCube,
    gt: GroundTruth,
    relevance_grid,
    redundancy_grid,
    measure_kind: str = "AS",
    classifier_config: ClassifierConfig = ClassifierConfig(),
    split_spec: SplitSpec = SplitSpec(),
    quantization: QuantizationSpec = QuantizationSpec(),
    mask_mode: str = "labeled",
) -> SweepResult:
    """Run the selection + evaluation pipeline over a threshold grid.

    Every cell reproduces exactly what a standalone select_bands +
    evaluate call yields for that threshold pair and seed; the pairwise
    measure table is computed once over the widest pool and sliced per
    relevance level. Cells with an empty selection carry accuracy NaN.
    """
    kind = normalize_measure(measure_kind)
    rel_grid = sorted(float(v) for v in relevance_grid)
    red_grid = sorted(float(v) for v in redundancy_grid)
    if not rel_grid or not red_grid:
        raise ConfigError("both threshold grids must be non-empty")
    for td in red_grid:
        if not 0.0 < td <= 1.0:
            raise ConfigError(f"redundancy threshold {td} outside (0, 1]")

    mi_curve = band_gt_mi_curve(cube, gt, quantization, mask_mode)
    positions = resolve_positions(gt, mask_mode)
    widest = select_relevant(mi_curve, rel_grid[0])
    base = (
        build_redundancy_matrix(cube, positions, widest, kind, quantization)
        if widest.size
        else None
    )

    cells = []
    for tr in rel_grid:
        keep = (
            np.flatnonzero(mi_curve[widest] >= tr) if widest.size else np.array([], int)
        )
        pool = widest[keep]
        sub = base.cells[np.ix_(keep, keep)] if pool.size else None
        for td in red_grid:
            if pool.size == 0:
                cells.append(SweepCell(tr, td, 0, float("nan"), ()))
                continue
            picked, _ = _selection_loop(sub, td)
            selected = tuple(int(pool[i]) for i in picked)
            if selected:
                report = evaluate(cube, gt, selected, split_spec, classifier_config)
                acc = report.overall_accuracy
            else:
                acc = float("nan")
            cells.append(SweepCell(tr, td, len(selected), acc, selected))
    return SweepResult(tuple(cells), total_bands=cube.bands, measure_kind=kind)


@dataclass(frozen=True)
class ZoneCell:
    th_relevance: float
    th_redundancy: float
    num_selected: int
    accuracy: float
    zone: str


def zone_report(sweep: SweepResult) -> tuple[ZoneCell, ...]:
    """Label each sweep cell with a descriptive threshold-regime zone.

    The rules compare each cell to the grid's extremes: selections of
    every band ("no-action") or none ("hard-selection"); near-peak
    accuracy from a small subset ("very-useful") or any subset ("useful");
    otherwise many bands with degraded accuracy ("under-controlled") or
    few bands with degraded accuracy ("over-controlled"). Heuristic,
    purely descriptive output.
    """
    total = sweep.total_bands
    accs = [c.accuracy for c in sweep.cells if c.num_selected > 0 and c.accuracy == c.accuracy]
    max_acc = max(accs) if accs else 0.0
    zones = []
    for c in sweep.cells:
        if c.num_selected == 0:
            zone = ZONE_HARD_SELECTION
        elif c.num_selected == total:
            zone = ZONE_NO_ACTION
        elif max_acc > 0 and c.accuracy >= 0.98 * max_acc and c.num_selected <= 0.25 * total:
            zone = ZONE_VERY_USEFUL
        elif max_acc > 0 and c.accuracy >= 0.95 * max_acc:
            zone = ZONE_USEFUL
        elif c.num_selected > 0.5 * total:
            zone = ZONE_UNDER_CONTROLLED
        else:
            zone = ZONE_OVER_CONTROLLED
        zones.append(
            ZoneCell(c.th_relevance, c.th_redundancy, c.num_selected, c.accuracy, zone)
        )
    return tuple(zones)


def selection_to_json(result: SelectionResult) -> str:
    """JSON text for a selection result: bands, thresholds, audit trace."""
    payload = {
        "selected": list(result.selected),
        "relevant_pool": list(result.relevant_pool),
        "mi_curve": [float(v) for v in result.mi_curve],
        "measure_kind": result.config.measure_kind,
        "th_relevance": result.config.th_relevance,
        "th_redundancy": result.config.th_redundancy,
        "mask_mode": result.config.mask_mode,
        "num_bins": result.config.quantization.num_bins,
        "trace": [
            {
                "x": t.x,
                "y": t.y,
                "value": t.value,
                "admitted": t.admitted,
                "band": t.band,
            }
            for t in result.trace
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
