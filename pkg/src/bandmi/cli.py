"""Command-line surface: info, synth, select, sweep, classify, fano.

Every command writes its artifacts into --out-dir: delimited/JSON result
files, rendered figures mirroring them, and a single run manifest.
Exit codes: 0 success (an empty selection is success), 1 usage or
configuration error, 2 data/format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    ClassifierConfig,
    SplitSpec,
    design_matrix_rows,
    evaluate,
    reconstruct_map,
    report_to_json,
    split,
)
from .cube import read_cube, read_ground_truth, write_cube, write_label_map
from .errors import ConfigError, DataFormatError
from .infotheory import (
    QuantizationSpec,
    band_gt_mi_curve,
    fano_bounds,
    label_values,
    resolve_positions,
    _entropy_of,
)
from .report import write_csv, write_manifest, write_text
from .selection import (
    SelectionConfig,
    select_bands,
    selection_to_json,
    threshold_sweep,
    zone_report,
)
from .synth import (
    SceneRecipe,
    default_scene_recipe,
    generate_scene,
    recipe_from_json,
    recipe_to_json,
)

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; data problems exit 2 (handled in main).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_input_args(p, cube=True):
    if cube:
        p.add_argument("--cube-header", required=True, help="cube JSON header path")
        p.add_argument("--cube-data", required=True, help="cube raw u16-LE data path")
    p.add_argument("--gt", required=True, help="ground-truth PGM (P5) path")
    p.add_argument(
        "--num-classes", type=int, default=16, help="number of classes C (default 16)"
    )


def _add_quant_args(p):
    p.add_argument("--bins", type=int, default=256, help="quantization bins (default 256)")
    p.add_argument(
        "--mask",
        choices=("labeled", "all"),
        default="labeled",
        help="pixels used for MI estimation (default labeled)",
    )


def _add_classifier_args(p):
    p.add_argument(
        "--classifier",
        choices=("nearest-centroid", "knn"),
        default="nearest-centroid",
    )
    p.add_argument("--k", type=int, default=5, help="k for knn (odd, default 5)")
    p.add_argument(
        "--train-fraction", type=float, default=0.5, help="training share (default 0.5)"
    )
    p.add_argument(
        "--no-standardize",
        action="store_true",
        help="skip per-band z-scoring of features",
    )


def _add_out_args(p):
    p.add_argument("--out-dir", required=True, help="artifact directory (created)")
    p.add_argument(
        "--no-figures", action="store_true", help="skip rendering figure files"
    )


def _classifier_config(args) -> ClassifierConfig:
    kind = "nearest_centroid" if args.classifier == "nearest-centroid" else "knn"
    return ClassifierConfig(kind=kind, k=args.k, standardize=not args.no_standardize)


def _load_inputs(args):
    cube = read_cube(args.cube_header, args.cube_data)
    gt = read_ground_truth(args.gt, args.num_classes)
    return cube, gt


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"malformed grid {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"grid {text!r} is empty")
    return values


def _fano_rows(cube, gt, spec, mask_mode):
    curve = band_gt_mi_curve(cube, gt, spec, mask_mode)
    positions = resolve_positions(gt, mask_mode)
    labels = label_values(gt, positions)
    class_h = _entropy_of(np.bincount(labels, minlength=gt.num_classes + 1))
    rows = []
    for b, mi in enumerate(curve):
        fb = fano_bounds(class_h, min(float(mi), class_h), gt.num_classes)
        rows.append(
            [b, float(mi), fb.class_entropy, fb.conditional_entropy, fb.lower, fb.upper]
        )
    return curve, rows


def cmd_info(args) -> int:
    cube, gt = _load_inputs(args)
    out = _out_dir(args)
    spec = QuantizationSpec(num_bins=args.bins)
    if args.fano:
        curve, rows = _fano_rows(cube, gt, spec, args.mask)
        header = ["band_index", "mi_bits", "class_entropy", "cond_entropy",
              "pe_lower", "pe_upper"]
        write_csv(out / "mi_curve.csv", header, rows)
    else:
        curve = band_gt_mi_curve(cube, gt, spec, args.mask)
        rows = [[b, float(mi)] for b, mi in enumerate(curve)]
        write_csv(out / "mi_curve.csv", ["band_index", "mi_bits"], rows)
    if not args.no_figures:
        from . import figures

        figures.plot_mi_curve(curve, out / "mi_curve.png")
    write_manifest(
        out,
        "info",
        {"cube_header": args.cube_header, "cube_data": args.cube_data, "gt": args.gt},
        {"bins": args.bins, "mask": args.mask, "fano": args.fano,
         "num_classes": args.num_classes},
    )
    print(f"wrote MI curve for {cube.bands} bands to {out}")
    return 0


def cmd_fano(args) -> int:
    cube, gt = _load_inputs(args)
    out = _out_dir(args)
    spec = QuantizationSpec(num_bins=args.bins)
    curve, rows = _fano_rows(cube, gt, spec, args.mask)
    header = ["band_index", "mi_bits", "class_entropy", "cond_entropy",
              "pe_lower", "pe_upper"]
    write_csv(out / "fano.csv", header, rows)
    if not args.no_figures:
        from . import figures

        lowers = [r[4] for r in rows]
        uppers = [r[5] for r in rows]
        figures.plot_fano_bounds(curve, lowers, uppers, out / "fano.png")
    write_manifest(
        out,
        "fano",
        {"cube_header": args.cube_header, "cube_data": args.cube_data, "gt": args.gt},
        {"bins": args.bins, "mask": args.mask, "num_classes": args.num_classes},
    )
    print(f"wrote error-probability bounds for {cube.bands} bands to {out}")
    return 0


def cmd_synth(args) -> int:
    gt = read_ground_truth(args.gt, args.num_classes)
    out = _out_dir(args)
    if args.recipe:
        recipe = recipe_from_json(Path(args.recipe).read_text())
        if args.seed is not None:
            recipe = SceneRecipe(recipe.bands, master_seed=args.seed)
    else:
        seed = args.seed if args.seed is not None else DEFAULT_SEED
        recipe = default_scene_recipe(gt, master_seed=seed)
    cube = generate_scene(gt, recipe)
    write_cube(cube, out / "cube.json", out / "cube.u16")
    write_text(out / "recipe.json", recipe_to_json(recipe))
    if not args.no_figures:
        from . import figures

        figures.plot_band_gallery(cube, out / "bands.png")
    write_manifest(
        out,
        "synth",
        {"gt": args.gt, "recipe": args.recipe},
        {"num_classes": args.num_classes, "master_seed": recipe.master_seed,
         "bands": len(recipe.bands)},
    )
    print(f"wrote {cube.bands}-band synthetic cube to {out}")
    return 0


def _matrix_csv_rows(matrix):
    header = ["band"] + [str(int(b)) for b in matrix.band_order]
    rows = []
    for i, b in enumerate(matrix.band_order):
        rows.append([int(b)] + [float(v) for v in matrix.cells[i]])
    return header, rows


def cmd_select(args) -> int:
    cube, gt = _load_inputs(args)
    out = _out_dir(args)
    config = SelectionConfig(
        th_relevance=args.th_relevance,
        th_redundancy=args.th_redundancy,
        measure_kind=args.measure,
        quantization=QuantizationSpec(num_bins=args.bins),
        mask_mode=args.mask,
    )
    result = select_bands(cube, gt, config)
    write_text(out / "selection.json", selection_to_json(result))
    if result.matrix is not None:
        header, rows = _matrix_csv_rows(result.matrix)
        write_csv(out / "redundancy_matrix.csv", header, rows)
    else:
        write_csv(out / "redundancy_matrix.csv", ["band"], [])
    if not args.no_figures:
        from . import figures

        figures.plot_mi_curve(
            result.mi_curve, out / "mi_curve.png", threshold=args.th_relevance
        )
        if result.matrix is not None:
            figures.plot_redundancy_matrix(result.matrix, out / "redundancy_matrix.png")
    write_manifest(
        out,
        "select",
        {"cube_header": args.cube_header, "cube_data": args.cube_data, "gt": args.gt},
        {"th_relevance": args.th_relevance, "th_redundancy": args.th_redundancy,
         "measure": config.measure_kind, "bins": args.bins, "mask": args.mask,
         "num_classes": args.num_classes},
    )
    if not result.selected:
        print("warning: selection is empty at these thresholds", file=sys.stderr)
    print(f"selected {len(result.selected)} of {cube.bands} bands: "
          f"{list(result.selected)}")
    return 0


def cmd_sweep(args) -> int:
    cube, gt = _load_inputs(args)
    out = _out_dir(args)
    sweep = threshold_sweep(
        cube,
        gt,
        _parse_grid(args.relevance_grid),
        _parse_grid(args.redundancy_grid),
        measure_kind=args.measure,
        classifier_config=_classifier_config(args),
        split_spec=SplitSpec(train_fraction=args.train_fraction, seed=args.seed),
        quantization=QuantizationSpec(num_bins=args.bins),
        mask_mode=args.mask,
    )
    rows = [
        [c.th_relevance, c.th_redundancy, c.num_selected, c.accuracy]
        for c in sweep.cells
    ]
    write_csv(out / "sweep.csv",
              ["th_relevance", "th_redundancy", "num_bands", "accuracy"], rows)
    zones = zone_report(sweep)
    write_csv(
        out / "zones.csv",
        ["th_relevance", "th_redundancy", "num_bands", "accuracy", "zone"],
        [[z.th_relevance, z.th_redundancy, z.num_selected, z.accuracy, z.zone]
         for z in zones],
    )
    if not args.no_figures:
        from . import figures

        figures.plot_sweep_grid(sweep.cells, "accuracy", "accuracy",
                                out / "sweep_accuracy.png")
        figures.plot_sweep_grid(sweep.cells, "num_selected", "bands retained",
                                out / "sweep_num_bands.png")
    write_manifest(
        out,
        "sweep",
        {"cube_header": args.cube_header, "cube_data": args.cube_data, "gt": args.gt},
        {"relevance_grid": args.relevance_grid, "redundancy_grid": args.redundancy_grid,
         "measure": sweep.measure_kind, "bins": args.bins, "mask": args.mask,
         "classifier": args.classifier, "k": args.k, "seed": args.seed,
         "train_fraction": args.train_fraction,
         "standardize": not args.no_standardize,
         "num_classes": args.num_classes},
    )
    print(f"wrote {len(sweep.cells)}-cell threshold sweep to {out}")
    return 0


def _selected_bands(args) -> list[int]:
    if args.bands:
        try:
            return [int(v) for v in args.bands.split(",") if v.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"malformed band list {args.bands!r}") from exc
    try:
        payload = json.loads(Path(args.selection).read_text())
        return [int(b) for b in payload["selected"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed selection file {args.selection}: {exc}") from exc


def cmd_classify(args) -> int:
    cube, gt = _load_inputs(args)
    out = _out_dir(args)
    selected = _selected_bands(args)
    split_spec = SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    classifier = _classifier_config(args)
    report = evaluate(cube, gt, selected, split_spec, classifier)
    write_text(out / "report.json", report_to_json(report))
    header = ["true_class"] + [str(c) for c in range(1, gt.num_classes + 1)]
    write_csv(
        out / "confusion.csv",
        header,
        [[c + 1] + report.confusion[c].tolist() for c in range(gt.num_classes)],
    )
    scope = "full" if args.full_scene else "labeled"
    label_map = reconstruct_map(cube, gt, selected, split_spec, classifier, scope)
    write_label_map(label_map.labels, out / "map.pgm")
    if args.export_design:
        parts = split(gt, split_spec)
        for name, positions in (("train", parts.train), ("test", parts.test)):
            h, rows = design_matrix_rows(cube, gt, selected, positions)
            write_csv(out / f"{name}_design.csv", h, rows)
    if not args.no_figures:
        from . import figures

        figures.plot_label_map(
            label_map.labels, gt.num_classes, out / "map.png",
            title=f"predicted map ({scope}), accuracy {report.overall_accuracy:.4f}",
        )
    write_manifest(
        out,
        "classify",
        {"cube_header": args.cube_header, "cube_data": args.cube_data, "gt": args.gt,
         "selection": args.selection, "bands": args.bands},
        {"classifier": args.classifier, "k": args.k, "seed": args.seed,
         "train_fraction": args.train_fraction, "scope": scope,
         "standardize": not args.no_standardize,
         "num_classes": args.num_classes},
    )
    print(f"overall accuracy {report.overall_accuracy:.4f} "
          f"with {report.num_bands_used} bands; artifacts in {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="bandmi",
        description="Mutual-information band selection for hyperspectral images",
    )
    parser.add_argument("--version", action="version", version=f"bandmi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="per-band MI with the ground truth")
    _add_input_args(p)
    _add_quant_args(p)
    p.add_argument("--fano", action="store_true", help="add error-bound columns")
    _add_out_args(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("synth", help="generate a synthetic band family from a GT map")
    _add_input_args(p, cube=False)
    p.add_argument("--recipe", help="scene recipe JSON (default: built-in 19-band scene)")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    _add_out_args(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("select", help="relevance + redundancy band selection")
    _add_input_args(p)
    _add_quant_args(p)
    p.add_argument("--measure", choices=("as", "u"), default="as",
                   help="redundancy measure (default as)")
    p.add_argument("--th-relevance", type=float, default=0.4,
                   help="MI relevance threshold in bits (default 0.4)")
    p.add_argument("--th-redundancy", type=float, default=0.7,
                   help="normalized-MI redundancy threshold (default 0.7)")
    _add_out_args(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("sweep", help="grid-evaluate threshold pairs")
    _add_input_args(p)
    _add_quant_args(p)
    p.add_argument("--measure", choices=("as", "u"), default="as")
    p.add_argument("--relevance-grid", required=True,
                   help="comma-separated relevance thresholds")
    p.add_argument("--redundancy-grid", required=True,
                   help="comma-separated redundancy thresholds")
    _add_classifier_args(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_out_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="evaluate a band subset and rebuild the map")
    _add_input_args(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--bands", help="comma-separated band indices")
    group.add_argument("--selection", help="selection.json from the select command")
    _add_classifier_args(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--full-scene", action="store_true",
                   help="predict every pixel, not just labeled ones")
    p.add_argument("--export-design", action="store_true",
                   help="also write train/test design matrices as CSV")
    _add_out_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fano", help="per-band error-probability bounds")
    _add_input_args(p)
    _add_quant_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_fano)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bandmi: error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"bandmi: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bandmi: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
