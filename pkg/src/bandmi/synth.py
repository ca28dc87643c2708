"""Seeded synthetic band families derived from a ground-truth map.

A scene recipe lists band constructions: clean label bijections, noisy
copies, class-occluded copies, exact duplicates, inversions, and pure
noise. Generation is deterministic for a fixed master seed; each band
draws from its own RNG stream (master seed combined with band position and
the band's own seed field), so bands can be generated in any order or in
parallel with identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cube import GroundTruth, HsiCube
from .errors import ConfigError

U16_MAX = 65535

BAND_KINDS = ("clean", "noisy", "occluded", "duplicate_of", "pure_noise", "inverted")


@dataclass(frozen=True)
class SyntheticBandSpec:
    """One band construction. noise_sigma is in ground-truth label units:
    sigma 1.0 blurs a full class step of the clean encoding."""

    kind: str
    source_band: int | None = None
    noise_sigma: float = 0.0
    occluded_classes: tuple[int, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BAND_KINDS:
            raise ConfigError(f"unknown band kind {self.kind!r}")
        if self.kind == "duplicate_of" and self.source_band is None:
            raise ConfigError("duplicate_of requires source_band")
        if self.kind == "occluded" and not self.occluded_classes:
            raise ConfigError("occluded requires non-empty occluded_classes")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        object.__setattr__(
            self, "occluded_classes", tuple(sorted(set(self.occluded_classes)))
        )


@dataclass(frozen=True)
class SceneRecipe:
    """Ordered band specs plus the master seed that derives every stream."""

    bands: tuple[SyntheticBandSpec, ...]
    master_seed: int = 0

    def __post_init__(self):
        bands = tuple(self.bands)
        if not bands:
            raise ConfigError("recipe must contain at least one band")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")
        for i, spec in enumerate(bands):
            if spec.kind == "duplicate_of" and not (0 <= spec.source_band < i):
                raise ConfigError(
                    f"band {i}: duplicate_of must reference an earlier band, "
                    f"got {spec.source_band}"
                )
        object.__setattr__(self, "bands", bands)


def class_scale(num_classes: int) -> int:
    """Clean-encoding scale constant: classes maximally separated in u16."""
    return U16_MAX // num_classes


def _band_rng(recipe: SceneRecipe, position: int) -> np.random.Generator:
    spec = recipe.bands[position]
    return np.random.default_rng(
        np.random.SeedSequence([recipe.master_seed, position, spec.seed])
    )


def generate_scene(gt: GroundTruth, recipe: SceneRecipe) -> HsiCube:
    """Materialize the recipe's bands over the ground-truth geometry."""
    scale = class_scale(gt.num_classes)
    clean = gt.labels.astype(np.int64) * scale
    shape = gt.labels.shape
    bands = np.empty((len(recipe.bands), *shape), dtype=np.uint16)
    for i, spec in enumerate(recipe.bands):
        if spec.kind == "clean":
            band = clean
        elif spec.kind == "noisy":
            rng = _band_rng(recipe, i)
            noise = np.rint(rng.normal(0.0, spec.noise_sigma * scale, shape))
            band = np.clip(clean + noise.astype(np.int64), 0, U16_MAX)
        elif spec.kind == "occluded":
            bad = [c for c in spec.occluded_classes if not 1 <= c <= gt.num_classes]
            if bad:
                raise ConfigError(f"band {i}: occluded classes {bad} out of range")
            band = np.where(np.isin(gt.labels, spec.occluded_classes), 0, clean)
        elif spec.kind == "duplicate_of":
            band = bands[spec.source_band]
        elif spec.kind == "pure_noise":
            rng = _band_rng(recipe, i)
            band = rng.integers(0, U16_MAX + 1, shape, dtype=np.uint16)
        elif spec.kind == "inverted":
            band = U16_MAX - clean
        else:  # pragma: no cover - kinds validated at construction
            raise ConfigError(f"unknown band kind {spec.kind!r}")
        bands[i] = band
    return HsiCube(bands)


def default_scene_recipe(gt: GroundTruth, master_seed: int = 42) -> SceneRecipe:
    """The standard 19-band validation scene.

    Composition: three pure-noise bands (expected to fall below any useful
    relevance threshold), a duplicate pair at positions (3, 4), a
    disjoint-occlusion pair at positions (7, 8) whose surviving class sets
    are mutually exclusive, plus clean/noisy/occluded/inverted texture.
    Requires at least 4 classes so the disjoint kept-sets exist.
    """
    c = gt.num_classes
    if c < 4:
        raise ConfigError(
            f"default recipe needs >= 4 classes to build disjoint occlusions, got {c}"
        )
    all_classes = range(1, c + 1)
    # Kept sets of ~C/5 classes each: small enough that the two bands share
    # almost no information, mirroring clearly-disjoint real bands.
    k = max(1, c // 5)
    keep_a = set(range(1, k + 1))
    keep_b = set(range(k + 1, 2 * k + 1))
    drop_a = tuple(x for x in all_classes if x not in keep_a)
    drop_b = tuple(x for x in all_classes if x not in keep_b)

    specs = [
        SyntheticBandSpec("clean"),
        SyntheticBandSpec("noisy", noise_sigma=0.005),
        SyntheticBandSpec("pure_noise"),
        SyntheticBandSpec("noisy", noise_sigma=0.05),
        SyntheticBandSpec("duplicate_of", source_band=3),
        SyntheticBandSpec("noisy", noise_sigma=0.1),
        SyntheticBandSpec("pure_noise"),
        SyntheticBandSpec("occluded", occluded_classes=drop_a),
        SyntheticBandSpec("occluded", occluded_classes=drop_b),
        SyntheticBandSpec("pure_noise"),
        SyntheticBandSpec("inverted"),
        SyntheticBandSpec("noisy", noise_sigma=0.25),
        SyntheticBandSpec("occluded", occluded_classes=(1,)),
        SyntheticBandSpec("noisy", noise_sigma=0.5),
        SyntheticBandSpec("occluded", occluded_classes=(2,)),
        SyntheticBandSpec("noisy", noise_sigma=0.75),
        SyntheticBandSpec("occluded", occluded_classes=(1, 2)),
        SyntheticBandSpec("noisy", noise_sigma=1.0),
        SyntheticBandSpec("noisy", noise_sigma=1.5),
    ]
    return SceneRecipe(tuple(specs), master_seed=master_seed)


DEFAULT_PURE_NOISE_BANDS = (2, 6, 9)
DEFAULT_DUPLICATE_PAIR = (3, 4)
DEFAULT_DISJOINT_PAIR = (7, 8)


def recipe_to_json(recipe: SceneRecipe) -> str:
    """Serialize a recipe to JSON text (inverse of recipe_from_json)."""
    payload = {
        "master_seed": recipe.master_seed,
        "bands": [
            {
                "kind": s.kind,
                "source_band": s.source_band,
                "noise_sigma": s.noise_sigma,
                "occluded_classes": list(s.occluded_classes),
                "seed": s.seed,
            }
            for s in recipe.bands
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def recipe_from_json(text: str) -> SceneRecipe:
    """Parse a recipe from JSON text produced by recipe_to_json."""
    try:
        payload = json.loads(text)
        bands = tuple(
            SyntheticBandSpec(
                kind=b["kind"],
                source_band=b.get("source_band"),
                noise_sigma=float(b.get("noise_sigma", 0.0)),
                occluded_classes=tuple(b.get("occluded_classes", ())),
                seed=int(b.get("seed", 0)),
            )
            for b in payload["bands"]
        )
        return SceneRecipe(bands, master_seed=int(payload.get("master_seed", 0)))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed recipe JSON: {exc}") from exc


def demo_ground_truth(
    rows: int = 145,
    cols: int = 145,
    num_classes: int = 16,
    labeled_fraction: float = 0.49,
    seed: int = 42,
) -> GroundTruth:
    """Block-structured label map for demos and tests.

    Classes tile the frame as a grid of rectangular patches of roughly
    equal area; a seeded uniform draw keeps ~labeled_fraction of the
    pixels labeled and zeroes the rest.
    """
    if not 0 < labeled_fraction <= 1:
        raise ConfigError("labeled_fraction must be in (0, 1]")
    side = int(np.ceil(np.sqrt(num_classes)))
    r_idx = np.minimum(np.arange(rows) * side // rows, side - 1)
    c_idx = np.minimum(np.arange(cols) * side // cols, side - 1)
    blocks = r_idx[:, None] * side + c_idx[None, :]
    labels = (blocks % num_classes) + 1
    rng = np.random.default_rng(seed)
    keep = rng.random((rows, cols)) < labeled_fraction
    return GroundTruth(np.where(keep, labels, 0).astype(np.uint8), num_classes)
