"""Hyperspectral cube and ground-truth containers with bit-exact file I/O.

Cube interchange format: a JSON text header (keys "bands", "rows", "cols",
"dtype", "byte_order") next to a raw band-sequential data file of unsigned
16-bit little-endian samples (all of band 0, then band 1, ...). Ground
truth maps travel as binary PGM (P5, maxval <= 255) whose pixel values are
the class labels; 0 marks unlabeled pixels.

All containers are immutable after construction and safe to share across
threads. Ordering is row-major everywhere so that positional pairing of
band samples and labels is stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError

SUPPORTED_DTYPE = "u16"
SUPPORTED_BYTE_ORDER = "le"


@dataclass(frozen=True)
class CubeHeader:
    """Sidecar description of a raw cube data file."""

    rows: int
    cols: int
    bands: int
    dtype: str = SUPPORTED_DTYPE
    byte_order: str = SUPPORTED_BYTE_ORDER

    def __post_init__(self):
        if self.bands < 1 or self.rows < 1 or self.cols < 1:
            raise DataFormatError(
                f"cube dimensions must be >= 1, got bands={self.bands} "
                f"rows={self.rows} cols={self.cols}"
            )
        if self.dtype != SUPPORTED_DTYPE:
            raise DataFormatError(f"unsupported dtype token {self.dtype!r}")
        if self.byte_order != SUPPORTED_BYTE_ORDER:
            raise DataFormatError(f"unsupported byte_order token {self.byte_order!r}")


@dataclass(frozen=True)
class HsiCube:
    """A hyperspectral cube: (bands, rows, cols) of u16 reflectance samples.

    Real airborne scenes typically hold raw radiometric counts well inside
    the u16 range (the classic Indian Pines cube spans roughly 955..9406);
    synthetic cubes may use the full range.
    """

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.uint16)
        if arr.ndim != 3:
            raise DataFormatError("cube samples must be 3-D (bands, rows, cols)")
        if min(arr.shape) < 1:
            raise DataFormatError("cube dimensions must all be >= 1")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def bands(self) -> int:
        return self.samples.shape[0]

    @property
    def rows(self) -> int:
        return self.samples.shape[1]

    @property
    def cols(self) -> int:
        return self.samples.shape[2]

    def band(self, b: int) -> np.ndarray:
        """Read-only (rows, cols) view of one band."""
        return self.samples[b]

    def pixel_vector(self, row: int, col: int) -> PixelVector:
        """Spectral signature of one pixel across all bands."""
        return PixelVector(self.samples[:, row, col])


@dataclass(frozen=True)
class PixelVector:
    """One pixel's values along the spectral axis; length equals cube bands."""

    band_values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.band_values)
        if arr.ndim != 1 or arr.size < 1:
            raise DataFormatError("pixel vector must be 1-D and non-empty")
        object.__setattr__(self, "band_values", arr)

    def __len__(self) -> int:
        return self.band_values.size


@dataclass(frozen=True)
class GroundTruth:
    """Per-pixel class labels. 0 = unlabeled, 1..num_classes = classes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.uint8)
        if arr.ndim != 2:
            raise DataFormatError("ground truth labels must be 2-D")
        if not (1 <= self.num_classes <= 255):
            raise DataFormatError("num_classes must be in 1..255")
        if arr.max(initial=0) > self.num_classes:
            raise DataFormatError(
                f"label {int(arr.max())} exceeds num_classes={self.num_classes}"
            )
        if not (arr != 0).any():
            raise DataFormatError("no labeled pixels (all labels are 0)")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def rows(self) -> int:
        return self.labels.shape[0]

    @property
    def cols(self) -> int:
        return self.labels.shape[1]


def read_cube(header_path, data_path) -> HsiCube:
    """Load a cube from a JSON header plus raw band-sequential u16-LE data.

    Raises DataFormatError on malformed headers, unsupported dtype or
    byte-order tokens, and any size mismatch between header and data file.
    """
    try:
        meta = json.loads(Path(header_path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed cube header {header_path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise DataFormatError(f"cube header {header_path} must be a JSON object")
    try:
        header = CubeHeader(
            rows=int(meta["rows"]),
            cols=int(meta["cols"]),
            bands=int(meta["bands"]),
            dtype=str(meta["dtype"]),
            byte_order=str(meta["byte_order"]),
        )
    except KeyError as exc:
        raise DataFormatError(f"cube header missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"cube header has non-numeric dimension: {exc}") from exc

    raw = Path(data_path).read_bytes()
    expected = 2 * header.bands * header.rows * header.cols
    if len(raw) != expected:
        raise DataFormatError(
            f"cube data size mismatch: header implies {expected} bytes, "
            f"file has {len(raw)}"
        )
    samples = np.frombuffer(raw, dtype="<u2").reshape(
        header.bands, header.rows, header.cols
    )
    return HsiCube(samples)


def write_cube(cube: HsiCube, header_path, data_path) -> None:
    """Emit the header + raw layout that read_cube expects."""
    header = {
        "bands": cube.bands,
        "rows": cube.rows,
        "cols": cube.cols,
        "dtype": SUPPORTED_DTYPE,
        "byte_order": SUPPORTED_BYTE_ORDER,
    }
    Path(header_path).write_text(json.dumps(header, sort_keys=True) + "\n")
    Path(data_path).write_bytes(
        np.ascontiguousarray(cube.samples, dtype="<u2").tobytes()
    )


def _parse_pgm_tokens(raw: bytes):
    # P5 header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed; a single whitespace byte ends the header.
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataFormatError("truncated PGM header")
        tokens.append(raw[start:pos])
    return tokens, pos + 1  # skip the single whitespace after maxval


def read_ground_truth(path, num_classes: int) -> GroundTruth:
    """Decode a binary PGM (P5) label map and validate it against num_classes.

    Labels above num_classes raise DataFormatError rather than clamping.
    """
    raw = Path(path).read_bytes()
    tokens, offset = _parse_pgm_tokens(raw)
    if tokens[0] != b"P5":
        raise DataFormatError(f"{path}: not a binary PGM (P5) file")
    try:
        cols, rows, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric PGM header field") from exc
    if maxval > 255:
        raise DataFormatError(f"{path}: PGM maxval {maxval} > 255 unsupported")
    body = raw[offset : offset + rows * cols]
    if len(body) != rows * cols:
        raise DataFormatError(
            f"{path}: PGM pixel data truncated ({len(body)} of {rows * cols} bytes)"
        )
    labels = np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)
    return GroundTruth(labels, num_classes)


def write_ground_truth(gt: GroundTruth, path) -> None:
    """Emit a label map as binary PGM (P5, maxval 255)."""
    write_label_map(gt.labels, path)


def write_label_map(labels: np.ndarray, path) -> None:
    """Emit any 2-D uint8 label array as binary PGM (P5, maxval 255)."""
    arr = np.ascontiguousarray(labels, dtype=np.uint8)
    if arr.ndim != 2:
        raise DataFormatError("label map must be 2-D")
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (cols, rows))
        fh.write(arr.tobytes())


def labeled_mask(gt: GroundTruth) -> np.ndarray:
    """(N, 2) array of (row, col) positions with nonzero label, row-major."""
    return np.argwhere(gt.labels != 0)


def all_positions(rows: int, cols: int) -> np.ndarray:
    """(rows*cols, 2) array of every (row, col) position, row-major."""
    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return np.column_stack([rr.ravel(), cc.ravel()])


def band_at(cube: HsiCube, band: int, positions: np.ndarray) -> np.ndarray:
    """Band samples at the given (row, col) positions, in position order."""
    return cube.samples[band, positions[:, 0], positions[:, 1]]
