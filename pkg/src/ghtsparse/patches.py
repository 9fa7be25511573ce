"""Grayscale image <-> patch-matrix conversion, atom-count heatmaps and
native 8-bit PGM (P5) I/O.

Images are plain 2-D float arrays with intensities nominally in 0..255.
A patch matrix stacks each non-overlapping patch_side x patch_side patch,
in row-major grid order, as one column; pixels inside a patch are columnized
in column-major order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


@dataclass(frozen=True)
class PatchMatrix:
    """patch_side**2 x (grid_rows*grid_cols) matrix of columnized patches."""

    data: np.ndarray
    patch_side: int
    grid_rows: int
    grid_cols: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise DimensionMismatchError("patch matrix must be 2-D")
        if data.shape[0] != self.patch_side**2:
            raise DimensionMismatchError(
                f"expected {self.patch_side ** 2} rows for side {self.patch_side}, "
                f"got {data.shape[0]}"
            )
        if data.shape[1] != self.grid_rows * self.grid_cols:
            raise DimensionMismatchError(
                f"expected {self.grid_rows * self.grid_cols} columns for a "
                f"{self.grid_rows}x{self.grid_cols} grid, got {data.shape[1]}"
            )
        object.__setattr__(self, "data", data)

    @property
    def n_pixels(self) -> int:
        return self.data.shape[0]

    @property
    def n_patches(self) -> int:
        return self.data.shape[1]


def _as_image(image) -> np.ndarray:
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"image must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image pixels must be finite")
    return arr


def image_to_patch_matrix(image, patch_side: int) -> PatchMatrix:
    """Cut an image into non-overlapping square patches and columnize them.

    Both image dimensions must be divisible by patch_side; pass a pre-cropped
    image otherwise (the CLI offers --crop for that).
    """
    arr = _as_image(image)
    if patch_side < 1:
        raise ValueError(f"patch_side must be >= 1, got {patch_side}")
    height, width = arr.shape
    if height % patch_side:
        raise DimensionMismatchError(
            f"image height {height} is not divisible by patch side {patch_side}"
        )
    if width % patch_side:
        raise DimensionMismatchError(
            f"image width {width} is not divisible by patch side {patch_side}"
        )
    grid_rows, grid_cols = height // patch_side, width // patch_side
    # axes after reshape: (grid row, pixel row, grid col, pixel col);
    # reorder so a C reshape yields column-major pixels within each patch
    # and row-major patch order across columns
    blocks = arr.reshape(grid_rows, patch_side, grid_cols, patch_side)
    data = blocks.transpose(3, 1, 0, 2).reshape(patch_side**2, grid_rows * grid_cols)
    return PatchMatrix(data, patch_side, grid_rows, grid_cols)


def patch_matrix_to_image(patches: PatchMatrix, height: int, width: int) -> np.ndarray:
    """Reassemble the image; exact inverse of image_to_patch_matrix."""
    side = patches.patch_side
    if height != patches.grid_rows * side or width != patches.grid_cols * side:
        raise DimensionMismatchError(
            f"target {height}x{width} does not match a {patches.grid_rows}x"
            f"{patches.grid_cols} grid of side-{side} patches"
        )
    blocks = patches.data.reshape(side, side, patches.grid_rows, patches.grid_cols)
    return blocks.transpose(2, 1, 3, 0).reshape(height, width)


def atom_count_heatmap(codes, grid_rows: int, grid_cols: int, patch_side: int) -> np.ndarray:
    """Per-patch nonzero-count map rendered at image resolution.

    Every pixel of patch p takes the nonzero count of codes column p, linearly
    rescaled to 0..255 over the observed min/max count (a constant count maps
    to all zeros).
    """
    arr = np.asarray(codes, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatchError("codes must be a 2-D matrix")
    if arr.shape[1] != grid_rows * grid_cols:
        raise DimensionMismatchError(
            f"codes has {arr.shape[1]} columns but the grid holds "
            f"{grid_rows * grid_cols} patches"
        )
    counts = np.count_nonzero(arr, axis=0).astype(float).reshape(grid_rows, grid_cols)
    lo, hi = counts.min(), counts.max()
    scaled = np.zeros_like(counts) if hi == lo else (counts - lo) * (255.0 / (hi - lo))
    return np.kron(scaled, np.ones((patch_side, patch_side)))


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM (P5) file as a float image."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header tokens may be separated by whitespace and '#' comment lines
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if pos >= len(raw):
        raise ValueError(f"{path}: truncated PGM header")
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = (int(f) for f in fields)
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=height * width, offset=pos)
    if pixels.size != height * width:
        raise ValueError(f"{path}: truncated PGM raster")
    return pixels.reshape(height, width).astype(float)


def write_pgm(image, path) -> None:
    """Write a float image as 8-bit binary PGM, clipping and rounding to 0..255."""
    arr = _as_image(image)
    pixels = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
