"""Evaluation metrics: reconstruction RMSE, PSNR, and support mismatch."""

import math

import numpy as np

from .errors import DimensionMismatchError


def rmse(dictionary, codes, y) -> float:
    """sqrt(||D Z - Y||_F^2 / P) for an L x P code matrix Z and N x P signals Y."""
    d = np.asarray(getattr(dictionary, "data", dictionary), dtype=float)
    z = np.asarray(codes, dtype=float)
    signals = np.asarray(getattr(y, "data", y), dtype=float)
    if d.ndim != 2 or z.ndim != 2 or signals.ndim != 2 or d.shape[1] != z.shape[0] \
            or d.shape[0] != signals.shape[0] or z.shape[1] != signals.shape[1]:
        raise DimensionMismatchError(
            f"incompatible shapes: D {d.shape}, Z {z.shape}, Y {signals.shape}"
        )
    return float(np.linalg.norm(d @ z - signals) / math.sqrt(signals.shape[1]))


def psnr(reference, test, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    ref = np.asarray(reference, dtype=float)
    img = np.asarray(test, dtype=float)
    if ref.shape != img.shape:
        raise DimensionMismatchError(
            f"image shapes differ: {ref.shape} vs {img.shape}"
        )
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = float(np.mean((ref - img) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def support_mismatch_ratio(truth, recovered) -> float:
    """Normalized support disagreement in [0, 1].

    (max(|A|, |B|) - |A & B|) / max(|A|, |B|); zero means the supports agree
    exactly, and two empty supports count as a perfect match.
    """
    a, b = set(truth), set(recovered)
    larger = max(len(a), len(b))
    if larger == 0:
        return 0.0
    return (larger - len(a & b)) / larger


def matrix_support(matrix) -> set:
    """Set of (row, column) index pairs with nonzero value."""
    arr = np.asarray(matrix)
    rows, cols = np.nonzero(arr)
    return set(zip(rows.tolist(), cols.tolist()))
