"""Numerical primitives shared by the solvers: global top-S magnitude
projection, k-th magnitude selection, ridge-shifted Gram assembly and
Cholesky-backed SPD solves.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatchError, NumericError

_SORT_FALLBACK = 64  # below this length plain sorting beats partitioning


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular C with C @ C.T equal to the factored SPD matrix."""

    lower: np.ndarray

    @property
    def order(self) -> int:
        return self.lower.shape[0]


def select_kth_magnitude(values, k: int) -> float:
    """k-th largest absolute value of a flat array (1 = largest).

    Expected-linear-time iterative quickselect with a median-of-three pivot,
    run over a scratch copy of the magnitudes; short arrays fall back to a
    full sort. Agrees exactly with sorting.
    """
    flat = np.asarray(values, dtype=float).ravel()
    if not 1 <= k <= flat.size:
        raise ValueError(f"k must be in [1, {flat.size}], got {k}")
    return _quickselect_magnitude(np.abs(flat), k)


def _quickselect_magnitude(mags: np.ndarray, k: int) -> float:
    """k-th largest of a magnitude scratch array (consumed)."""
    target = mags.size - k  # k-th largest == target-th smallest, 0-based
    a = mags
    while True:
        n = a.size
        if n < _SORT_FALLBACK:
            a.sort()
            return float(a[target])
        lo, mid, hi = a[0], a[n // 2], a[-1]
        pivot = max(min(lo, mid), min(max(lo, mid), hi))
        below = a[a < pivot]
        if target < below.size:
            a = below
            continue
        above = a[a > pivot]
        n_equal = n - below.size - above.size
        if target < below.size + n_equal:
            return float(pivot)
        target -= below.size + n_equal
        a = above


def _threshold_flat(flat, mags, scratch, budget, out):
    """Keep the `budget` largest magnitudes of `flat`, zero the rest, into `out`.

    Ties at the cutoff magnitude keep the smaller linear index. `mags` must
    equal np.abs(flat) and is left intact; `scratch` is overwritten. All
    arrays are 1-D of equal length; `out` must not alias `flat`. The hot
    solver loop calls this with preallocated buffers so an iteration does no
    large allocations.
    """
    if budget == 0:
        out[:] = 0.0
        return
    if budget >= flat.size:
        np.copyto(out, flat)
        return
    cutoff_idx = mags.size - budget
    np.copyto(scratch, mags)
    scratch.partition(cutoff_idx)  # in-place introselect; same value quickselect finds
    tau = scratch[cutoff_idx]
    keep = mags > tau
    short = budget - int(np.count_nonzero(keep))
    if short > 0:
        ties = np.flatnonzero(mags == tau)
        keep[ties[:short]] = True
    np.multiply(flat, keep, out=out)


def global_hard_threshold(x, budget: int) -> np.ndarray:
    """Projection onto matrices with at most `budget` nonzeros.

    Keeps the `budget` largest-magnitude entries of x and zeroes the rest;
    entries tied at the cutoff magnitude are kept in increasing column-major
    linear index order, which makes the output deterministic and identical
    to a stable full-sort selection.
    """
    arr = np.asarray(x, dtype=float)
    if not 0 <= budget <= arr.size:
        raise ValueError(f"budget must be in [0, {arr.size}], got {budget}")
    flat = arr.ravel(order="F")
    mags = np.abs(flat)
    out = np.empty_like(flat)
    _threshold_flat(flat, mags, np.empty_like(mags), budget, out)
    return out.reshape(arr.shape, order="F")


def gram_plus_ridge(dictionary, rho: float) -> np.ndarray:
    """D.T @ D + rho * I; symmetric positive definite for rho > 0."""
    data = np.asarray(getattr(dictionary, "data", dictionary), dtype=float)
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    gram = data.T @ data
    gram[np.diag_indices_from(gram)] += rho
    return gram


def cholesky_factor(matrix) -> CholeskyFactor:
    """Cholesky factorization A = C @ C.T of a symmetric positive definite A."""
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    try:
        lower = np.linalg.cholesky(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Cholesky factorization failed: {exc}") from exc
    return CholeskyFactor(lower)


def solve_spd(factor: CholeskyFactor, b) -> np.ndarray:
    """Solve (C @ C.T) X = b by forward then backward triangular substitution."""
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != factor.order:
        raise DimensionMismatchError(
            f"rhs has {rhs.shape[0]} rows, factor order is {factor.order}"
        )
    half = solve_triangular(factor.lower, rhs, lower=True, check_finite=False)
    return solve_triangular(factor.lower.T, half, lower=False, check_finite=False)
