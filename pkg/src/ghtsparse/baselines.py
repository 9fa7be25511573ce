"""Patch-wise baselines that solve  min ||D x - y||_2^2  s.t.  ||x||_0 <= s
one signal at a time: orthogonal matching pursuit, accelerated iterative hard
thresholding, and CoSaMP, plus a batch driver that applies one of them column
by column.

Least-squares refits on an active set go through the Cholesky kernel with a
tiny ridge (1e-12) so that nearly dependent atom subsets stay factorable; a
genuinely unfactorable subset surfaces as NumericError.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DimensionMismatchError
from .kernels import cholesky_factor, global_hard_threshold, solve_spd
from .solvers import SolveResult, _as_signal_matrix

ACTIVE_SET_RIDGE = 1e-12
DEFAULT_BASELINE_ITERS = 100

_ALGORITHMS = ("omp", "aiht", "cosamp")


def _dict_data(dictionary) -> np.ndarray:
    return np.asarray(getattr(dictionary, "data", dictionary), dtype=float)


def _check_signal(d, y):
    vec = np.asarray(y, dtype=float).ravel()
    if vec.size != d.shape[0]:
        raise DimensionMismatchError(
            f"signal has {vec.size} entries, dictionary rows are {d.shape[0]}"
        )
    return vec


def _check_budget(s, d):
    limit = min(d.shape)
    if not 1 <= s <= limit:
        raise ValueError(f"per-signal budget must be in [1, {limit}], got {s}")


def _refit(d, support, y):
    """Least squares of y on the atoms in `support` (ridge-stabilized)."""
    sub = d[:, support]
    gram = sub.T @ sub
    gram[np.diag_indices_from(gram)] += ACTIVE_SET_RIDGE
    coef = solve_spd(cholesky_factor(gram), sub.T @ y)
    return coef, y - sub @ coef


def omp(dictionary, y, s: int) -> np.ndarray:
    """Orthogonal matching pursuit: greedily add the atom most correlated
    with the residual, refit on the active set, repeat s times (or stop
    early once the signal is matched to machine precision)."""
    d = _dict_data(dictionary)
    vec = _check_signal(d, y)
    _check_budget(s, d)
    signal_norm = np.linalg.norm(vec)
    support: list = []
    coef = np.zeros(0)
    residual = vec
    for _ in range(s):
        if np.linalg.norm(residual) <= 1e-12 * (1.0 + signal_norm):
            break
        corr = d.T @ residual
        corr[support] = 0.0
        support.append(int(np.argmax(np.abs(corr))))
        coef, residual = _refit(d, support, vec)
    x = np.zeros(d.shape[1])
    x[support] = coef
    return x


def _aiht_iterates(d, vec, s, max_iters):
    """Accepted AIHT iterates (x, residual norm), residual non-increasing.

    Step size comes from an exact line search along the gradient restricted
    to the current support (top-s gradient entries when x is still zero);
    the step is halved until the squared residual does not increase after
    projection.
    """
    n_atoms = d.shape[1]
    x = np.zeros(n_atoms)
    residual = vec.copy()
    obj = float(residual @ residual)
    for _ in range(max_iters):
        grad = d.T @ residual  # ascent direction on the fit term
        support = np.flatnonzero(x)
        if support.size == 0:
            support = np.argpartition(np.abs(grad), n_atoms - s)[n_atoms - s:]
        restricted = np.zeros(n_atoms)
        restricted[support] = grad[support]
        image = d @ restricted
        denom = float(image @ image)
        if denom <= 0.0:
            return
        step = float(restricted @ restricted) / denom
        accepted = False
        for _ in range(40):
            candidate = global_hard_threshold(x + step * grad, s)
            cand_resid = vec - d @ candidate
            cand_obj = float(cand_resid @ cand_resid)
            if cand_obj <= obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return
        x, residual = candidate, cand_resid
        improvement = obj - cand_obj
        obj = cand_obj
        yield x, float(np.sqrt(obj))
        if improvement <= 1e-12 * max(obj, 1e-300):
            return


def aiht(dictionary, y, s: int, max_iters: int = DEFAULT_BASELINE_ITERS) -> np.ndarray:
    """Accelerated iterative hard thresholding; returns the accepted iterate
    with the lowest residual norm."""
    d = _dict_data(dictionary)
    vec = _check_signal(d, y)
    _check_budget(s, d)
    best = np.zeros(d.shape[1])
    best_res = np.linalg.norm(vec)
    for x, res in _aiht_iterates(d, vec, s, max_iters):
        if res < best_res:
            best, best_res = x.copy(), res
    return best


def cosamp(dictionary, y, s: int, max_iters: int = DEFAULT_BASELINE_ITERS) -> np.ndarray:
    """CoSaMP: merge the current support with the 2s strongest residual
    correlations, least-squares refit on the merged set, prune back to the s
    largest coefficients; stops when the residual norm stagnates (relative
    change below 1e-6)."""
    d = _dict_data(dictionary)
    vec = _check_signal(d, y)
    _check_budget(s, d)
    n_atoms = d.shape[1]
    if 2 * s > n_atoms:
        raise ValueError(f"CoSaMP needs 2*s <= n_atoms, got s={s}, n_atoms={n_atoms}")
    x = np.zeros(n_atoms)
    residual = vec.copy()
    prev_norm = float(np.linalg.norm(residual))
    for _ in range(max_iters):
        corr = d.T @ residual
        strongest = np.argpartition(np.abs(corr), n_atoms - 2 * s)[n_atoms - 2 * s:]
        merged = np.union1d(np.flatnonzero(x), strongest)
        coef, _ = _refit(d, merged, vec)
        dense = np.zeros(n_atoms)
        dense[merged] = coef
        x = global_hard_threshold(dense, s)
        residual = vec - d @ x
        norm = float(np.linalg.norm(residual))
        if abs(prev_norm - norm) < 1e-6 * max(prev_norm, 1e-300):
            break
        prev_norm = norm
    return x


def _solve_column(algorithm, d, column, s, max_iters):
    if algorithm == "omp":
        return omp(d, column, s)
    if algorithm == "aiht":
        return aiht(d, column, s, max_iters)
    return cosamp(d, column, s, max_iters)


def solve_patchwise(
    algorithm: str,
    dictionary,
    y,
    s: int,
    max_iters: int = DEFAULT_BASELINE_ITERS,
    threads: int = 1,
) -> SolveResult:
    """Run a patch-wise baseline independently on every column of y.

    Columns are independent, so the result never depends on thread count or
    column order. Per-column failures are re-raised with the column index
    attached.
    """
    if algorithm not in _ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {_ALGORITHMS}")
    d = _dict_data(dictionary)
    signals = _as_signal_matrix(y)
    if signals.shape[0] != d.shape[0]:
        raise DimensionMismatchError(
            f"signals have {signals.shape[0]} rows, dictionary rows are {d.shape[0]}"
        )
    _check_budget(s, d)
    n_patches = signals.shape[1]
    codes = np.zeros((d.shape[1], n_patches))

    def run(column_index):
        try:
            codes[:, column_index] = _solve_column(
                algorithm, d, signals[:, column_index], s, max_iters
            )
        except Exception as exc:
            raise type(exc)(f"column {column_index}: {exc}") from exc

    start = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for future in [pool.submit(run, p) for p in range(n_patches)]:
                future.result()
    else:
        for p in range(n_patches):
            run(p)
    wall = time.perf_counter() - start
    final_resid = d @ codes - signals
    final_rmse = float(np.linalg.norm(final_resid) / np.sqrt(n_patches))
    return SolveResult(
        codes=codes,
        iterations=1,
        rmse_trace=[final_rmse],
        objective_trace=[],
        wall_time=wall,
        best_iteration=1,
        solver=algorithm,
    )
