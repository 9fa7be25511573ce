"""Synthetic-data generators and experiment runners: exact-sparse recovery
sweeps, wall-time scaling sweeps, a named-solver dispatcher shared with the
CLI, and a procedural natural-style test image.
"""

import csv
import json
import math
import time
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from .baselines import solve_patchwise
from .dictionaries import Dictionary, build_gaussian_dictionary, build_overcomplete_dct
from .metrics import matrix_support, rmse, support_mismatch_ratio
from .solvers import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_RHO,
    DEFAULT_TOLERANCE,
    GhtConfig,
    SolveResult,
    ght_admm,
    ght_qpm,
)

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - declared dependency, belt and braces
    threadpool_limits = None

SOLVER_NAMES = ("ght-qpm", "ght-admm", "omp", "aiht", "cosamp")
GLOBAL_SOLVERS = ("ght-qpm", "ght-admm")

# default recovery-benchmark problem size
DEFAULT_N_ROWS = 100
DEFAULT_N_ATOMS = 200
DEFAULT_N_SIGNALS = 100
DEFAULT_DICT_STD = 0.1


@dataclass(frozen=True)
class SyntheticInstance:
    """Exact-sparse recovery instance: signals = dictionary @ true_codes,
    every column of true_codes has exactly per_column_sparsity nonzeros,
    each +1 or -1."""

    dictionary: Dictionary
    true_codes: np.ndarray
    signals: np.ndarray
    per_column_sparsity: int
    seed: int


def gen_instance(n: int, l: int, p: int, s: int, seed: int) -> SyntheticInstance:
    """Draw a random instance: Gaussian dictionary (std 0.1, columns
    normalized), per-column supports uniform without replacement, signs
    uniform +-1. Deterministic per seed; the support/sign stream is seeded
    independently of the dictionary stream.
    """
    if s > l:
        raise ValueError(f"per-column sparsity {s} exceeds atom count {l}")
    if s < 1 or p < 1:
        raise ValueError("need s >= 1 and p >= 1")
    dictionary = build_gaussian_dictionary(n, l, DEFAULT_DICT_STD, seed)
    rng = np.random.default_rng([seed, 1])
    codes = np.zeros((l, p))
    for col in range(p):
        support = rng.choice(l, size=s, replace=False)
        codes[support, col] = rng.choice([-1.0, 1.0], size=s)
    signals = dictionary.data @ codes
    return SyntheticInstance(dictionary, codes, signals, s, seed)


def run_named_solver(
    name: str,
    dictionary,
    signals,
    per_patch_budget: float,
    rho: float = DEFAULT_RHO,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    record_trace: bool = False,
    threads: int = 1,
) -> SolveResult:
    """Dispatch a solver by CLI name on an N x P signal matrix.

    Global solvers receive the total budget round(per_patch_budget * P);
    patch-wise solvers receive round(per_patch_budget) nonzeros per column.
    """
    if name not in SOLVER_NAMES:
        raise ValueError(f"unknown solver {name!r}, expected one of {SOLVER_NAMES}")
    arr = np.asarray(getattr(signals, "data", signals), dtype=float)
    if name in GLOBAL_SOLVERS:
        budget = int(round(per_patch_budget * arr.shape[1]))
        config = GhtConfig(
            global_budget=budget,
            rho=rho,
            tolerance=tolerance,
            max_iterations=max_iterations,
            record_trace=record_trace,
        )
        solver = ght_qpm if name == "ght-qpm" else ght_admm
        return solver(dictionary, arr, config)
    return solve_patchwise(
        name, dictionary, arr, int(round(per_patch_budget)),
        max_iters=max_iterations, threads=threads,
    )


@dataclass
class SweepRow:
    """One aggregated report row; mismatch is NaN where not applicable and
    error carries per-cell failure messages."""

    solver: str
    s_or_p: int
    mismatch: float
    rmse: float
    seconds: float
    error: str = ""


@dataclass
class SweepReport:
    kind: str
    rows: list = field(default_factory=list)

    CSV_HEADER = ("solver", "s_or_p", "mismatch", "rmse", "seconds")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for row in self.rows:
                writer.writerow(
                    [row.solver, row.s_or_p, _fmt(row.mismatch), _fmt(row.rmse),
                     _fmt(row.seconds)]
                )

    def write_json(self, path) -> None:
        payload = {
            "kind": self.kind,
            "rows": [
                {
                    "solver": row.solver,
                    "s_or_p": row.s_or_p,
                    "mismatch": None if math.isnan(row.mismatch) else row.mismatch,
                    "rmse": None if math.isnan(row.rmse) else row.rmse,
                    "seconds": row.seconds,
                    "error": row.error or None,
                }
                for row in self.rows
            ],
        }
        with open(path, "w", encoding="ascii") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.10g}"


def run_recovery_sweep(
    s_values,
    trials: int = 5,
    solvers=SOLVER_NAMES,
    n: int = DEFAULT_N_ROWS,
    l: int = DEFAULT_N_ATOMS,
    p: int = DEFAULT_N_SIGNALS,
    base_seed: int = 0,
    rho: float = DEFAULT_RHO,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    threads: int = 1,
) -> SweepReport:
    """Exact-sparse recovery benchmark.

    For every per-column sparsity in s_values and every trial (one fresh
    dictionary per trial, shared across sparsities), each solver recovers the
    signals; support mismatch against the true codes, reconstruction RMSE and
    wall time are averaged over trials into one row per (s, solver).
    """
    report = SweepReport(kind="recovery")
    for s in s_values:
        cells = {name: {"mismatch": [], "rmse": [], "seconds": []} for name in solvers}
        errors = {name: [] for name in solvers}
        for trial in range(trials):
            instance = gen_instance(n, l, p, s, seed=base_seed + trial)
            truth = matrix_support(instance.true_codes)
            for name in solvers:
                try:
                    start = time.perf_counter()
                    result = run_named_solver(
                        name, instance.dictionary, instance.signals, s,
                        rho=rho, tolerance=tolerance,
                        max_iterations=max_iterations, threads=threads,
                    )
                    elapsed = time.perf_counter() - start
                except Exception as exc:
                    errors[name].append(f"s={s} trial={trial}: {exc}")
                    continue
                cells[name]["mismatch"].append(
                    support_mismatch_ratio(truth, matrix_support(result.codes))
                )
                cells[name]["rmse"].append(
                    rmse(instance.dictionary, result.codes, instance.signals)
                )
                cells[name]["seconds"].append(elapsed)
        for name in solvers:
            values = cells[name]
            report.rows.append(
                SweepRow(
                    solver=name,
                    s_or_p=int(s),
                    mismatch=float(np.mean(values["mismatch"])) if values["mismatch"] else math.nan,
                    rmse=float(np.mean(values["rmse"])) if values["rmse"] else math.nan,
                    seconds=float(np.mean(values["seconds"])) if values["seconds"] else math.nan,
                    error="; ".join(errors[name]),
                )
            )
    return report


def _gaussian_patches(n_pixels: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 2])
    return rng.normal(0.0, 1.0, size=(n_pixels, count))


def run_scaling_sweep(
    p_values,
    s: int = 10,
    solvers=GLOBAL_SOLVERS,
    patches=None,
    patch_side: int = 8,
    atoms_per_dim: int = 10,
    repeats: int = 3,
    iterations: int = 10,
    seed: int = 0,
    rho: float = DEFAULT_RHO,
    threads: int = 1,
) -> SweepReport:
    """Wall-time-versus-P benchmark over the 2-D DCT dictionary.

    Every cell runs a fixed number of iterations (stopping tolerance pinned
    tiny) and reports the minimum wall time over `repeats` runs, measured
    with BLAS pools limited to one thread so that timings scale cleanly.
    Patch columns come from `patches` when given (n_pixels x >= max P),
    otherwise standard-normal synthetic patches are drawn.
    """
    p_values = [int(v) for v in p_values]
    if not p_values:
        raise ValueError("p_values must not be empty")
    dictionary = build_overcomplete_dct(patch_side, atoms_per_dim)
    n_pixels = dictionary.n_rows
    if patches is None:
        pool = _gaussian_patches(n_pixels, max(p_values), seed)
    else:
        pool = np.asarray(getattr(patches, "data", patches), dtype=float)
        if pool.shape[0] != n_pixels or pool.shape[1] < max(p_values):
            raise ValueError(
                f"patch pool must be {n_pixels} x >= {max(p_values)}, got {pool.shape}"
            )
    report = SweepReport(kind="scaling")
    limit = threadpool_limits(1) if threadpool_limits is not None else nullcontext()
    with limit:
        for name in solvers:
            for p in p_values:
                signals = pool[:, :p]
                best_time = math.inf
                final_rmse = math.nan
                error = ""
                for _ in range(repeats):
                    try:
                        result = run_named_solver(
                            name, dictionary, signals, s,
                            rho=rho, tolerance=1e-300,
                            max_iterations=iterations, record_trace=False,
                            threads=threads,
                        )
                    except Exception as exc:
                        error = f"P={p}: {exc}"
                        break
                    best_time = min(best_time, result.wall_time)
                    final_rmse = result.final_rmse
                report.rows.append(
                    SweepRow(
                        solver=name,
                        s_or_p=p,
                        mismatch=math.nan,
                        rmse=final_rmse,
                        seconds=best_time if math.isfinite(best_time) else math.nan,
                        error=error,
                    )
                )
    return report


def make_test_image(height: int = 512, width: int = 512, seed: int = 0) -> np.ndarray:
    """Procedural city-scene test image (8-bit values stored as floats).

    Sky gradient with a soft sun, a skyline of flat-faced buildings carrying
    window grids, ledges and antennas, and a ground strip: patch complexity
    then ranges from almost constant (sky, facades) to highly structured
    (window grids), which is the regime the joint budget allocation is built
    for. Deterministic per seed.
    """
    if height < 64 or width < 64:
        raise ValueError("test image needs at least 64x64 pixels")
    rng = np.random.default_rng(seed)
    rows = np.arange(height)[:, None] / height
    cols = np.arange(width)[None, :] / width
    img = 212.0 - 50.0 * rows - 10.0 * cols
    img = img + 30.0 * np.exp(
        -((rows - 0.15) ** 2 + (cols - 0.72) ** 2) / (2 * 0.06**2)
    )
    x = 0
    while x < width:
        b_width = int(rng.integers(36, 80))
        top = int(rng.integers(int(0.34 * height), int(0.55 * height)))
        level = float(rng.uniform(52, 110))
        x_end = min(width, x + b_width)
        img[top:, x:x_end] = level
        window_level = level + float(rng.uniform(70, 110))
        pitch_y = int(rng.integers(9, 13))
        pitch_x = int(rng.integers(8, 12))
        win_h, win_w = max(3, pitch_y // 2), max(3, pitch_x // 2)
        for wy in range(top + 4, height - 24, pitch_y):
            for wx in range(x + 2, x_end - 2 - win_w, pitch_x):
                if rng.random() < 0.85:
                    img[wy:wy + win_h, wx:wx + win_w] = window_level
        if rng.random() < 0.4:
            for ly in range(top + 2, height - 24, 3 * pitch_y):
                img[ly:ly + 2, x:x_end] = level - 25
        if rng.random() < 0.5 and top > 40:
            mast = (x + x_end) // 2
            img[top - int(rng.integers(18, 36)):top, mast:mast + 2] = 40.0
        x = x_end
    img[int(0.95 * height):, :] = 72.0
    return np.clip(np.round(img), 0, 255)
