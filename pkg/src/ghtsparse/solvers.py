"""Global solvers for the joint sparse coding problem

    minimize ||D Z - Y||_F^2   subject to   ||Z||_0 <= S,

by variable splitting (X = Z): a quadratic-penalty iteration (ght_qpm) and an
ADMM-style iteration with a dual matrix (ght_admm). Both alternate a ridge
linear solve for X against a global top-S magnitude projection for Z, with
the Cholesky factor of D.T @ D + rho*I and W = D.T @ Y computed once up
front. Iteration stops when the change in RMSE = ||D Z - Y||_F / sqrt(P)
between consecutive iterations drops below the configured tolerance.

The iteration loops reuse preallocated Fortran-ordered buffers and in-place
kernels; a solve allocates nothing per iteration, which keeps per-iteration
cost linear in P up to millions of patches.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatchError
from .kernels import _threshold_flat, cholesky_factor, gram_plus_ridge

DEFAULT_RHO = 0.1
DEFAULT_TOLERANCE = 1e-5
DEFAULT_MAX_ITERATIONS = 200


@dataclass
class GhtConfig:
    """Solver settings.

    global_budget: total nonzeros allowed across all columns of Z.
    rho: penalty weight coupling X and Z (> 0).
    tolerance: stop once |RMSE_k - RMSE_{k-1}| falls below this (> 0).
    max_iterations: hard iteration cap (>= 1).
    record_trace: also record the per-iteration penalty objective (QPM only);
        costs one extra N x P product per iteration.
    """

    global_budget: int
    rho: float = DEFAULT_RHO
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    record_trace: bool = True

    def __post_init__(self):
        if self.global_budget < 0:
            raise ValueError(f"global_budget must be >= 0, got {self.global_budget}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass
class SolveResult:
    """Outcome of a solver run.

    codes holds the returned coefficient matrix: the final iterate for
    ght_qpm and patch-wise drivers, the lowest-RMSE iterate for ght_admm
    (best_iteration tells which). rmse_trace has one entry per iteration
    executed; objective_trace is filled by ght_qpm when record_trace is set.
    """

    codes: np.ndarray
    iterations: int
    rmse_trace: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    wall_time: float = 0.0
    best_iteration: int = 0
    solver: str = ""

    @property
    def final_rmse(self) -> float:
        return self.rmse_trace[-1]

    @property
    def best_rmse(self) -> float:
        return min(self.rmse_trace)


def _as_signal_matrix(y) -> np.ndarray:
    arr = np.asarray(getattr(y, "data", y), dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"signals must form a 2-D matrix, got {arr.shape}")
    return arr


class _PreparedProblem:
    """Per-problem state computed once: Cholesky factor of D.T D + rho I,
    W = D.T Y, and the iteration buffers."""

    def __init__(self, dictionary, y, config: GhtConfig):
        d = np.asarray(getattr(dictionary, "data", dictionary), dtype=float)
        signals = _as_signal_matrix(y)
        if d.ndim != 2:
            raise DimensionMismatchError(f"dictionary must be 2-D, got {d.shape}")
        if d.shape[0] != signals.shape[0]:
            raise DimensionMismatchError(
                f"dictionary has {d.shape[0]} rows but signals have {signals.shape[0]}"
            )
        n_atoms, n_signals = d.shape[1], signals.shape[1]
        if config.global_budget > n_atoms * n_signals:
            raise ValueError(
                f"global_budget {config.global_budget} exceeds matrix size "
                f"{n_atoms}x{n_signals}"
            )
        self.d = d
        self.y = signals
        self.config = config
        factor = cholesky_factor(gram_plus_ridge(d, config.rho))
        self.lower = np.asfortranarray(factor.lower)
        self.upper = np.asfortranarray(factor.lower.T)
        self.w = np.asfortranarray(d.T @ signals)
        self.sqrt_p = np.sqrt(n_signals)
        shape = (n_atoms, n_signals)
        self.z = np.zeros(shape, order="F")
        self.z_flat = self.z.ravel(order="F")
        self.rhs = np.empty(shape, order="F")
        self.mags = np.empty(n_atoms * n_signals)
        self.scratch = np.empty(n_atoms * n_signals)
        self.resid = np.empty_like(signals)

    def solve_inplace(self):
        """Solve (D.T D + rho I) X = rhs, overwriting the rhs buffer."""
        half = solve_triangular(
            self.lower, self.rhs, lower=True, check_finite=False, overwrite_b=True
        )
        return solve_triangular(
            self.upper, half, lower=False, check_finite=False, overwrite_b=True
        )

    def rmse_of_codes(self) -> float:
        np.dot(self.d, self.z, out=self.resid)
        self.resid -= self.y
        return float(np.linalg.norm(self.resid) / self.sqrt_p)


def evaluate_penalty_objective(dictionary, y, x, z, rho: float) -> float:
    """Penalty objective ||D X - Y||_F^2 + rho * ||X - Z||_F^2."""
    d = np.asarray(getattr(dictionary, "data", dictionary), dtype=float)
    signals = _as_signal_matrix(y)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.shape != (d.shape[1], signals.shape[1]) \
            or d.shape[0] != signals.shape[0]:
        raise DimensionMismatchError(
            f"incompatible shapes: D {d.shape}, Y {signals.shape}, X {x.shape}, Z {z.shape}"
        )
    fit = d @ x - signals
    gap = x - z
    return float(np.sum(fit * fit) + rho * np.sum(gap * gap))


def ght_qpm(dictionary, y, config: GhtConfig) -> SolveResult:
    """Quadratic-penalty solver (provably non-increasing penalty objective).

    Iterates X_k = (D.T D + rho I)^-1 (W + rho Z_{k-1}), Z_k = top-S(X_k),
    starting from Z_0 = 0, and returns the final Z.
    """
    prob = _PreparedProblem(dictionary, y, config)
    cfg = config
    rmse_trace: list = []
    objective_trace: list = []
    prev_rmse = None
    iterations = 0
    start = time.perf_counter()
    for _ in range(cfg.max_iterations):
        np.multiply(prob.z, cfg.rho, out=prob.rhs)
        prob.rhs += prob.w
        x = prob.solve_inplace()
        x_flat = x.ravel(order="F")
        np.abs(x_flat, out=prob.mags)
        if cfg.record_trace:
            # fit term of the objective needs X before Z is refreshed
            np.dot(prob.d, x, out=prob.resid)
            prob.resid -= prob.y
            fit_term = float(np.sum(prob.resid * prob.resid))
        _threshold_flat(x_flat, prob.mags, prob.scratch, cfg.global_budget, prob.z_flat)
        if cfg.record_trace:
            gap = x - prob.z
            objective_trace.append(fit_term + cfg.rho * float(np.sum(gap * gap)))
        iterations += 1
        current = prob.rmse_of_codes()
        rmse_trace.append(current)
        if prev_rmse is not None and abs(current - prev_rmse) < cfg.tolerance:
            break
        prev_rmse = current
    wall = time.perf_counter() - start
    return SolveResult(
        codes=np.ascontiguousarray(prob.z),
        iterations=iterations,
        rmse_trace=rmse_trace,
        objective_trace=objective_trace,
        wall_time=wall,
        best_iteration=iterations,
        solver="ght-qpm",
    )


def ght_admm(dictionary, y, config: GhtConfig) -> SolveResult:
    """ADMM-style solver with dual matrix L (heuristic on this nonconvex set).

    Iterates X_k = (D.T D + rho I)^-1 (W + rho Z_{k-1} - L_{k-1}),
    Z_k = top-S(X_k + L_{k-1} / rho), L_k = L_{k-1} + rho (X_k - Z_k), from
    Z_0 = L_0 = 0. Convergence is not guaranteed, so the run is capped and the
    lowest-RMSE iterate seen is returned (best_iteration records which; the
    trace still shows the full run).
    """
    prob = _PreparedProblem(dictionary, y, config)
    cfg = config
    n_atoms, n_signals = prob.z.shape
    dual = np.zeros((n_atoms, n_signals), order="F")
    shifted = np.empty((n_atoms, n_signals), order="F")
    shifted_flat = shifted.ravel(order="F")
    best_codes = np.zeros_like(prob.z)
    best_rmse = np.inf
    best_iteration = 0
    rmse_trace: list = []
    prev_rmse = None
    iterations = 0
    start = time.perf_counter()
    for _ in range(cfg.max_iterations):
        np.multiply(prob.z, cfg.rho, out=prob.rhs)
        prob.rhs += prob.w
        prob.rhs -= dual
        x = prob.solve_inplace()
        # Z-update argument X + dual/rho
        np.multiply(dual, 1.0 / cfg.rho, out=shifted)
        shifted += x
        np.abs(shifted_flat, out=prob.mags)
        _threshold_flat(
            shifted_flat, prob.mags, prob.scratch, cfg.global_budget, prob.z_flat
        )
        # dual ascent: dual += rho * (X - Z); reuse the shifted buffer
        np.subtract(x, prob.z, out=shifted)
        shifted *= cfg.rho
        dual += shifted
        iterations += 1
        current = prob.rmse_of_codes()
        rmse_trace.append(current)
        if current < best_rmse:
            best_rmse = current
            best_iteration = iterations
            np.copyto(best_codes, prob.z)
        if prev_rmse is not None and abs(current - prev_rmse) < cfg.tolerance:
            break
        prev_rmse = current
    wall = time.perf_counter() - start
    return SolveResult(
        codes=np.ascontiguousarray(best_codes),
        iterations=iterations,
        rmse_trace=rmse_trace,
        objective_trace=[],
        wall_time=wall,
        best_iteration=best_iteration,
        solver="ght-admm",
    )
