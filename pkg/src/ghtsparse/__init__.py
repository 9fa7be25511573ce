"""Joint sparse coding of image patches by global hard thresholding.

The package solves  min ||D Z - Y||_F^2  s.t.  ||Z||_0 <= S  over *all*
patch columns of Y at once, so the nonzero budget S is distributed across
patches automatically instead of being fixed per patch. Two solvers are
provided (quadratic-penalty and ADMM variable-splitting iterations, both
driven by a cached Cholesky factor and a top-S magnitude projection),
next to the classic patch-wise baselines (OMP, AIHT, CoSaMP), evaluation
metrics, experiment runners and a CLI.
"""

from .errors import DimensionMismatchError, NumericError
from .dictionaries import (
    Dictionary,
    build_gaussian_dictionary,
    build_overcomplete_dct,
    load_dictionary,
    save_dictionary,
)
from .patches import (
    PatchMatrix,
    atom_count_heatmap,
    image_to_patch_matrix,
    patch_matrix_to_image,
    read_pgm,
    write_pgm,
)
from .kernels import (
    CholeskyFactor,
    cholesky_factor,
    global_hard_threshold,
    gram_plus_ridge,
    select_kth_magnitude,
    solve_spd,
)
from .solvers import GhtConfig, SolveResult, evaluate_penalty_objective, ght_admm, ght_qpm
from .baselines import aiht, cosamp, omp, solve_patchwise
from .metrics import matrix_support, psnr, rmse, support_mismatch_ratio
from .synth import (
    SOLVER_NAMES,
    SweepReport,
    SyntheticInstance,
    gen_instance,
    make_test_image,
    run_named_solver,
    run_recovery_sweep,
    run_scaling_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "CholeskyFactor",
    "Dictionary",
    "DimensionMismatchError",
    "GhtConfig",
    "NumericError",
    "PatchMatrix",
    "SOLVER_NAMES",
    "SolveResult",
    "SweepReport",
    "SyntheticInstance",
    "aiht",
    "atom_count_heatmap",
    "build_gaussian_dictionary",
    "build_overcomplete_dct",
    "cholesky_factor",
    "cosamp",
    "evaluate_penalty_objective",
    "gen_instance",
    "ght_admm",
    "ght_qpm",
    "global_hard_threshold",
    "gram_plus_ridge",
    "image_to_patch_matrix",
    "load_dictionary",
    "make_test_image",
    "matrix_support",
    "omp",
    "patch_matrix_to_image",
    "psnr",
    "read_pgm",
    "rmse",
    "run_named_solver",
    "run_recovery_sweep",
    "run_scaling_sweep",
    "save_dictionary",
    "select_kth_magnitude",
    "solve_patchwise",
    "solve_spd",
    "support_mismatch_ratio",
    "write_pgm",
]
