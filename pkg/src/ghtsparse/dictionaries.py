"""Dictionary constructors: 2-D (over)complete DCT frames and random Gaussian
dictionaries. Every constructor returns atoms (columns) normalized to unit
Euclidean norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

_UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Dictionary:
    """An n_rows x n_atoms real matrix whose columns have unit norm."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"dictionary must be a 2-D matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("dictionary entries must be finite")
        norms = np.linalg.norm(data, axis=0)
        if np.max(np.abs(norms - 1.0)) > _UNIT_NORM_TOL:
            raise ValueError("dictionary columns must have unit norm")
        object.__setattr__(self, "data", data)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.data.shape[1]


def _dct_frame(n: int, m: int) -> np.ndarray:
    """1-D cosine frame with n samples and m atoms.

    Atom j samples cos(pi*(i+1/2)*j/m); non-constant atoms are mean-subtracted
    and every atom is scaled to unit norm. For m == n this is exactly the
    orthonormal DCT-II basis (the mean subtraction is then a no-op).
    """
    i = np.arange(n)[:, None]
    j = np.arange(m)[None, :]
    frame = np.cos(np.pi * (i + 0.5) * j / m)
    frame[:, 1:] -= frame[:, 1:].mean(axis=0)
    frame /= np.linalg.norm(frame, axis=0)
    return frame


def build_overcomplete_dct(patch_side: int, atoms_per_dim: int) -> Dictionary:
    """2-D DCT dictionary for patch_side**2-pixel patches with atoms_per_dim**2 atoms.

    The 2-D dictionary is the Kronecker product of a 1-D patch_side x
    atoms_per_dim cosine frame with itself; columns are normalized. With
    atoms_per_dim == patch_side the result is the orthonormal 2-D DCT;
    larger values give an overcomplete frame (e.g. 8, 10 -> 64 x 100).
    """
    if patch_side < 1:
        raise ValueError(f"patch_side must be >= 1, got {patch_side}")
    if atoms_per_dim < patch_side:
        raise ValueError(
            f"atoms_per_dim ({atoms_per_dim}) must be >= patch_side ({patch_side})"
        )
    frame = _dct_frame(patch_side, atoms_per_dim)
    data = np.kron(frame, frame)
    data /= np.linalg.norm(data, axis=0)
    return Dictionary(data)


def build_gaussian_dictionary(
    n_rows: int, n_atoms: int, std_dev: float, seed
) -> Dictionary:
    """Random dictionary with i.i.d. zero-mean Gaussian entries of the given
    standard deviation, columns normalized to unit norm afterwards.
    Deterministic for a fixed seed.
    """
    if n_rows < 1 or n_atoms < 1:
        raise ValueError("n_rows and n_atoms must be >= 1")
    if std_dev <= 0:
        raise ValueError(f"std_dev must be positive, got {std_dev}")
    rng = np.random.default_rng(seed)
    data = rng.normal(0.0, std_dev, size=(n_rows, n_atoms))
    data /= np.linalg.norm(data, axis=0)
    return Dictionary(data)


def save_dictionary(dictionary: Dictionary, path) -> None:
    """Write a dictionary as CSV: a "n_rows,n_atoms" header line followed by
    the matrix rows. Values use repr-exact formatting so a round trip is
    bit-identical.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{dictionary.n_rows},{dictionary.n_atoms}\n")
        np.savetxt(fh, dictionary.data, delimiter=",", fmt="%.17g")


def load_dictionary(path) -> Dictionary:
    """Read a dictionary written by save_dictionary."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        try:
            n_rows, n_atoms = (int(tok) for tok in header.split(","))
        except ValueError as exc:
            raise ValueError(f"bad dictionary header {header!r}") from exc
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (n_rows, n_atoms):
        raise DimensionMismatchError(
            f"dictionary file advertises {n_rows}x{n_atoms} but holds {data.shape}"
        )
    return Dictionary(data)
