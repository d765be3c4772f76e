"""Dense symmetric-matrix kernels used throughout the package.

Everything here operates on square numpy arrays. The conventions are:

* symmetric inputs are trusted up to round-off; routines that require exact
  symmetry symmetrize internally and say so,
* positive definiteness failures raise :class:`NotPositiveDefinite` rather
  than returning NaNs,
* matrices are exchanged on disk as headerless CSV with 17 significant
  digits, which round-trips float64 exactly.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import (
    DataError,
    DimensionMismatch,
    NonPositiveDiagonal,
    NotPositiveDefinite,
)

__all__ = [
    "as_square",
    "check_symmetric",
    "cholesky",
    "eigen_sym",
    "pd_project",
    "rescale_to_correlation",
    "invert_pd",
    "max_abs",
    "frobenius",
    "save_matrix_csv",
    "load_matrix_csv",
]

# Relative asymmetry tolerated by check_symmetric.
SYMMETRY_RTOL = 1e-8


def as_square(a, name="matrix"):
    """Return ``a`` as a float64 2-D square array, raising DimensionMismatch otherwise."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_symmetric(a, rtol=SYMMETRY_RTOL, name="matrix"):
    """Validate approximate symmetry and return the exactly symmetrized copy.

    Asymmetry beyond ``rtol`` (relative to the largest magnitude entry)
    raises DataError; smaller asymmetry is averaged away so downstream
    eigensolvers see an exactly symmetric operand.
    """
    arr = as_square(a, name)
    scale = max(float(np.max(np.abs(arr))), 1.0)
    gap = float(np.max(np.abs(arr - arr.T)))
    if gap > rtol * scale:
        raise DataError(f"{name} is not symmetric: max |A - A^T| = {gap:.3e}")
    return (arr + arr.T) / 2.0


def cholesky(a):
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Raises NotPositiveDefinite when factorization hits a non-positive pivot,
    including the numerically semi-definite case.
    """
    arr = check_symmetric(a)
    try:
        lower = scipy.linalg.cholesky(arr, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    # Guard against pivots that passed LAPACK but are effectively zero.
    d = np.diag(lower)
    if np.any(d * d <= 1e-12 * max(float(np.max(np.diag(arr))), 1.0)):
        raise NotPositiveDefinite("pivot underflow in Cholesky factorization")
    return lower


def eigen_sym(a):
    """Eigenvalues and eigenvectors of a symmetric matrix, descending order.

    Returns ``(w, V)`` with ``w[0] >= w[1] >= ...`` and columns of ``V`` the
    matching orthonormal eigenvectors, so ``a == V @ diag(w) @ V.T``.
    """
    arr = check_symmetric(a)
    w, v = np.linalg.eigh(arr)
    return w[::-1].copy(), v[:, ::-1].copy()


def pd_project(a, eps=1e-3):
    """Project a symmetric matrix onto {lambda_min >= eps} by eigenvalue clipping.

    If the input already satisfies the floor it is returned unchanged (same
    object), making the projection exactly idempotent. ``eps`` must be > 0.
    """
    if not eps > 0:
        raise DataError(f"eps must be positive, got {eps}")
    arr = check_symmetric(a)
    w, v = np.linalg.eigh(arr)
    if w[0] >= eps:
        return a if isinstance(a, np.ndarray) and a.dtype == float else arr
    w_clipped = np.maximum(w, eps)
    out = (v * w_clipped) @ v.T
    return (out + out.T) / 2.0


def rescale_to_correlation(a):
    """Rescale a symmetric matrix to unit diagonal: A_ij / sqrt(A_ii A_jj).

    The diagonal of the result is set to exactly 1.0. A non-positive diagonal
    entry raises NonPositiveDiagonal.
    """
    arr = check_symmetric(a)
    d = np.diag(arr).copy()
    if np.any(d <= 0):
        bad = int(np.argmin(d))
        raise NonPositiveDiagonal(
            f"diagonal entry {bad} is {d[bad]:.3e}; cannot rescale"
        )
    s = np.sqrt(d)
    out = arr / np.outer(s, s)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def invert_pd(a):
    """Inverse of a symmetric positive definite matrix via its Cholesky factor.

    The result is explicitly symmetrized. Raises NotPositiveDefinite if the
    factorization fails.
    """
    lower = cholesky(a)
    n = lower.shape[0]
    inv = scipy.linalg.cho_solve((lower, True), np.eye(n), check_finite=False)
    return (inv + inv.T) / 2.0


def max_abs(a):
    """Entrywise max-norm ``max_ij |A_ij|``."""
    return float(np.max(np.abs(a)))


def frobenius(a):
    """Frobenius norm of a matrix."""
    return float(np.linalg.norm(a, "fro"))


def save_matrix_csv(path, a):
    """Write a matrix as headerless CSV with 17 significant digits."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got shape {arr.shape}")
    np.savetxt(path, arr, fmt="%.17g", delimiter=",")


def load_matrix_csv(path, square=True):
    """Read a headerless numeric CSV written by :func:`save_matrix_csv`.

    With ``square=True`` (default) a non-square result raises
    DimensionMismatch. Malformed numeric content raises DataError.
    """
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: malformed matrix CSV ({exc})") from None
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(
            f"{path}: expected a square matrix, got shape {arr.shape}"
        )
    return arr
