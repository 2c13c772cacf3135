"""Small dense complex linear algebra used throughout the package.

Matrices and vectors are plain :class:`numpy.ndarray` objects with complex
dtype. Every routine here is a pure function.
"""

import numpy as np

__all__ = [
    "RankDeficientError",
    "IllConditionedError",
    "DEFAULT_RANK_TOL",
    "DEFAULT_COND_CAP",
    "kron",
    "vec",
    "unvec",
    "numerical_rank",
    "solve_square",
    "min_norm_solve",
    "right_pinv_apply",
]

DEFAULT_RANK_TOL = 1e-10
DEFAULT_COND_CAP = 1e12


class RankDeficientError(np.linalg.LinAlgError):
    """A matrix that must have full row rank does not."""


class IllConditionedError(np.linalg.LinAlgError):
    """A square system is singular or too badly conditioned to trust."""


def _as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a[:, np.newaxis]
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got an array with shape {a.shape}")
    return a


def kron(a, b):
    """Kronecker product of two matrices.

    Block ``(i, j)`` of the result is ``a[i, j] * b``.
    """
    return np.kron(_as_matrix(a), _as_matrix(b))


def vec(a):
    """Stack the columns of `a` into one vector."""
    a = _as_matrix(a)
    return a.reshape(-1, order="F")


def unvec(x, rows, cols):
    """Inverse of :func:`vec`."""
    x = np.asarray(x, dtype=complex)
    if x.size != rows * cols:
        raise ValueError(f"cannot reshape {x.size} entries into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def numerical_rank(a, tol=DEFAULT_RANK_TOL):
    """Number of singular values above ``tol`` times the largest one.

    Parameters
    ----------
    a : array_like
        Complex matrix (a 1-D input is treated as a column).
    tol : float
        Relative threshold, must be non-negative.

    Returns
    -------
    int
        The numerical rank; 0 for an empty or all-zero matrix.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = _as_matrix(a)
    if a.size == 0:
        return 0
    if not np.all(np.isfinite(a)):
        raise np.linalg.LinAlgError("matrix has non-finite entries")
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def solve_square(a, b, cond_cap=DEFAULT_COND_CAP):
    """Solve the square system ``a @ x = b``.

    Raises
    ------
    IllConditionedError
        If the 2-norm condition number of `a` exceeds `cond_cap`.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError("right-hand side length does not match the matrix")
    if a.shape[0] == 0:
        return np.zeros(b.shape, dtype=complex)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds cap {cond_cap:.3g}")
    return np.linalg.solve(a, b)


def _check_full_row_rank(a, tol):
    rows, cols = a.shape
    if rows > cols:
        raise RankDeficientError(f"{rows}x{cols} matrix cannot have full row rank")
    rank = numerical_rank(a, tol)
    if rank < rows:
        raise RankDeficientError(f"row rank {rank} < {rows}")


def min_norm_solve(a, b, tol=DEFAULT_RANK_TOL):
    """Minimum-norm solution of the consistent system ``a @ x = b``.

    Computes ``a^H (a a^H)^{-1} b`` for a wide (or square) matrix with full
    row rank. The Gram inverse is applied through a QR factorisation of
    ``a^H`` so the conditioning is not squared.

    Raises
    ------
    RankDeficientError
        If `a` does not have full row rank at relative tolerance `tol`.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=complex)
    rows, cols = a.shape
    if b.shape[0] != rows:
        raise ValueError("right-hand side length does not match the matrix")
    if rows == 0:
        return np.zeros((cols,) + b.shape[1:], dtype=complex)
    _check_full_row_rank(a, tol)
    # a^H = Q R  =>  a^H (a a^H)^{-1} = Q R^{-H}
    q, r = np.linalg.qr(a.conj().T)
    return q @ np.linalg.solve(r.conj().T, b)


def right_pinv_apply(a, y, tol=DEFAULT_RANK_TOL):
    """Apply the right pseudo-inverse ``a^H (a a^H)^{-1}`` to `y`.

    The Gram matrix is formed explicitly, as in the textbook zero-forcing
    formula.

    Raises
    ------
    RankDeficientError
        If `a` does not have full row rank at relative tolerance `tol`.
    """
    a = _as_matrix(a)
    y = np.asarray(y, dtype=complex)
    rows, cols = a.shape
    if y.shape[0] != rows:
        raise ValueError("vector length does not match the matrix")
    if rows == 0:
        return np.zeros((cols,) + y.shape[1:], dtype=complex)
    _check_full_row_rank(a, tol)
    ah = a.conj().T
    return ah @ np.linalg.solve(a @ ah, y)
