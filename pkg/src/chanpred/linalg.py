"""Shared numerics: special functions and complex dense linear algebra.

All matrices are dense ``complex128`` numpy arrays. Everything here is a
pure function; nothing mutates its inputs.
"""

from __future__ import annotations

import numpy as np
from scipy import special
from scipy.linalg import lapack

from .errors import SingularMatrixError

# Relative tolerance for accepting a matrix as Hermitian.
HERMITIAN_RTOL = 1e-12


def bessel_j0(x):
    """Zeroth-order Bessel function of the first kind.

    Accepts a scalar or array; rejects non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j0 requires finite input")
    out = special.j0(arr)
    if np.ndim(x) == 0:
        return float(out)
    return out


def dft_matrix(num_rows: int, num_cols: int, normalized: bool = True) -> np.ndarray:
    """DFT matrix with entry (k, m) = exp(-2j*pi*k*m/K), optionally / sqrt(K).

    ``num_rows`` must be ``num_cols`` (square, unitary when normalized) or
    ``2 * num_cols`` (the first M columns of the 2M-point DFT).
    """
    if num_rows not in (num_cols, 2 * num_cols):
        raise ValueError(
            f"dft_matrix supports K in {{M, 2M}}; got K={num_rows}, M={num_cols}"
        )
    k = np.arange(num_rows)[:, None]
    m = np.arange(num_cols)[None, :]
    q = np.exp(-2j * np.pi * k * m / num_rows)
    if normalized:
        q /= np.sqrt(num_rows)
    return q


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    """True when max|A - A^H| <= rtol * max|A| (always true for the zero matrix)."""
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return True
    return np.max(np.abs(a - a.conj().T)) <= rtol * scale


def hermitian_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A X = B for Hermitian positive-definite A via Cholesky.

    Raises :class:`SingularMatrixError` (with the failing pivot index) when
    A is not positive definite to working precision.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a):
        raise ValueError("matrix is not Hermitian within tolerance")
    b = np.asarray(b, dtype=np.complex128)
    b2d = b[:, None] if b.ndim == 1 else b
    if b2d.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: A is {a.shape}, B has {b2d.shape[0]} rows")

    c, info = lapack.zpotrf(a, lower=1)
    if info != 0:
        raise SingularMatrixError(
            f"Cholesky failed: leading minor {info} is not positive definite",
            pivot=int(info),
        )
    x, info = lapack.zpotrs(c, b2d, lower=1)
    if info != 0:  # pragma: no cover - zpotrs only fails on bad arguments
        raise SingularMatrixError(f"triangular solve failed (info={info})")
    return x[:, 0] if b.ndim == 1 else x


def logdet(a: np.ndarray) -> complex:
    """Complex log-determinant of a square matrix (LU based).

    Returns log|det| + 1j*arg(det); callers take the real part for
    Hermitian positive-definite input. Raises :class:`SingularMatrixError`
    when the matrix is singular to working precision.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0 or not np.isfinite(logabs):
        raise SingularMatrixError("matrix is singular to working precision")
    return complex(logabs + 1j * np.angle(sign))


def softmax(scores: np.ndarray, axis: int = 0) -> np.ndarray:
    """Exp-normalization with max-subtraction for overflow safety."""
    shifted = scores - np.max(scores, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)
