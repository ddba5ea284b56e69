"""Complex linear-algebra and Fourier primitives.

Every matrix and vector in the package is a plain complex ``numpy`` array.
The helpers here cover the three structured matrices the link model is
built from (normalized DFT, partial Fourier, circulant) and a factorized
linear solver that refuses numerically singular systems instead of
returning garbage.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

# Systems whose 1-norm condition estimate exceeds this are treated as singular.
COND_LIMIT = 1e12


class InvalidDimensionError(ValueError):
    """Raised when array shapes or sizes are inconsistent."""


class InvalidParameterError(ValueError):
    """Raised when a scalar parameter is out of its admissible range."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a linear system is singular or too ill-conditioned.

    The condition estimate that triggered the error is kept in
    ``condition`` (``inf`` when the factorization itself broke down).
    """

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(f"{message} (condition estimate {condition:.3g})")
        self.condition = condition


def as_complex(x, ndim: int | None = None, name: str = "array") -> np.ndarray:
    """Return ``x`` as a finite complex128 array, optionally checking ndim."""
    arr = np.asarray(x, dtype=np.complex128)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidDimensionError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def dft_matrix(q: int) -> np.ndarray:
    """Normalized ``q``-point DFT matrix with entries ``exp(-2j*pi*m*n/q)/sqrt(q)``."""
    if q < 1:
        raise InvalidDimensionError(f"DFT size must be >= 1, got {q}")
    idx = np.arange(q)
    # reduce m*n mod q before the exponential to keep phases accurate for large q
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % q) / q) / np.sqrt(q)


def partial_fourier(D: int, N: int) -> np.ndarray:
    """First ``N`` columns of the unnormalized ``D``-point DFT matrix (``D x N``)."""
    if D < 1 or not 1 <= N <= D:
        raise InvalidDimensionError(f"partial Fourier needs 1 <= N <= D, got N={N}, D={D}")
    m = np.arange(D)[:, None]
    n = np.arange(N)[None, :]
    return np.exp(-2j * np.pi * ((m * n) % D) / D)


def circulant(first_column, D: int) -> np.ndarray:
    """D x D circulant matrix whose first column is ``first_column`` zero-padded to D."""
    col = as_complex(first_column, ndim=1, name="first_column")
    if col.size > D:
        raise InvalidDimensionError(
            f"first column has length {col.size}, longer than D={D}"
        )
    padded = np.zeros(D, dtype=np.complex128)
    padded[: col.size] = col
    return sla.circulant(padded)


def dft(x, axis: int = 0) -> np.ndarray:
    """Apply the normalized DFT matrix along ``axis`` (FFT-backed ``W_D @ x``)."""
    return np.fft.fft(x, axis=axis, norm="ortho")


def idft(x, axis: int = 0) -> np.ndarray:
    """Apply the inverse normalized DFT along ``axis`` (``W_D^H @ x``)."""
    return np.fft.ifft(x, axis=axis, norm="ortho")


class LinearSolver:
    """Pivoted factorization of a square matrix, reusable for many right-hand sides.

    With ``hermitian=True`` a Cholesky factorization is used, which requires
    the matrix to be Hermitian positive definite.
    """

    def __init__(self, a, hermitian: bool = False):
        a = as_complex(a, ndim=2, name="matrix")
        if a.shape[0] != a.shape[1]:
            raise InvalidDimensionError(f"matrix must be square, got shape {a.shape}")
        self.n = a.shape[0]
        self.hermitian = hermitian
        anorm = float(np.abs(a).sum(axis=0).max()) if a.size else 0.0

        if hermitian:
            try:
                self._factor = sla.cho_factor(a, lower=False, check_finite=False)
            except np.linalg.LinAlgError:
                raise SingularMatrixError("matrix is not positive definite") from None
            rcond, _ = lapack.zpocon(self._factor[0], anorm, uplo="U")
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(a, check_finite=False)
            self._factor = (lu, piv)
            if np.any(np.diag(lu) == 0):
                raise SingularMatrixError("matrix is exactly singular")
            rcond, _ = lapack.zgecon(lu, anorm, norm="1")

        self.condition = float("inf") if rcond == 0 else 1.0 / rcond
        if not self.condition <= COND_LIMIT:
            raise SingularMatrixError("matrix is numerically singular", self.condition)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.complex128)
        if b.shape[0] != self.n:
            raise InvalidDimensionError(
                f"right-hand side has {b.shape[0]} rows, expected {self.n}"
            )
        if self.hermitian:
            return sla.cho_solve(self._factor, b, check_finite=False)
        return sla.lu_solve(self._factor, b, check_finite=False)


def solve(a, b, hermitian: bool = False) -> np.ndarray:
    """Solve ``a @ x = b`` via a pivoted factorization (never an explicit inverse)."""
    return LinearSolver(a, hermitian=hermitian).solve(b)


def condition_estimate(a) -> float:
    """1-norm condition estimate of a square matrix (``inf`` if exactly singular)."""
    try:
        return LinearSolver(a).condition
    except SingularMatrixError as err:
        return err.condition
