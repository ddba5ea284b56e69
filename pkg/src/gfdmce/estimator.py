"""Pilot-aided LMMSE channel estimation for the S/T pilot framework.

In the frequency domain the received block reads

    W_D y = X_r F_N h + Psi + W_D w,    Psi = diag(W_D A T d_d) F_N h,

where ``X_r = diag(W_D A S d_r)`` is the known pilot spectrum and Psi is the
data interference. The estimator is linear in y and depends only on
second-order statistics, so one gain matrix serves every channel draw and
data block at a given noise level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PowerDelayProfile
from .modem import TransmitterMatrix
from .numerics import (
    InvalidDimensionError,
    LinearSolver,
    SingularMatrixError,
    dft,
    dft_matrix,
    partial_fourier,
)
from .pilots import PilotScheme


@dataclass(frozen=True, eq=False)
class LmmseEstimator:
    """Gain ``G`` (N x D, acts on time-domain y) plus the statistics it was built from."""

    G: np.ndarray
    x_r: np.ndarray
    sigma_hh: np.ndarray
    sigma_psi: np.ndarray
    n0: float
    es: float = 1.0

    @property
    def X_r(self) -> np.ndarray:
        return np.diag(self.x_r)

    def estimate(self, y) -> np.ndarray:
        return estimate(self.G, y)

    def gradient(self) -> np.ndarray:
        return wirtinger_gradient(self.G, self.x_r, self.sigma_hh, self.sigma_psi, self.n0)

    def expected_error(self) -> float:
        return expected_square_error(self.G, self.x_r, self.sigma_hh, self.sigma_psi, self.n0)


def pilot_spectrum(scheme: PilotScheme, tm: TransmitterMatrix) -> np.ndarray:
    """Diagonal of X_r, i.e. ``W_D A S d_r``."""
    return tm.freq @ (scheme.S @ scheme.d_r)


def interference_covariance(sigma_hh, tm: TransmitterMatrix, T, es: float = 1.0) -> np.ndarray:
    """Covariance of ``diag(W_D A T d_d) F_N h`` for i.i.d. data of energy ``es``.

    Data and channel are independent, so the covariance factors entrywise:
    ``es * (F_N sigma_hh F_N^H) * (W_D A T T^H A^H W_D^H)`` (Hadamard product).
    """
    sigma_hh = np.asarray(sigma_hh, dtype=np.complex128)
    F = partial_fourier(tm.D, sigma_hh.shape[0])
    channel_cov = F @ sigma_hh @ F.conj().T
    U = tm.freq @ T
    data_cov = U @ U.conj().T
    return es * channel_cov * data_cov


def _bracket(x_r, sigma_hh, sigma_psi, n0):
    """``(X_r F_N) sigma_hh (X_r F_N)^H + sigma_psi + n0 I`` and ``X_r F_N``."""
    D = x_r.size
    XF = x_r[:, None] * partial_fourier(D, sigma_hh.shape[0])
    B = XF @ sigma_hh @ XF.conj().T + sigma_psi + n0 * np.eye(D)
    # symmetrize away rounding so the Cholesky sees an exactly Hermitian matrix
    return 0.5 * (B + B.conj().T), XF


def lmmse_gain(x_r, sigma_hh, sigma_psi, n0: float) -> np.ndarray:
    """LMMSE gain ``sigma_hh (X_r F)^H B^{-1} W_D`` with the inverse done as a Hermitian solve."""
    x_r = np.asarray(x_r, dtype=np.complex128)
    sigma_hh = np.asarray(sigma_hh, dtype=np.complex128)
    B, XF = _bracket(x_r, sigma_hh, sigma_psi, n0)
    try:
        Z = LinearSolver(B, hermitian=True).solve(XF @ sigma_hh)
    except SingularMatrixError:
        if n0 > 0:
            raise
        raise SingularMatrixError("noiseless LMMSE bracket is singular") from None
    # G = Z^H W_D and W_D is symmetric, so G^T = W_D conj(Z)
    return dft(Z.conj(), axis=0).T


def build_estimator(scheme: PilotScheme, tm: TransmitterMatrix, pdp: PowerDelayProfile,
                    n0: float, es: float = 1.0, sigma_psi: np.ndarray | None = None
                    ) -> LmmseEstimator:
    """Assemble the estimator for one scheme and noise level.

    ``sigma_psi`` can be passed in to reuse it across noise levels; it does
    not depend on n0.
    """
    sigma_hh = pdp.covariance
    x_r = pilot_spectrum(scheme, tm)
    if sigma_psi is None:
        sigma_psi = interference_covariance(sigma_hh, tm, scheme.T, es)
    G = lmmse_gain(x_r, sigma_hh, sigma_psi, n0)
    return LmmseEstimator(G=G, x_r=x_r, sigma_hh=sigma_hh, sigma_psi=sigma_psi, n0=n0, es=es)


def estimate(G, y) -> np.ndarray:
    """Channel estimate ``h_hat = G y`` (column-wise for batches)."""
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != G.shape[1]:
        raise InvalidDimensionError(f"received block length {y.shape[0]} != {G.shape[1]}")
    return G @ y


def wirtinger_gradient(G, x_r, sigma_hh, sigma_psi, n0: float) -> np.ndarray:
    """Derivative of ``E||h - G y||^2`` with respect to conj(G), evaluated at G.

    Uses the dense DFT matrix on purpose; this is the check, not the fast path.
    """
    D = x_r.size
    W = dft_matrix(D)
    XF = x_r[:, None] * partial_fourier(D, sigma_hh.shape[0])
    Ry = W.conj().T @ (XF @ sigma_hh @ XF.conj().T + sigma_psi) @ W + n0 * np.eye(D)
    return -sigma_hh @ XF.conj().T @ W + G @ Ry


def expected_square_error(G, x_r, sigma_hh, sigma_psi, n0: float) -> float:
    """Analytic ``E||h - G y||^2`` for an arbitrary linear estimator G."""
    D = x_r.size
    W = dft_matrix(D)
    XF = x_r[:, None] * partial_fourier(D, sigma_hh.shape[0])
    cross = W.conj().T @ XF  # E{y h^H} = cross @ sigma_hh
    Ry = W.conj().T @ (XF @ sigma_hh @ XF.conj().T + sigma_psi) @ W + n0 * np.eye(D)
    value = (
        np.trace(sigma_hh)
        - np.trace(sigma_hh @ cross.conj().T @ G.conj().T)
        - np.trace(G @ cross @ sigma_hh)
        + np.trace(G @ Ry @ G.conj().T)
    )
    return float(value.real)


def ls_estimate(y, scheme: PilotScheme, n_taps: int) -> np.ndarray:
    """Least-squares fit of ``diag(d_r) [F_N]_bins h = [W_D y]_bins``.

    Only meaningful when the pilot bins are free of data interference, as
    with the precancelling and OFDM schemes.
    """
    y = np.asarray(y, dtype=np.complex128)
    bins = scheme.bins.bins
    if bins.size < n_taps:
        raise InvalidDimensionError(f"{bins.size} bins cannot resolve {n_taps} taps")
    F = partial_fourier(scheme.D, n_taps)[bins]
    system = scheme.d_r[:, None] * F
    rhs = dft(y, axis=0)[bins]
    sol, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=None)
    if rank < n_taps:
        raise SingularMatrixError("LS pilot system is rank deficient")
    return sol


def channel_mse(h, h_hat) -> float:
    """Squared estimation error ``||h - h_hat||^2`` for one channel/estimate pair."""
    h = np.asarray(h)
    h_hat = np.asarray(h_hat)
    if h.shape != h_hat.shape:
        raise InvalidDimensionError(f"shape mismatch {h.shape} vs {h_hat.shape}")
    return float(np.sum(np.abs(h - h_hat) ** 2))
