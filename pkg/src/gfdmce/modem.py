"""GFDM block modem: prototype filters, transmitter matrix, CP and ZF demodulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .numerics import (
    InvalidDimensionError,
    InvalidParameterError,
    LinearSolver,
    as_complex,
    dft,
)


class FilterKind(str, Enum):
    DIRICHLET = "dirichlet"
    RAISED_COSINE = "rc"


@dataclass(frozen=True)
class FilterSpec:
    """Prototype filter choice; ``rolloff`` is set only for raised cosine."""

    kind: FilterKind = FilterKind.DIRICHLET
    rolloff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if self.kind is FilterKind.RAISED_COSINE:
            if self.rolloff is None:
                raise InvalidParameterError("raised-cosine filter needs a roll-off factor")
            if not 0.0 <= self.rolloff <= 1.0:
                raise InvalidParameterError(f"roll-off must lie in [0, 1], got {self.rolloff}")
        elif self.rolloff is not None:
            raise InvalidParameterError("roll-off is only meaningful for raised cosine")

    @property
    def label(self) -> str:
        if self.kind is FilterKind.RAISED_COSINE:
            return f"rc{self.rolloff:g}"
        return self.kind.value


@dataclass(frozen=True)
class GfdmConfig:
    """Block geometry: K subcarriers x M subsymbols, CP of L samples.

    Active subcarrier/subsymbol sets default to "all in use".
    """

    K: int
    M: int
    L: int = 0
    filter: FilterSpec = field(default_factory=FilterSpec)
    active_subcarriers: tuple[int, ...] | None = None
    active_subsymbols: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.K < 1 or self.M < 1:
            raise InvalidParameterError(f"K and M must be >= 1, got K={self.K}, M={self.M}")
        if self.L < 0:
            raise InvalidParameterError(f"CP length must be >= 0, got {self.L}")
        for name, size in (("active_subcarriers", self.K), ("active_subsymbols", self.M)):
            value = getattr(self, name)
            if value is None:
                object.__setattr__(self, name, tuple(range(size)))
                continue
            value = tuple(sorted(set(int(v) for v in value)))
            if not value or value[0] < 0 or value[-1] >= size:
                raise InvalidParameterError(f"{name} must be a nonempty subset of 0..{size - 1}")
            object.__setattr__(self, name, value)

    @property
    def D(self) -> int:
        return self.K * self.M


def _mask_frequencies(K: int, M: int) -> np.ndarray:
    """Signed DFT bin indices, measured from the mask centre in units of M bins.

    For even M the centre sits half a bin below DC, so the M-bin Dirichlet
    band is ``[-M/2, M/2)``.
    """
    D = K * M
    bins = np.fft.fftfreq(D, d=1.0 / D)
    centre = -0.5 if M % 2 == 0 else 0.0
    return (bins - centre) / M


def prototype_filter(spec: FilterSpec, K: int, M: int) -> np.ndarray:
    """Unit-energy prototype filter of length ``K*M``, built in the frequency domain.

    Dirichlet: flat over the M bins around DC. Raised cosine: flat for
    ``|nu| <= (1-a)/2`` and a cosine taper out to ``(1+a)/2`` (nu in
    subcarrier spacings), i.e. about ``M*(1+a)`` nonzero bins.
    """
    if K * M < 1:
        raise InvalidDimensionError(f"K*M must be >= 1, got K={K}, M={M}")
    nu = np.abs(_mask_frequencies(K, M))
    if spec.kind is FilterKind.DIRICHLET:
        # the half-bin centre offset never lands a bin on |nu| == 0.5
        mask = (nu < 0.5).astype(float)
    else:
        a = spec.rolloff
        if not 0.0 <= a <= 1.0:
            raise InvalidParameterError(f"roll-off must lie in [0, 1], got {a}")
        lo, hi = (1 - a) / 2, (1 + a) / 2
        mask = np.zeros_like(nu)
        mask[nu <= lo] = 1.0
        if a > 0:
            taper = (nu > lo) & (nu <= hi)
            mask[taper] = 0.5 * (1 + np.cos(np.pi / a * (nu[taper] - lo)))
    g = np.fft.ifft(mask)
    return g / np.linalg.norm(g)


@dataclass(frozen=True, eq=False)
class TransmitterMatrix:
    """The D x D GFDM transmitter matrix and the prototype filter it came from.

    ``freq`` is ``W_D @ A``, the frequency-domain view used by the pilot
    design and the estimator. It can be supplied explicitly when it is known
    in closed form (OFDM, where it is the identity).
    """

    A: np.ndarray
    g: np.ndarray
    K: int
    M: int
    _freq: np.ndarray | None = field(default=None, repr=False)

    @property
    def D(self) -> int:
        return self.K * self.M

    @cached_property
    def freq(self) -> np.ndarray:
        if self._freq is not None:
            return self._freq
        return dft(self.A, axis=0)

    @cached_property
    def solver(self) -> LinearSolver:
        return LinearSolver(self.A)

    def unitarity_error(self) -> float:
        """Frobenius norm of ``A^H A - I``."""
        return float(np.linalg.norm(self.A.conj().T @ self.A - np.eye(self.D)))


def transmitter_matrix(g, K: int, M: int) -> TransmitterMatrix:
    """Stack the shifted/modulated pulses ``g_{k,m}`` as columns ``k + m*K``."""
    g = as_complex(g, ndim=1, name="prototype filter")
    D = K * M
    if g.size != D:
        raise InvalidDimensionError(f"prototype filter length {g.size} != K*M = {D}")
    n = np.arange(D)
    m = np.arange(M)
    k = np.arange(K)
    shifted = g[(n[:, None] - m[None, :] * K) % D]            # (D, M)
    carrier = np.exp(2j * np.pi * ((n[:, None] * k[None, :]) % K) / K)  # (D, K)
    A = (shifted[:, :, None] * carrier[:, None, :]).reshape(D, D)
    return TransmitterMatrix(A=A, g=g, K=K, M=M)


def gfdm_transmitter(config: GfdmConfig) -> TransmitterMatrix:
    return transmitter_matrix(prototype_filter(config.filter, config.K, config.M), config.K, config.M)


def ofdm_transmitter(D: int) -> TransmitterMatrix:
    """D-subcarrier OFDM as a one-subsymbol GFDM block: ``A = W_D^H``."""
    g = np.full(D, 1 / np.sqrt(D), dtype=np.complex128)
    tm = transmitter_matrix(g, D, 1)
    return TransmitterMatrix(A=tm.A, g=g, K=D, M=1, _freq=np.eye(D, dtype=np.complex128))


def modulate(tm: TransmitterMatrix, d) -> np.ndarray:
    """Transmit samples ``x = A d``; ``d`` may hold one block per column."""
    d = np.asarray(d, dtype=np.complex128)
    if d.shape[0] != tm.D:
        raise InvalidDimensionError(f"block length {d.shape[0]} != D = {tm.D}")
    return tm.A @ d


def add_cp(x, L: int) -> np.ndarray:
    x = np.asarray(x)
    if not 0 <= L <= x.shape[0]:
        raise InvalidDimensionError(f"CP length {L} exceeds block length {x.shape[0]}")
    return np.concatenate([x[x.shape[0] - L:], x], axis=0)


def remove_cp(s, L: int) -> np.ndarray:
    s = np.asarray(s)
    if not 0 <= L <= s.shape[0]:
        raise InvalidDimensionError(f"CP length {L} exceeds signal length {s.shape[0]}")
    return s[L:]


def demodulate_zf(tm: TransmitterMatrix, x_hat) -> np.ndarray:
    """Zero-forcing demodulation ``d_hat = A^{-1} x_hat`` through the cached LU factors."""
    return tm.solver.solve(x_hat)
