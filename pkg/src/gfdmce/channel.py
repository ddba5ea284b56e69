"""Multipath Rayleigh channel with exponential power delay profile plus AWGN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import InvalidDimensionError, InvalidParameterError, as_complex


@dataclass(frozen=True)
class PowerDelayProfile:
    """Per-tap average powers (linear scale, unit total power)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p <= 0):
            raise InvalidParameterError("PDP must be a nonempty vector of positive powers")
        object.__setattr__(self, "p", p)

    @property
    def N(self) -> int:
        return self.p.size

    @property
    def covariance(self) -> np.ndarray:
        """Channel covariance ``E{h h^H} = diag(p)``."""
        return np.diag(self.p).astype(np.complex128)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    pdp: PowerDelayProfile | None = None

    @property
    def N(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN of variance ``n0`` per sample."""

    n0: float
    snr_db: float | None = None

    def __post_init__(self):
        if not self.n0 >= 0:
            raise InvalidParameterError(f"noise variance must be >= 0, got {self.n0}")

    @classmethod
    def from_snr_db(cls, snr_db: float, es: float = 1.0) -> "NoiseSpec":
        return cls(n0=es * 10 ** (-snr_db / 10), snr_db=snr_db)


def exponential_pdp(N: int) -> PowerDelayProfile:
    """N taps decaying log-linearly from 0 dB to -10 dB, normalized to unit sum."""
    if N < 1:
        raise InvalidParameterError(f"tap count must be >= 1, got {N}")
    if N == 1:
        return PowerDelayProfile(np.ones(1))
    p = 10 ** (-np.arange(N) / (N - 1))
    return PowerDelayProfile(p / p.sum())


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def draw_channel(pdp: PowerDelayProfile, rng: np.random.Generator) -> ChannelRealization:
    """Rayleigh taps ``h = sqrt(diag(p)) q`` with q ~ CN(0, I)."""
    q = complex_normal(rng, pdp.N)
    return ChannelRealization(h=np.sqrt(pdp.p) * q, pdp=pdp)


def frequency_response(h, D: int) -> np.ndarray:
    """``F_N h``: the channel's (unnormalized) D-point DFT."""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[0] > D:
        raise InvalidDimensionError(f"channel length {h.shape[0]} exceeds block size {D}")
    return np.fft.fft(h, n=D, axis=0)


def circular_convolve(h, x) -> np.ndarray:
    """Noiseless received block ``H x`` (H circulant), one block per column of x."""
    x = np.asarray(x, dtype=np.complex128)
    D = x.shape[0]
    Hf = frequency_response(h, D)
    if x.ndim == 2 and Hf.ndim == 1:
        Hf = Hf[:, None]
    return np.fft.ifft(Hf * np.fft.fft(x, axis=0), axis=0)


def apply_channel(
    channel: ChannelRealization,
    x,
    noise: NoiseSpec,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Received samples after CP removal: ``y = H x + w``."""
    x = as_complex(x, name="transmit block")
    if channel.N > x.shape[0]:
        raise InvalidDimensionError(
            f"channel length {channel.N} exceeds block size {x.shape[0]}"
        )
    y = circular_convolve(channel.h, x)
    if noise.n0 > 0:
        if rng is None:
            raise ValueError("a random generator is required when n0 > 0")
        y = y + np.sqrt(noise.n0) * complex_normal(rng, y.shape)
    return y


def linear_convolve(h, s) -> np.ndarray:
    """Plain (non-circular) convolution, truncated to the length of ``s``."""
    return np.convolve(np.asarray(s), np.asarray(h))[: len(s)]
