"""End-to-end link: pilot insertion, channel, estimation, ZF equalization and detection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import PowerDelayProfile, circular_convolve, complex_normal, frequency_response
from .estimator import LmmseEstimator, build_estimator, interference_covariance, ls_estimate
from .modem import TransmitterMatrix, demodulate_zf, modulate
from .numerics import InvalidDimensionError, InvalidParameterError
from .pilots import PilotScheme, generate_block

log = logging.getLogger(__name__)


class EqualizationError(ArithmeticError):
    """A frequency coefficient of the channel estimate is exactly zero."""


# --- QPSK -----------------------------------------------------------------

def qpsk_symbols(indices, es: float = 1.0) -> np.ndarray:
    """Gray-mapped QPSK: bit 1 of the index flips the real sign, bit 0 the imaginary sign."""
    indices = np.asarray(indices)
    re = 1 - 2 * ((indices >> 1) & 1)
    im = 1 - 2 * (indices & 1)
    return np.sqrt(es / 2) * (re + 1j * im)


def detect_qpsk(z) -> np.ndarray:
    """Nearest-point QPSK decision; ties go to positive real, then positive imaginary."""
    z = np.asarray(z)
    return 2 * (z.real < 0).astype(np.int64) + (z.imag < 0).astype(np.int64)


def random_qpsk(rng: np.random.Generator, shape, es: float = 1.0):
    indices = rng.integers(0, 4, size=shape)
    return indices, qpsk_symbols(indices, es)


# --- receiver --------------------------------------------------------------

def equalize_fd(y, h_hat, D: int) -> np.ndarray:
    """Zero-forcing frequency-domain equalizer ``W^H diag(F h_hat)^-1 W y``."""
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != D:
        raise InvalidDimensionError(f"received block length {y.shape[0]} != D = {D}")
    Hf = frequency_response(h_hat, D)
    if np.any(Hf == 0):
        raise EqualizationError("channel estimate has a zero frequency coefficient")
    return np.fft.ifft(np.fft.fft(y, axis=0) / Hf, axis=0)


# --- link ------------------------------------------------------------------

ESTIMATORS = ("lmmse", "ls", "genie")


@dataclass(eq=False)
class Link:
    """One transmit/receive chain: a waveform, a pilot scheme and a channel estimator.

    LMMSE gains are cached per noise level; ``prepare`` builds them up front
    so the link can be shared read-only between workers.
    """

    label: str
    filter_label: str
    tm: TransmitterMatrix
    scheme: PilotScheme
    pdp: PowerDelayProfile
    estimator: str = "lmmse"
    es: float = 1.0
    _gains: dict = field(default_factory=dict, repr=False)
    _sigma_psi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise InvalidParameterError(f"unknown estimator {self.estimator!r}")

    def lmmse(self, n0: float) -> LmmseEstimator:
        if n0 not in self._gains:
            if self._sigma_psi is None:
                self._sigma_psi = interference_covariance(
                    self.pdp.covariance, self.tm, self.scheme.T, self.es)
            self._gains[n0] = build_estimator(self.scheme, self.tm, self.pdp, n0, self.es,
                                              sigma_psi=self._sigma_psi)
        return self._gains[n0]

    def prepare(self, n0s) -> "Link":
        if self.estimator == "lmmse":
            for n0 in n0s:
                self.lmmse(n0)
        return self

    def transmit(self, data_symbols):
        """Return ``(x, d, d_p)`` for a (D-p,) vector or (D-p, B) batch of data symbols."""
        d, d_p = generate_block(self.scheme, data_symbols)
        return modulate(self.tm, d), d, d_p

    def estimate_channel(self, y, h, n0: float) -> np.ndarray:
        if self.estimator == "genie":
            h = np.asarray(h, dtype=np.complex128)
            return h if y.ndim == 1 else np.repeat(h[:, None], y.shape[1], axis=1)
        if self.estimator == "ls":
            return ls_estimate(y, self.scheme, self.pdp.N)
        return self.lmmse(n0).estimate(y)

    def receive(self, y, h_hat):
        """Equalize and ZF-demodulate; returns the data-position soft symbols
        and a per-block flag marking equalization singularities."""
        y2 = y if y.ndim == 2 else y[:, None]
        h2 = h_hat if h_hat.ndim == 2 else h_hat[:, None]
        Hf = frequency_response(h2, self.tm.D)
        singular = np.any(Hf == 0, axis=0)
        Hf[:, singular] = 1.0
        x_hat = np.fft.ifft(np.fft.fft(y2, axis=0) / Hf, axis=0)
        d_hat = demodulate_zf(self.tm, x_hat)
        soft = d_hat[self.scheme.placement.data_positions]
        if y.ndim == 1:
            return soft[:, 0], singular
        return soft, singular


@dataclass(frozen=True)
class TrialResult:
    sq_error: float
    errors: int
    symbols: int
    pilot_energy: float


def simulate_blocks(link: Link, h, data_idx, noise_unit, n0s):
    """Push a batch of blocks through the link at several noise levels.

    ``data_idx`` is (D-p, B) QPSK indices and ``noise_unit`` a (D, B) batch
    of unit-variance noise, scaled by ``sqrt(n0)`` for each level so every
    level sees the same underlying draw. Returns an array of shape
    (len(n0s), 3) holding summed squared error, symbol errors and symbol
    count, plus the summed per-block pilot energy.
    """
    h = np.asarray(h, dtype=np.complex128)
    symbols = qpsk_symbols(data_idx, link.es)
    x, _, d_p = link.transmit(symbols)
    clean = circular_convolve(h, x)
    n_blocks = data_idx.shape[1]
    pilot_energy_sum = float(np.sum(np.sum(np.abs(d_p) ** 2, axis=0) / d_p.shape[0]))

    out = np.zeros((len(n0s), 3))
    for s, n0 in enumerate(n0s):
        y = clean + np.sqrt(n0) * noise_unit
        h_hat = link.estimate_channel(y, h, n0)
        soft, singular = link.receive(y, h_hat)
        wrong = detect_qpsk(soft) != data_idx
        if np.any(singular):
            log.warning("%s: %d block(s) hit an equalization singularity at n0=%g",
                        link.label, int(singular.sum()), n0)
            wrong[:, singular] = True
        out[s, 0] = np.sum(np.abs(h[:, None] - h_hat) ** 2) if link.estimator != "genie" else 0.0
        out[s, 1] = np.count_nonzero(wrong)
        out[s, 2] = wrong.size
    return out, pilot_energy_sum, n_blocks


def run_trial(link: Link, h, data_idx, n0: float, rng: np.random.Generator) -> TrialResult:
    """One block through the link, with fresh noise drawn from ``rng``."""
    data_idx = np.asarray(data_idx).reshape(-1, 1)
    noise = complex_normal(rng, (link.tm.D, 1))
    out, pe, _ = simulate_blocks(link, h, data_idx, noise, [n0])
    return TrialResult(sq_error=float(out[0, 0]), errors=int(out[0, 1]),
                       symbols=int(out[0, 2]), pilot_energy=pe)
