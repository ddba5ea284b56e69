"""Numerical self-checks shared by the ``validate`` command and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PowerDelayProfile, complex_normal, exponential_pdp
from .estimator import build_estimator, interference_covariance
from .link import qpsk_symbols
from .modem import FilterKind, GfdmConfig, TransmitterMatrix, gfdm_transmitter
from .montecarlo import ExperimentSpec
from .numerics import dft, partial_fourier
from .pilots import (
    PilotScheme,
    conventional_scheme,
    default_bins,
    default_placement,
    generate_block,
    proposed_scheme,
    reference_sequence,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (limit {self.limit:.3e})"


def empirical_interference_covariance(tm: TransmitterMatrix, T, pdp: PowerDelayProfile,
                                      n_samples: int, rng: np.random.Generator,
                                      es: float = 1.0, batch: int = 1000) -> np.ndarray:
    """Sample covariance of ``diag(W_D A T d_d) F_N h`` over joint QPSK/Rayleigh draws."""
    U = tm.freq @ T
    F = partial_fourier(tm.D, pdp.N)
    acc = np.zeros((tm.D, tm.D), dtype=np.complex128)
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        data = qpsk_symbols(rng.integers(0, 4, size=(T.shape[1], b)), es)
        h = np.sqrt(pdp.p)[:, None] * complex_normal(rng, (pdp.N, b))
        psi = (U @ data) * (F @ h)
        acc += psi @ psi.conj().T
        done += b
    return acc / n_samples


def covariance_sampling_floor(sigma_psi: np.ndarray, n_samples: int) -> float:
    """Expected relative Frobenius error of an n-sample covariance estimate.

    Gaussian approximation: ``E||C_hat - C||^2 = (tr(C)^2 + ||C||^2) / n``.
    """
    fro2 = np.linalg.norm(sigma_psi) ** 2
    tr = np.trace(sigma_psi).real
    return float(np.sqrt((tr ** 2 + fro2) / (n_samples * fro2)))


def precancellation_error(scheme: PilotScheme, tm: TransmitterMatrix, n_blocks: int,
                          rng: np.random.Generator) -> float:
    """Largest ``||[W_D A d]_bins - d_r||`` over random data blocks."""
    data = qpsk_symbols(rng.integers(0, 4, size=(scheme.D - scheme.p, n_blocks)))
    d, _ = generate_block(scheme, data)
    x_f = dft(tm.A @ d, axis=0)
    residual = x_f[scheme.bins.bins] - scheme.d_r[:, None]
    return float(np.max(np.linalg.norm(residual, axis=0)))


def run_checks(spec: ExperimentSpec, samples: int = 20000, seed: int | None = None
               ) -> list[CheckResult]:
    """Unitarity, precancellation, stationarity and covariance-oracle checks for a spec."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    K, M = spec.K, spec.M
    pdp = exponential_pdp(spec.n_taps)
    placement = default_placement(K, M)
    bins = default_bins(K, M)
    d_r = reference_sequence(placement.p, spec.es, seed=spec.seed)
    results = []
    for filt in spec.filters:
        tm = gfdm_transmitter(GfdmConfig(K, M, spec.L, filt))
        tag = f"{filt.label} K={K} M={M}"
        err = tm.unitarity_error()
        if filt.kind is FilterKind.DIRICHLET:
            results.append(CheckResult(f"unitarity {tag}", err <= 1e-9, err, 1e-9))
        else:
            results.append(CheckResult(f"non-unitarity {tag}", err > 1e-3, err, 1e-3))

        conv = conventional_scheme(placement, bins, d_r)
        prop = proposed_scheme(tm, placement, bins, d_r)
        pre = precancellation_error(prop, tm, 100, rng)
        results.append(CheckResult(f"precancellation {tag}", pre <= 1e-9, pre, 1e-9))

        for scheme in (conv, prop):
            sigma_psi = interference_covariance(pdp.covariance, tm, scheme.T, spec.es)
            for n0 in (spec.n0s[0], spec.n0s[-1]):
                est = build_estimator(scheme, tm, pdp, n0, spec.es, sigma_psi=sigma_psi)
                grad = float(np.linalg.norm(est.gradient()))
                results.append(CheckResult(
                    f"stationarity {scheme.kind.value} {tag} n0={n0:.3g}", grad <= 1e-8, grad, 1e-8))

        sigma_psi = interference_covariance(pdp.covariance, tm, conv.T, spec.es)
        emp = empirical_interference_covariance(tm, conv.T, pdp, samples, rng, spec.es)
        rel = float(np.linalg.norm(emp - sigma_psi) / np.linalg.norm(sigma_psi))
        # the sample covariance cannot beat its own sampling noise
        limit = max(0.1, 1.5 * covariance_sampling_floor(sigma_psi, samples))
        results.append(CheckResult(f"covariance oracle {tag} n={samples}", rel <= limit, rel, limit))
    return results
