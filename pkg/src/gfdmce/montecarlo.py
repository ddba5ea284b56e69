"""Monte Carlo SNR sweeps producing channel-MSE and SER curves.

Every trial draws its randomness from a stream keyed by (master seed,
realization index, block index), and the same draws are reused across
schemes and SNR points. Results are therefore independent of the number
of worker processes and of execution order.
"""

from __future__ import annotations

import csv
import io
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import NoiseSpec, complex_normal, draw_channel, exponential_pdp
from .link import Link
from .modem import FilterSpec, GfdmConfig, gfdm_transmitter, ofdm_transmitter
from .numerics import InvalidParameterError
from .pilots import (
    conventional_scheme,
    default_bins,
    default_placement,
    ofdm_comb_scheme,
    proposed_scheme,
    reference_sequence,
)

log = logging.getLogger(__name__)

SCHEMES = ("conventional", "proposed", "ls", "genie", "ofdm", "ofdm-genie")
CSV_COLUMNS = ("scheme", "filter", "K", "M", "snr_db", "mse", "ser", "pilot_energy_avg", "trials")


class SimulationError(RuntimeError):
    """A numerical failure inside a sweep, tagged with where it happened."""


@dataclass(frozen=True)
class ExperimentSpec:
    K: int
    M: int
    L: int = 16
    filters: tuple[FilterSpec, ...] = (FilterSpec(),)
    schemes: tuple[str, ...] = ("conventional", "proposed", "genie", "ofdm", "ofdm-genie")
    snr_db: tuple[float, ...] = tuple(range(0, 41, 5))
    n_h: int = 100
    n_d: int = 100
    es: float = 1.0
    seed: int = 0
    taps: int | None = None

    def __post_init__(self):
        if self.n_h < 1 or self.n_d < 1:
            raise InvalidParameterError("N_h and N_d must be >= 1")
        snr = tuple(float(s) for s in self.snr_db)
        if not snr or any(b <= a for a, b in zip(snr, snr[1:])):
            raise InvalidParameterError("SNR grid must be nonempty and strictly increasing")
        object.__setattr__(self, "snr_db", snr)
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise InvalidParameterError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        if not self.filters:
            raise InvalidParameterError("at least one filter is required")
        if self.es <= 0:
            raise InvalidParameterError("symbol energy must be positive")
        if self.seed < 0:
            raise InvalidParameterError("seed must be a nonnegative integer")
        if self.n_taps - 1 > self.L:
            raise InvalidParameterError(
                f"channel order {self.n_taps - 1} exceeds CP length {self.L}")
        if self.n_taps > self.K:
            raise InvalidParameterError(f"{self.n_taps} taps need at least as many pilots (p={self.K})")

    @property
    def n_taps(self) -> int:
        return self.taps if self.taps is not None else self.K

    @property
    def D(self) -> int:
        return self.K * self.M

    @property
    def n0s(self) -> list[float]:
        return [NoiseSpec.from_snr_db(s, self.es).n0 for s in self.snr_db]


@dataclass(frozen=True)
class CurvePoint:
    scheme: str
    filter: str
    K: int
    M: int
    snr_db: float
    mse: float
    ser: float
    pilot_energy_avg: float
    trials: int

    def row(self) -> list[str]:
        return [self.scheme, self.filter, str(self.K), str(self.M), f"{self.snr_db:g}",
                repr(self.mse), repr(self.ser), repr(self.pilot_energy_avg), str(self.trials)]


def build_links(spec: ExperimentSpec) -> list[Link]:
    """Instantiate every (scheme, filter) chain the experiment asks for, gains included."""
    K, M, D = spec.K, spec.M, spec.D
    pdp = exponential_pdp(spec.n_taps)
    placement = default_placement(K, M)
    bins = default_bins(K, M)
    d_r = reference_sequence(placement.p, spec.es, seed=spec.seed)
    links = []

    gfdm_wanted = [s for s in ("conventional", "proposed", "ls", "genie") if s in spec.schemes]
    for filt in spec.filters if gfdm_wanted else ():
        tm = gfdm_transmitter(GfdmConfig(K, M, spec.L, filt))
        conv = conventional_scheme(placement, bins, d_r)
        prop = proposed_scheme(tm, placement, bins, d_r) if {"proposed", "ls"} & set(gfdm_wanted) else None
        for name in gfdm_wanted:
            scheme, estimator = {
                "conventional": (conv, "lmmse"),
                "proposed": (prop, "lmmse"),
                "ls": (prop, "ls"),
                "genie": (conv, "genie"),
            }[name]
            links.append(Link(name, filt.label, tm, scheme, pdp, estimator, spec.es))

    ofdm_wanted = [s for s in ("ofdm", "ofdm-genie") if s in spec.schemes]
    if ofdm_wanted:
        tm = ofdm_transmitter(D)
        scheme = ofdm_comb_scheme(D, bins, d_r)
        for name in ofdm_wanted:
            links.append(Link(name, "none", tm, scheme, pdp,
                              "genie" if name == "ofdm-genie" else "lmmse", spec.es))

    for link in links:
        link.prepare(spec.n0s)
    return links


def _streams(seed: int, realization: int, block: int | None):
    # fixed-length keys: tag 0 = channel draw, tag 1 = block draw
    key = (0, realization, 0) if block is None else (1, realization, block)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def draw_realization(spec: ExperimentSpec, realization: int):
    """Channel, data indices (D-p, N_d) and unit noise (D, N_d) for one realization."""
    pdp = exponential_pdp(spec.n_taps)
    h = draw_channel(pdp, _streams(spec.seed, realization, None)).h
    p = spec.K
    data = np.empty((spec.D - p, spec.n_d), dtype=np.int64)
    noise = np.empty((spec.D, spec.n_d), dtype=np.complex128)
    for j in range(spec.n_d):
        rng = _streams(spec.seed, realization, j)
        data[:, j] = rng.integers(0, 4, size=spec.D - p)
        noise[:, j] = complex_normal(rng, spec.D)
    return h, data, noise


_CONTEXT: dict = {}


def _init_worker(spec: ExperimentSpec, links: list[Link]):
    _CONTEXT["spec"] = spec
    _CONTEXT["links"] = links


def _simulate_realization(realization: int) -> np.ndarray:
    """Sums for one channel realization, shape (links, snr points, 4)."""
    from .link import simulate_blocks

    spec: ExperimentSpec = _CONTEXT["spec"]
    links: list[Link] = _CONTEXT["links"]
    h, data, noise = draw_realization(spec, realization)
    n0s = spec.n0s
    out = np.zeros((len(links), len(n0s), 4))
    for li, link in enumerate(links):
        try:
            sums, pe, _ = simulate_blocks(link, h, data, noise, n0s)
        except Exception as err:
            raise SimulationError(
                f"scheme={link.label} filter={link.filter_label} realization={realization}: {err}"
            ) from err
        out[li, :, :3] = sums
        out[li, :, 3] = pe
    return out


def monte_carlo(spec: ExperimentSpec, workers: int = 1, links: list[Link] | None = None
                ) -> list[CurvePoint]:
    """Run the sweep and return one curve point per (scheme, filter, SNR)."""
    if links is None:
        links = build_links(spec)
    indices = range(spec.n_h)
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                                 initializer=_init_worker, initargs=(spec, links)) as pool:
            results = list(pool.map(_simulate_realization, indices))
    else:
        _init_worker(spec, links)
        results = [_simulate_realization(i) for i in indices]
    # fixed-order reduction keeps the output independent of scheduling
    totals = np.sum(np.stack(results), axis=0)

    trials = spec.n_h * spec.n_d
    points = []
    for li, link in enumerate(links):
        for si, snr in enumerate(spec.snr_db):
            sq, errors, count, pe = totals[li, si]
            points.append(CurvePoint(
                scheme=link.label, filter=link.filter_label, K=spec.K, M=spec.M,
                snr_db=snr, mse=float(sq / trials), ser=float(errors / count),
                pilot_energy_avg=float(pe / trials), trials=trials))
    return points


def write_csv(points: list[CurvePoint], target=None) -> str:
    """Serialize curve points; writes to ``target`` (path) when given and returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for point in points:
        writer.writerow(point.row())
    text = buf.getvalue()
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
