"""Pilot framework ``d = S d_r + T d_d`` and its two concrete designs.

A pilot scheme fixes where the p pilots sit inside the block (the
permutation ``P = [P1 P2]``), which frequency bins carry the reference
sequence, and the linear maps S and T. The conventional design transmits
the reference sequence directly as the pilots. The interference
precancelling design solves for pilots that force the transmit spectrum at
the chosen bins to equal the reference sequence, whatever the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modem import TransmitterMatrix
from .numerics import (
    InvalidDimensionError,
    InvalidParameterError,
    LinearSolver,
    SingularMatrixError,
    as_complex,
)


class BinSelectionError(SingularMatrixError):
    """The chosen frequency bins make W1 singular, so no precancelling pilots exist."""


class SchemeKind(str, Enum):
    CONVENTIONAL = "conventional"
    PROPOSED = "proposed"
    OFDM_COMB = "ofdm"


def _index_list(values, D: int, what: str) -> np.ndarray:
    idx = np.asarray(values, dtype=int).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= D):
        raise InvalidParameterError(f"{what} must lie in 0..{D - 1}")
    if np.unique(idx).size != idx.size:
        raise InvalidParameterError(f"{what} must be distinct")
    return idx


@dataclass(frozen=True, eq=False)
class PilotPlacement:
    """Pilot positions inside a length-D block; data fills the rest in ascending order."""

    positions: np.ndarray
    D: int

    def __post_init__(self):
        pos = _index_list(self.positions, self.D, "pilot positions")
        if pos.size == 0:
            raise InvalidParameterError("at least one pilot is required")
        object.__setattr__(self, "positions", pos)
        mask = np.ones(self.D, dtype=bool)
        mask[pos] = False
        object.__setattr__(self, "data_positions", np.flatnonzero(mask))

    @property
    def p(self) -> int:
        return self.positions.size

    @property
    def permutation(self) -> np.ndarray:
        """Column order of P: pilot positions first, then data positions."""
        return np.concatenate([self.positions, self.data_positions])

    @property
    def P1(self) -> np.ndarray:
        return np.eye(self.D)[:, self.positions]

    @property
    def P2(self) -> np.ndarray:
        return np.eye(self.D)[:, self.data_positions]

    def assemble(self, d_p, d_d) -> np.ndarray:
        """``d = P1 d_p + P2 d_d``, column-wise for batches."""
        d_p = np.asarray(d_p, dtype=np.complex128)
        d_d = np.asarray(d_d, dtype=np.complex128)
        d = np.empty((self.D,) + d_d.shape[1:], dtype=np.complex128)
        d[self.positions] = d_p
        d[self.data_positions] = d_d
        return d


@dataclass(frozen=True, eq=False)
class FrequencyBinSet:
    """Zero-based DFT bins whose transmit samples carry the reference sequence."""

    bins: np.ndarray
    D: int

    def __post_init__(self):
        object.__setattr__(self, "bins", _index_list(self.bins, self.D, "frequency bins"))

    def __len__(self) -> int:
        return self.bins.size


@dataclass(frozen=True, eq=False)
class PilotScheme:
    kind: SchemeKind
    placement: PilotPlacement
    bins: FrequencyBinSet
    d_r: np.ndarray
    S: np.ndarray
    T: np.ndarray

    @property
    def D(self) -> int:
        return self.placement.D

    @property
    def p(self) -> int:
        return self.placement.p

    def generate_block(self, d_d):
        return generate_block(self, d_d)


def placement_from_positions(positions, D: int) -> PilotPlacement:
    return PilotPlacement(positions=np.asarray(positions), D=D)


def default_placement(K: int, M: int) -> PilotPlacement:
    """Pilots on the first subsymbol of every subcarrier, i.e. block positions 0..K-1."""
    return PilotPlacement(positions=np.arange(K), D=K * M)


def default_bins(K: int, M: int) -> FrequencyBinSet:
    """Subcarrier-centre bins ``{0, M, ..., (K-1)M}``."""
    return FrequencyBinSet(bins=np.arange(K) * M, D=K * M)


def reference_sequence(p: int, es: float = 1.0, seed=0) -> np.ndarray:
    """Seeded constant-modulus QPSK reference symbols of energy ``es`` each."""
    if p < 1:
        raise InvalidParameterError(f"reference length must be >= 1, got {p}")
    rng = np.random.default_rng(seed)
    quadrant = rng.integers(0, 4, size=p)
    return np.sqrt(es) * np.exp(1j * np.pi / 4 * (2 * quadrant + 1))


def build_w1_w2(tm: TransmitterMatrix, placement: PilotPlacement, bins: FrequencyBinSet):
    """Row-select ``W_D A P`` at the bins and split it into pilot/data columns.

    Returns ``(W1, W2, condition)``; raises :class:`BinSelectionError` when
    W1 is not safely invertible.
    """
    if len(bins) != placement.p:
        raise InvalidDimensionError(
            f"need exactly p={placement.p} frequency bins, got {len(bins)}"
        )
    rows = tm.freq[bins.bins]
    W1 = rows[:, placement.positions]
    W2 = rows[:, placement.data_positions]
    try:
        cond = LinearSolver(W1).condition
    except SingularMatrixError as err:
        raise BinSelectionError("W1 is not invertible for these bins", err.condition) from None
    return W1, W2, cond


def proposed_design(tm: TransmitterMatrix, placement: PilotPlacement, bins: FrequencyBinSet):
    """``S = P1 W1^-1`` and ``T = P2 - P1 W1^-1 W2`` via one factorization of W1."""
    W1, W2, _ = build_w1_w2(tm, placement, bins)
    return _precancel_maps(W1, W2, placement)


def _precancel_maps(W1, W2, placement: PilotPlacement):
    p, D = placement.p, placement.D
    solved = LinearSolver(W1).solve(np.hstack([np.eye(p), W2]))
    S = np.zeros((D, p), dtype=np.complex128)
    S[placement.positions] = solved[:, :p]
    T = np.zeros((D, D - p), dtype=np.complex128)
    T[placement.data_positions] = np.eye(D - p)
    T[placement.positions] = -solved[:, p:]
    return S, T


def conventional_scheme(placement: PilotPlacement, bins: FrequencyBinSet, d_r,
                        kind: SchemeKind = SchemeKind.CONVENTIONAL) -> PilotScheme:
    """Pilots equal the reference sequence: ``S = P1``, ``T = P2``."""
    d_r = as_complex(d_r, ndim=1, name="reference sequence")
    if d_r.size != placement.p:
        raise InvalidDimensionError(f"reference length {d_r.size} != p = {placement.p}")
    return PilotScheme(kind=SchemeKind(kind), placement=placement, bins=bins, d_r=d_r,
                       S=placement.P1.astype(np.complex128),
                       T=placement.P2.astype(np.complex128))


def proposed_scheme(tm: TransmitterMatrix, placement: PilotPlacement,
                    bins: FrequencyBinSet, d_r) -> PilotScheme:
    d_r = as_complex(d_r, ndim=1, name="reference sequence")
    if d_r.size != placement.p:
        raise InvalidDimensionError(f"reference length {d_r.size} != p = {placement.p}")
    S, T = proposed_design(tm, placement, bins)
    return PilotScheme(kind=SchemeKind.PROPOSED, placement=placement, bins=bins,
                       d_r=d_r, S=S, T=T)


def ofdm_comb_scheme(D: int, bins: FrequencyBinSet, d_r) -> PilotScheme:
    """OFDM baseline: pilots sit directly on the bins, data on the remaining subcarriers."""
    return conventional_scheme(PilotPlacement(positions=bins.bins, D=D), bins, d_r,
                               kind=SchemeKind.OFDM_COMB)


def generate_block(scheme: PilotScheme, d_d):
    """Build ``d = S d_r + T d_d`` and return ``(d, d_p)``.

    ``d_d`` may be a single data vector or a (D-p, B) batch; ``d_p`` follows
    the same layout.
    """
    d_d = np.asarray(d_d, dtype=np.complex128)
    if d_d.shape[0] != scheme.D - scheme.p:
        raise InvalidDimensionError(
            f"data length {d_d.shape[0]} != D - p = {scheme.D - scheme.p}"
        )
    if scheme.kind is SchemeKind.PROPOSED:
        pilot_part = scheme.S @ scheme.d_r
        if d_d.ndim == 2:
            pilot_part = pilot_part[:, None]
        d = pilot_part + scheme.T @ d_d
    else:
        # S, T are selections here, so skip the dense products
        d_r = scheme.d_r if d_d.ndim == 1 else np.repeat(scheme.d_r[:, None], d_d.shape[1], axis=1)
        d = scheme.placement.assemble(d_r, d_d)
    return d, d[scheme.placement.positions]


def pilot_energy(d_p) -> float:
    """Average energy per pilot, ``||d_p||^2 / p`` (averaged over columns for batches)."""
    d_p = np.asarray(d_p)
    if d_p.size == 0:
        return 0.0
    per_column = np.sum(np.abs(d_p) ** 2, axis=0) / d_p.shape[0]
    return float(np.mean(per_column))
