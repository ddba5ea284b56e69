import numpy as np
import pytest

from gfdmce.channel import exponential_pdp
from gfdmce.modem import FilterSpec, GfdmConfig, gfdm_transmitter
from gfdmce.pilots import (
    conventional_scheme,
    default_bins,
    default_placement,
    proposed_scheme,
    reference_sequence,
)

BLOCK_CASES = [(8, 128), (16, 64)]
FILTERS = {"dirichlet": FilterSpec(), "rc": FilterSpec("rc", 0.9)}

# Acceptance outcomes collected for the end-of-run summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class _Cache:
    def __init__(self):
        self._tms = {}
        self._schemes = {}

    def tm(self, K, M, filt):
        key = (K, M, filt)
        if key not in self._tms:
            self._tms[key] = gfdm_transmitter(GfdmConfig(K, M, 16, FILTERS[filt]))
        return self._tms[key]

    def schemes(self, K, M, filt):
        key = (K, M, filt)
        if key not in self._schemes:
            tm = self.tm(K, M, filt)
            placement = default_placement(K, M)
            bins = default_bins(K, M)
            d_r = reference_sequence(K, 1.0, seed=0)
            self._schemes[key] = {
                "conventional": conventional_scheme(placement, bins, d_r),
                "proposed": proposed_scheme(tm, placement, bins, d_r),
            }
        return self._schemes[key]


@pytest.fixture(scope="session")
def block_setups():
    """Lazily built transmitters and pilot schemes for the 8x128 and 16x64 blocks."""
    return _Cache()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def pdp8():
    return exponential_pdp(8)
