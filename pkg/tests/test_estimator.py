import numpy as np
import pytest

from gfdmce.channel import complex_normal, exponential_pdp, frequency_response
from gfdmce.checks import covariance_sampling_floor, empirical_interference_covariance
from gfdmce.estimator import (
    build_estimator,
    channel_mse,
    estimate,
    expected_square_error,
    interference_covariance,
    lmmse_gain,
    ls_estimate,
    pilot_spectrum,
    wirtinger_gradient,
)
from gfdmce.link import qpsk_symbols
from gfdmce.modem import FilterSpec, GfdmConfig, gfdm_transmitter
from gfdmce.numerics import (
    InvalidDimensionError,
    SingularMatrixError,
    partial_fourier,
)
from gfdmce.pilots import (
    FrequencyBinSet,
    conventional_scheme,
    default_bins,
    default_placement,
    generate_block,
    placement_from_positions,
    proposed_scheme,
    reference_sequence,
)


def received_batch(scheme, tm, pdp, n0, n, rng):
    """Channels (N, n) and received blocks (D, n) for n independent trials."""
    h = np.sqrt(pdp.p)[:, None] * complex_normal(rng, (pdp.N, n))
    data = qpsk_symbols(rng.integers(0, 4, (tm.D - scheme.p, n)))
    d, _ = generate_block(scheme, data)
    x = tm.A @ d
    y = np.fft.ifft(frequency_response(h, tm.D) * np.fft.fft(x, axis=0), axis=0)
    y += np.sqrt(n0) * complex_normal(rng, y.shape)
    return h, y


@pytest.fixture(scope="module")
def small_setup():
    K, M = 4, 8
    tm = gfdm_transmitter(GfdmConfig(K, M, 4, FilterSpec()))
    pl, bins = default_placement(K, M), default_bins(K, M)
    d_r = reference_sequence(K, seed=0)
    return tm, conventional_scheme(pl, bins, d_r), proposed_scheme(tm, pl, bins, d_r)


class TestInterferenceCovariance:
    def test_no_data_no_interference(self, small_setup):
        tm = small_setup[0]
        cov = interference_covariance(exponential_pdp(4).covariance, tm, np.zeros((32, 0)))
        np.testing.assert_array_equal(cov, 0)

    @pytest.mark.parametrize("kind", ["conventional", "proposed"])
    def test_hermitian_psd(self, block_setups, kind):
        tm = block_setups.tm(16, 64, "rc")
        T = block_setups.schemes(16, 64, "rc")[kind].T
        cov = interference_covariance(exponential_pdp(16).covariance, tm, T)
        np.testing.assert_allclose(cov, cov.conj().T, atol=1e-12)
        assert np.max(np.abs(np.diag(cov).imag)) <= 1e-12
        assert np.min(np.diag(cov).real) >= -1e-12
        assert np.min(np.linalg.eigvalsh(0.5 * (cov + cov.conj().T))) >= -1e-9

    def test_energy_scale(self, small_setup):
        tm, conv, _ = small_setup
        pdp = exponential_pdp(4)
        one = interference_covariance(pdp.covariance, tm, conv.T, es=1.0)
        np.testing.assert_allclose(interference_covariance(pdp.covariance, tm, conv.T, es=2.5),
                                   2.5 * one, atol=1e-14)

    def test_matches_sampled_covariance_small(self, small_setup):
        # small block: the sampling noise of the estimate is well below 10%
        tm, conv, _ = small_setup
        pdp = exponential_pdp(4)
        cov = interference_covariance(pdp.covariance, tm, conv.T)
        n = 40000
        emp = empirical_interference_covariance(tm, conv.T, pdp, n, np.random.default_rng(2))
        rel = np.linalg.norm(emp - cov) / np.linalg.norm(cov)
        assert covariance_sampling_floor(cov, n) < 0.05
        assert rel <= 0.1

    def test_matrix_product_reading_is_wrong(self, small_setup):
        tm, conv, _ = small_setup
        pdp = exponential_pdp(4)
        F = partial_fourier(tm.D, 4)
        U = tm.freq @ conv.T
        product = (F @ pdp.covariance @ F.conj().T) @ (U @ U.conj().T)
        emp = empirical_interference_covariance(tm, conv.T, pdp, 40000, np.random.default_rng(3))
        assert np.linalg.norm(emp - product) / np.linalg.norm(product) > 0.5

    def test_ofdm_pilot_bins_are_clean(self):
        from gfdmce.modem import ofdm_transmitter
        from gfdmce.pilots import ofdm_comb_scheme

        D = 64
        bins = FrequencyBinSet(np.arange(0, D, 8), D)
        sch = ofdm_comb_scheme(D, bins, reference_sequence(8))
        cov = interference_covariance(exponential_pdp(8).covariance, ofdm_transmitter(D), sch.T)
        np.testing.assert_array_equal(cov[bins.bins], 0)
        np.testing.assert_array_equal(cov[:, bins.bins], 0)


class TestLmmseGain:
    def test_vanishes_in_pure_noise(self, small_setup):
        tm, conv, _ = small_setup
        pdp = exponential_pdp(4)
        G = lmmse_gain(pilot_spectrum(conv, tm), pdp.covariance, np.zeros((32, 32)), 1e12)
        assert np.linalg.norm(G) <= 1e-6

    def test_near_noiseless_recovery(self, rng):
        # D = N = 8, no interference, every bin carries a pilot
        D = 8
        x_r = np.exp(1j * np.pi / 4 * (2 * rng.integers(0, 4, D) + 1))
        pdp = exponential_pdp(D)
        G = lmmse_gain(x_r, pdp.covariance, np.zeros((D, D)), 1e-12)
        h = np.sqrt(pdp.p) * complex_normal(rng, D)
        # W^H diag(x_r) F h, i.e. the received block without noise
        y = np.fft.ifft(x_r * np.fft.fft(h), norm="ortho")
        np.testing.assert_allclose(estimate(G, y), h, atol=1e-4)

    def test_noiseless_singular_bracket(self, small_setup):
        tm, conv, _ = small_setup
        pdp = exponential_pdp(4)
        # no interference and no noise leaves a rank-N bracket of size D > N
        with pytest.raises(SingularMatrixError):
            lmmse_gain(pilot_spectrum(conv, tm), pdp.covariance, np.zeros((32, 32)), 0.0)

    def test_matches_explicit_inverse(self, small_setup):
        tm, _, prop = small_setup
        pdp = exponential_pdp(4)
        n0 = 0.05
        est = build_estimator(prop, tm, pdp, n0)
        XF = est.x_r[:, None] * partial_fourier(tm.D, 4)
        B = XF @ pdp.covariance @ XF.conj().T + est.sigma_psi + n0 * np.eye(tm.D)
        W = np.fft.fft(np.eye(tm.D), norm="ortho")
        ref = pdp.covariance @ XF.conj().T @ np.linalg.inv(B) @ W
        np.testing.assert_allclose(est.G, ref, atol=1e-8)

    @pytest.mark.parametrize("snr_db", [0, 20, 40])
    @pytest.mark.parametrize("kind", ["conventional", "proposed"])
    def test_stationarity(self, block_setups, kind, snr_db):
        tm = block_setups.tm(16, 64, "dirichlet")
        est = build_estimator(block_setups.schemes(16, 64, "dirichlet")[kind], tm,
                              exponential_pdp(16), 10 ** (-snr_db / 10))
        assert np.linalg.norm(est.gradient()) <= 1e-8

    def test_gradient_nonzero_off_optimum(self, small_setup):
        tm, conv, _ = small_setup
        est = build_estimator(conv, tm, exponential_pdp(4), 0.1)
        grad = wirtinger_gradient(2 * est.G, est.x_r, est.sigma_hh, est.sigma_psi, est.n0)
        assert np.linalg.norm(grad) > 1e-3


class TestEstimate:
    def test_zero_input(self):
        np.testing.assert_array_equal(estimate(np.ones((2, 5)), np.zeros(5)), np.zeros(2))

    def test_selection_gain(self):
        G = np.hstack([np.eye(3), np.zeros((3, 4))])
        y = np.arange(7) + 1j
        np.testing.assert_array_equal(estimate(G, y), y[:3])

    def test_length_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            estimate(np.ones((2, 5)), np.zeros(4))


class TestLeastSquares:
    @pytest.mark.parametrize("filt", ["dirichlet", "rc"])
    def test_noiseless_proposed(self, block_setups, rng, filt):
        tm = block_setups.tm(8, 128, filt)
        sch = block_setups.schemes(8, 128, filt)["proposed"]
        h, y = received_batch(sch, tm, exponential_pdp(8), 0.0, 3, rng)
        np.testing.assert_allclose(ls_estimate(y, sch, 8), h, atol=1e-9)

    def test_zero_input(self, block_setups):
        sch = block_setups.schemes(8, 128, "dirichlet")["proposed"]
        np.testing.assert_array_equal(ls_estimate(np.zeros(1024), sch, 8), np.zeros(8))

    def test_scalar_case(self):
        # one tap, one bin, d_r = 1: W y at bin 0 equals h
        c = 0.3 - 1.2j
        sch = conventional_scheme(placement_from_positions([0], 1), FrequencyBinSet([0], 1),
                                  np.array([1.0]))
        np.testing.assert_allclose(ls_estimate(np.array([c]), sch, 1), [c], atol=1e-15)

    def test_too_few_bins(self, block_setups):
        sch = block_setups.schemes(8, 128, "dirichlet")["proposed"]
        with pytest.raises(InvalidDimensionError):
            ls_estimate(np.zeros(1024), sch, 9)


class TestChannelMse:
    def test_perfect(self):
        assert channel_mse([1 + 1j, 2], [1 + 1j, 2]) == 0.0

    def test_zero_estimate(self):
        assert channel_mse([3, 4j], [0, 0]) == pytest.approx(25.0)

    def test_swap(self):
        assert channel_mse([1, 0], [0, 1]) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            channel_mse([1, 2], [1])


@pytest.fixture(scope="module")
def trial_set(block_setups):
    """5000 fixed trials for Dirichlet (8,128), conventional pilots, 20 dB."""
    tm = block_setups.tm(8, 128, "dirichlet")
    sch = block_setups.schemes(8, 128, "dirichlet")["conventional"]
    pdp = exponential_pdp(8)
    est = build_estimator(sch, tm, pdp, 0.01)
    h, y = received_batch(sch, tm, pdp, 0.01, 5000, np.random.default_rng(99))
    return est, h, y


class TestOptimality:
    def test_expected_error_matches_empirical(self, trial_set):
        est, h, y = trial_set
        empirical = np.mean(np.sum(np.abs(h - est.G @ y) ** 2, axis=0))
        assert empirical == pytest.approx(est.expected_error(), rel=0.05)

    def test_trace_formula_at_zero_gain(self, trial_set):
        est = trial_set[0]
        zero = expected_square_error(np.zeros_like(est.G), est.x_r, est.sigma_hh,
                                     est.sigma_psi, est.n0)
        assert zero == pytest.approx(1.0, abs=1e-12)

    def test_local_optimality(self, trial_set):
        est, h, y = trial_set
        base = np.sum(np.abs(h - est.G @ y) ** 2, axis=0)
        rng = np.random.default_rng(5)
        for _ in range(20):
            delta = complex_normal(rng, est.G.shape)
            delta /= np.linalg.norm(delta)
            perturbed = np.sum(np.abs(h - (est.G + 1e-3 * delta) @ y) ** 2, axis=0)
            diff = perturbed - base
            # paired comparison; one-sided 3 sigma
            assert diff.mean() >= -3 * diff.std(ddof=1) / np.sqrt(diff.size)
            analytic = expected_square_error(est.G + 1e-3 * delta, est.x_r, est.sigma_hh,
                                             est.sigma_psi, est.n0)
            assert analytic >= est.expected_error()
