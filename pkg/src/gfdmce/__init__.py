"""GFDM link simulation with pilot-aided LMMSE channel estimation.

Covers the GFDM block modem, a Rayleigh multipath channel, the ``S d_r + T d_d``
pilot framework (conventional and interference-precancelling pilots), the
LMMSE estimator for that framework and a Monte Carlo MSE/SER harness with an
OFDM baseline.
"""

from .channel import (
    ChannelRealization,
    NoiseSpec,
    PowerDelayProfile,
    apply_channel,
    draw_channel,
    exponential_pdp,
)
from .estimator import (
    LmmseEstimator,
    build_estimator,
    channel_mse,
    estimate,
    interference_covariance,
    lmmse_gain,
    ls_estimate,
)
from .link import Link, detect_qpsk, equalize_fd, run_trial
from .modem import (
    FilterKind,
    FilterSpec,
    GfdmConfig,
    TransmitterMatrix,
    add_cp,
    demodulate_zf,
    gfdm_transmitter,
    modulate,
    ofdm_transmitter,
    prototype_filter,
    remove_cp,
    transmitter_matrix,
)
from .montecarlo import CurvePoint, ExperimentSpec, monte_carlo, write_csv
from .numerics import (
    InvalidDimensionError,
    InvalidParameterError,
    SingularMatrixError,
    circulant,
    dft_matrix,
    partial_fourier,
    solve,
)
from .pilots import (
    BinSelectionError,
    PilotPlacement,
    PilotScheme,
    SchemeKind,
    build_w1_w2,
    conventional_scheme,
    default_bins,
    default_placement,
    generate_block,
    pilot_energy,
    proposed_design,
    proposed_scheme,
    reference_sequence,
)

__version__ = "0.1.0"
