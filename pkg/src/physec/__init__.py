"""Channel-based message authentication.

Simulates spatially decorrelated fading links for legitimate and adversarial
transmitters, extracts channel-estimate features, and detects spoofed
messages with a one-class Gaussian mixture detector (an MSE-threshold
baseline is included for comparison).
"""

from .channel import (
    ChannelProcess,
    ChannelRealization,
    NoiseModel,
    Prefilter,
    apply_prefilter,
    estimate_channel,
    evolve_channel,
    exponential_tap_powers,
    perfect_imitation_prefilter,
    sample_initial_channel,
    snr_db_to_noise_variance,
)
from .evaluation import (
    DetectorKind,
    ExperimentConfig,
    PERFECT_IMITATION,
    RocCurve,
    TrialResult,
    compare_update_modes,
    compute_roc,
    detection_at_fa,
    run_experiment,
    run_experiment_from_trace,
    sweep_subcarriers,
)
from .features import (
    FeatureKind,
    FeatureVector,
    delta_feature,
    normalize_magnitude,
    select_subcarriers,
    subcarrier_indices,
)
from .gmm import (
    Decision,
    DetectorConfig,
    GmmModel,
    Hypothesis,
    calibrate_threshold,
    classify,
    dump_model,
    fit,
    load_model,
    log_likelihood,
    update_block,
)
from .mse import MseDetectorState, classify_mse, fit_mse, mse_score
from .trace_io import CsiTrace, TraceFormatError, TraceRecord, read_trace, write_trace

__version__ = "0.1.0"
