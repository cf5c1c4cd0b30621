"""Frequency-selective fading links and noisy channel estimation.

Each link is a tapped-delay line whose taps are circularly-symmetric complex
Gaussians; the per-subcarrier gains are the DFT of the taps.  Temporal
evolution follows a first-order autoregression so that one step decorrelates
the taps by exp(-1/coherence_samples).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChannelRealization",
    "ChannelProcess",
    "NoiseModel",
    "Prefilter",
    "exponential_tap_powers",
    "sample_initial_channel",
    "evolve_channel",
    "estimate_channel",
    "apply_prefilter",
    "perfect_imitation_prefilter",
    "snr_db_to_noise_variance",
]

# tap powers must sum to unity so that average per-subcarrier power is 1
_POWER_TOL = 1e-9


def exponential_tap_powers(num_taps: int, decay: float = 3.0) -> np.ndarray:
    """Exponentially decaying power-delay profile, normalized to unit total power."""
    if num_taps < 1:
        raise ValueError("num_taps must be >= 1")
    if decay <= 0:
        raise ValueError("decay must be positive")
    p = np.exp(-np.arange(num_taps) / decay)
    return p / p.sum()


def snr_db_to_noise_variance(snr_db: float) -> float:
    """Per-subcarrier noise variance for a given estimation SNR (unit channel power)."""
    return float(10.0 ** (-snr_db / 10.0))


@dataclass
class ChannelRealization:
    """Per-subcarrier complex gains of one link at one time instant."""

    gains: np.ndarray
    time_index: int
    link_id: str

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=np.complex128)
        if self.gains.ndim != 1 or self.gains.size < 1:
            raise ValueError("gains must be a non-empty 1-D vector")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("gains must be finite")

    @property
    def m_full(self) -> int:
        return self.gains.size


@dataclass
class Prefilter:
    """Per-subcarrier complex coefficients applied at the transmitter."""

    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if self.coefficients.ndim != 1 or self.coefficients.size < 1:
            raise ValueError("coefficients must be a non-empty 1-D vector")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")


@dataclass
class ChannelProcess:
    """Stochastic model of one link; owns its RNG stream.

    `coherence_samples` is the coherence time in estimation intervals: a
    single evolve step multiplies tap correlation by exp(-1/coherence_samples).
    `rician_k` adds a fixed line-of-sight component on the first tap
    (0 keeps the pure-Rayleigh model).  Not safe for concurrent mutation.
    """

    num_taps: int
    tap_powers: np.ndarray
    coherence_samples: float
    rng_seed: int
    rician_k: float = 0.0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)
    _scattered_powers: np.ndarray = field(init=False, repr=False, compare=False)
    _los_taps: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.tap_powers = np.asarray(self.tap_powers, dtype=np.float64)
        if self.num_taps < 1:
            raise ValueError("num_taps must be >= 1")
        if self.tap_powers.shape != (self.num_taps,):
            raise ValueError("tap_powers must have shape (num_taps,)")
        if np.any(self.tap_powers < 0):
            raise ValueError("tap powers must be non-negative")
        if abs(float(self.tap_powers.sum()) - 1.0) > _POWER_TOL:
            raise ValueError("tap powers must sum to 1")
        if not self.coherence_samples > 0:
            raise ValueError("coherence_samples must be positive")
        if self.rician_k < 0:
            raise ValueError("rician_k must be non-negative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        # split the first tap's power between a deterministic line-of-sight
        # part and the diffuse remainder; rician_k = 0 leaves everything diffuse
        self._scattered_powers = self.tap_powers.copy()
        self._scattered_powers[0] /= 1.0 + self.rician_k
        self._los_taps = np.zeros(self.num_taps, dtype=np.complex128)
        self._los_taps[0] = np.sqrt(
            self.tap_powers[0] * self.rician_k / (1.0 + self.rician_k)
        )
        self._rng = np.random.default_rng(self.rng_seed)

    def step_correlation(self, steps: int) -> float:
        return float(np.exp(-steps / self.coherence_samples))

    def _draw_scattered_taps(self) -> np.ndarray:
        std = np.sqrt(self._scattered_powers / 2.0)
        re = self._rng.standard_normal(self.num_taps)
        im = self._rng.standard_normal(self.num_taps)
        return (re + 1j * im) * std


@dataclass
class NoiseModel:
    """I.i.d. complex Gaussian estimation noise; owns its RNG stream."""

    noise_variance: float
    rng_seed: int
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        self._rng = np.random.default_rng(self.rng_seed)


def _check_m_full(process: ChannelProcess, m_full: int) -> None:
    if m_full < process.num_taps:
        raise ValueError(
            f"m_full={m_full} must be >= num_taps={process.num_taps}"
        )


def sample_initial_channel(
    process: ChannelProcess,
    m_full: int,
    link_id: str = "link",
    time_index: int = 0,
) -> ChannelRealization:
    """Draw a stationary channel realization on `m_full` subcarriers.

    Average per-subcarrier power is 1 because the tap powers sum to 1.
    """
    _check_m_full(process, m_full)
    taps = process._los_taps + process._draw_scattered_taps()
    gains = np.fft.fft(taps, n=m_full)
    return ChannelRealization(gains, time_index=time_index, link_id=link_id)


def evolve_channel(
    current: ChannelRealization, process: ChannelProcess, steps: int = 1
) -> ChannelRealization:
    """Advance a realization by `steps` estimation intervals.

    Per tap the update is h_new = rho * h_old + sqrt(1 - rho^2) * innovation
    with rho = exp(-steps / coherence_samples) and the innovation drawn from
    the tap's stationary distribution.  The DFT is linear, so the same
    combination is applied directly to the frequency-domain gains using a
    freshly drawn innovation channel; the stationary distribution is
    preserved exactly for any step size.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m_full = current.m_full
    _check_m_full(process, m_full)
    rho = process.step_correlation(steps)
    innovation = np.fft.fft(process._draw_scattered_taps(), n=m_full)
    los = np.fft.fft(process._los_taps, n=m_full)
    gains = los + rho * (current.gains - los) + np.sqrt(1.0 - rho * rho) * innovation
    return ChannelRealization(
        gains, time_index=current.time_index + steps, link_id=current.link_id
    )


def estimate_channel(
    truth: ChannelRealization, noise: NoiseModel
) -> ChannelRealization:
    """Noisy receiver-side estimate: truth plus i.i.d. CN(0, noise_variance)."""
    m = truth.m_full
    std = np.sqrt(noise.noise_variance / 2.0)
    eps = (noise._rng.standard_normal(m) + 1j * noise._rng.standard_normal(m)) * std
    return ChannelRealization(
        truth.gains + eps, time_index=truth.time_index, link_id=truth.link_id
    )


def apply_prefilter(
    channel: ChannelRealization, prefilter: Prefilter
) -> ChannelRealization:
    """Effective channel seen through a transmit prefilter (element-wise product)."""
    if prefilter.coefficients.size != channel.m_full:
        raise ValueError(
            f"prefilter length {prefilter.coefficients.size} does not match "
            f"m_full={channel.m_full}"
        )
    return ChannelRealization(
        channel.gains * prefilter.coefficients,
        time_index=channel.time_index,
        link_id=channel.link_id,
    )


def perfect_imitation_prefilter(
    target: ChannelRealization, actual: ChannelRealization
) -> Prefilter:
    """Coefficients that make `actual` look exactly like `target`.

    Test fixture for the strongest attacker: with these coefficients the
    filtered channel equals the target realization element-wise.
    """
    if target.m_full != actual.m_full:
        raise ValueError("target and actual must share m_full")
    if np.any(actual.gains == 0):
        raise ValueError("actual channel has a zero gain; imitation undefined")
    return Prefilter(target.gains / actual.gains)
