"""End-to-end spoofing-detection experiments.

Protocol: block 0 carries legitimate traffic only and trains the detector;
every later block mixes legitimate and attacker messages, where each message
comes from the attacker independently with probability `attack_intensity`.
Both links evolve one step per message.  With updating enabled, the mixture
detector refits itself on its own accepted samples at every block boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import channel as ch
from . import features as ft
from . import gmm
from . import mse
from .gmm import Hypothesis

__all__ = [
    "DetectorKind",
    "PERFECT_IMITATION",
    "BOB_LINK",
    "EVE_LINK",
    "ExperimentConfig",
    "Counts",
    "BlockTrace",
    "TrialResult",
    "RocCurve",
    "run_experiment",
    "run_experiment_from_trace",
    "simulated_estimate_pairs",
    "compute_roc",
    "detection_at_fa",
    "sweep_subcarriers",
    "compare_update_modes",
]

BOB_LINK = "AB"
EVE_LINK = "AE"

# Sentinel for ExperimentConfig.prefilter: give the attacker coefficients that
# reproduce the legitimate link's initial realization exactly.  Meaningful
# with quasi-static channels (large coherence_samples).
PERFECT_IMITATION = "imitate-bob"

# Small-scale override for quick CI runs.
DESK_PRESET = {"num_blocks": 10, "block_size": 200}


class DetectorKind(Enum):
    GMM = "gmm"
    MSE = "mse"


@dataclass
class ExperimentConfig:
    """Everything one trial depends on; a given config is fully reproducible."""

    m_subcarriers: int = 16
    snr_db: float = 20.0
    attack_intensity: float = 0.5
    num_blocks: int = 100
    block_size: int = 1000
    coherence_samples: float = math.inf
    detector: DetectorKind = DetectorKind.GMM
    update_enabled: bool = True
    feature_kind: ft.FeatureKind = ft.FeatureKind.NORMALIZED_MAGNITUDE
    prefilter: ch.Prefilter | str | None = None
    rng_seed: int = 0
    target_fa: float = 0.01
    m_full: int = 48
    num_taps: int = 8
    gmm_components: int = 3
    oracle_update: bool = False
    mse_track_reference: bool = True

    def __post_init__(self):
        if not 1 <= self.m_subcarriers <= self.m_full:
            raise ValueError(
                f"need 1 <= m_subcarriers <= m_full, got {self.m_subcarriers} / {self.m_full}"
            )
        if not 0.0 <= self.attack_intensity <= 1.0:
            raise ValueError("attack_intensity must lie in [0, 1]")
        if self.num_blocks < 2:
            raise ValueError("need at least one training and one test block")
        if self.block_size < 2:
            raise ValueError("block_size must be >= 2")
        if not 0.0 < self.target_fa < 1.0:
            raise ValueError("target_fa must lie in (0, 1)")
        if not self.coherence_samples > 0:
            raise ValueError("coherence_samples must be positive")
        if self.num_taps < 1 or self.num_taps > self.m_full:
            raise ValueError("need 1 <= num_taps <= m_full")
        if self.gmm_components < 1:
            raise ValueError("gmm_components must be >= 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if isinstance(self.prefilter, str) and self.prefilter != PERFECT_IMITATION:
            raise ValueError(f"unknown prefilter sentinel {self.prefilter!r}")

    def detector_config(self, rng_seed: int) -> gmm.DetectorConfig:
        return gmm.DetectorConfig(
            num_components=self.gmm_components,
            target_false_alarm=self.target_fa,
            update_enabled=self.update_enabled,
            block_size=self.block_size,
            rng_seed=rng_seed,
        )


class Counts(NamedTuple):
    true_detects: int
    false_alarms: int
    misses: int
    correct_accepts: int


@dataclass
class BlockTrace:
    """Per-block bookkeeping of one trial."""

    block_index: int
    bob_messages: int
    eve_messages: int
    false_alarms: int
    detections: int
    model_updated: bool


@dataclass
class TrialResult:
    """Outcome of one experiment.

    Scores are stored in acceptance direction (larger = more consistent with
    the legitimate link), so ROC sweeps treat both detectors uniformly; for
    the MSE detector that is the negated score.  `p_d`/`p_md` are None when
    the trial contained no attacker messages, `p_fa` when it contained no
    legitimate ones.
    """

    counts: Counts
    p_d: float | None
    p_fa: float | None
    p_md: float | None
    target_fa: float
    blocks: list = field(default_factory=list)
    bob_scores: np.ndarray = field(default_factory=lambda: np.empty(0))
    eve_scores: np.ndarray = field(default_factory=lambda: np.empty(0))
    config: ExperimentConfig | None = None

    @property
    def total_test_messages(self) -> int:
        return int(sum(self.counts))

    @property
    def realized_fa(self) -> float | None:
        return self.p_fa


@dataclass
class RocCurve:
    """Operating points swept over all observed scores; p_fa strictly increasing."""

    p_fa: np.ndarray
    p_d: np.ndarray

    @property
    def points(self) -> list:
        return list(zip(self.p_fa.tolist(), self.p_d.tolist()))

    def auc(self) -> float:
        return float(np.trapezoid(self.p_d, self.p_fa))


def _derived_seeds(seed: int) -> list[int]:
    """Independent per-stream seeds from one experiment seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(6, dtype=np.uint64)]


def simulated_estimate_pairs(config: ExperimentConfig):
    """Infinite stream of (bob_estimate, eve_estimate) pairs, one per message.

    Both links evolve every message so their time bases stay aligned; the
    attacker's channel passes through the configured prefilter before
    estimation.
    """
    seeds = _derived_seeds(config.rng_seed)
    pdp = ch.exponential_tap_powers(config.num_taps)
    bob_proc = ch.ChannelProcess(config.num_taps, pdp, config.coherence_samples, seeds[0])
    eve_proc = ch.ChannelProcess(config.num_taps, pdp, config.coherence_samples, seeds[1])
    noise_var = ch.snr_db_to_noise_variance(config.snr_db)
    bob_noise = ch.NoiseModel(noise_var, seeds[2])
    eve_noise = ch.NoiseModel(noise_var, seeds[3])
    bob = ch.sample_initial_channel(bob_proc, config.m_full, link_id=BOB_LINK)
    eve = ch.sample_initial_channel(eve_proc, config.m_full, link_id=EVE_LINK)
    prefilter = config.prefilter
    if isinstance(prefilter, str):
        prefilter = ch.perfect_imitation_prefilter(bob, eve)

    def generate():
        b, e = bob, eve
        while True:
            b = ch.evolve_channel(b, bob_proc, 1)
            e = ch.evolve_channel(e, eve_proc, 1)
            effective = ch.apply_prefilter(e, prefilter) if prefilter is not None else e
            yield ch.estimate_channel(b, bob_noise), ch.estimate_channel(effective, eve_noise)

    return generate()


def _make_feature(selected, previous_selected, kind):
    if kind is ft.FeatureKind.NORMALIZED_MAGNITUDE:
        return ft.normalize_magnitude(selected)
    if previous_selected is None:
        return None
    return ft.delta_feature(selected, previous_selected)


def _run_on_pairs(config: ExperimentConfig, pairs, m_full: int) -> TrialResult:
    if config.m_subcarriers > m_full:
        raise ValueError(
            f"m_subcarriers={config.m_subcarriers} exceeds available m_full={m_full}"
        )
    seeds = _derived_seeds(config.rng_seed)
    attack_rng = np.random.default_rng(seeds[4])
    det_cfg = config.detector_config(rng_seed=seeds[5])
    m = config.m_subcarriers

    def pull():
        try:
            return next(pairs)
        except StopIteration:
            raise ValueError(
                "estimate stream exhausted before the experiment finished"
            ) from None

    # -- training block: legitimate traffic only ------------------------------
    previous = None
    train_features = []
    for _ in range(config.block_size):
        bob_est, _eve_est = pull()
        selected = ft.select_subcarriers(bob_est, m)
        feat = _make_feature(selected, previous, config.feature_kind)
        previous = selected
        if feat is not None:
            train_features.append(feat)

    use_gmm = config.detector is DetectorKind.GMM
    if use_gmm:
        model = gmm.fit(train_features, det_cfg)
        state = None
    else:
        model = None
        state = mse.fit_mse(
            train_features, config.target_fa, track_reference=config.mse_track_reference
        )

    # -- test blocks -----------------------------------------------------------
    detects = alarms = misses = accepts = 0
    bob_scores: list[float] = []
    eve_scores: list[float] = []
    block_traces: list[BlockTrace] = []
    for b in range(1, config.num_blocks):
        block_features = []
        block_is_bob = []
        blk_bob = blk_eve = blk_alarms = blk_detects = 0
        for _ in range(config.block_size):
            from_eve = attack_rng.random() < config.attack_intensity
            bob_est, eve_est = pull()
            est = eve_est if from_eve else bob_est
            selected = ft.select_subcarriers(est, m)
            feat = _make_feature(selected, previous, config.feature_kind)
            previous = selected
            if use_gmm:
                score = gmm.log_likelihood(model, feat)
                is_bob = score >= model.threshold
                accept_score = score
            else:
                decision = mse.classify_mse(state, feat)
                is_bob = decision.hypothesis is Hypothesis.H0_BOB
                accept_score = -decision.score
            block_features.append(feat)
            block_is_bob.append(not from_eve)
            if from_eve:
                blk_eve += 1
                eve_scores.append(accept_score)
                if is_bob:
                    misses += 1
                else:
                    detects += 1
                    blk_detects += 1
            else:
                blk_bob += 1
                bob_scores.append(accept_score)
                if is_bob:
                    accepts += 1
                else:
                    alarms += 1
                    blk_alarms += 1
        updated = False
        if use_gmm and config.update_enabled:
            mask = np.array(block_is_bob) if config.oracle_update else None
            new_model = gmm.update_block(model, block_features, det_cfg, bob_mask=mask)
            updated = new_model is not model
            model = new_model
        block_traces.append(
            BlockTrace(b, blk_bob, blk_eve, blk_alarms, blk_detects, updated)
        )

    counts = Counts(detects, alarms, misses, accepts)
    eve_total = detects + misses
    bob_total = alarms + accepts
    p_d = detects / eve_total if eve_total else None
    p_fa = alarms / bob_total if bob_total else None
    p_md = None if p_d is None else 1.0 - p_d
    return TrialResult(
        counts=counts,
        p_d=p_d,
        p_fa=p_fa,
        p_md=p_md,
        target_fa=config.target_fa,
        blocks=block_traces,
        bob_scores=np.array(bob_scores),
        eve_scores=np.array(eve_scores),
        config=config,
    )


def run_experiment(config: ExperimentConfig) -> TrialResult:
    """Simulate both links and run the configured detector over the stream."""
    pairs = simulated_estimate_pairs(config)
    return _run_on_pairs(config, pairs, config.m_full)


def run_experiment_from_trace(
    trace, config: ExperimentConfig, bob_label: str = BOB_LINK, eve_label: str = EVE_LINK
) -> TrialResult:
    """Replay a recorded trace instead of simulating.

    The trace must carry both links at every message slot.  Prefilters are a
    transmit-side construct and cannot be applied to recordings.
    """
    if config.prefilter is not None:
        raise ValueError("prefilters require the simulator; traces are already recorded")
    streams: dict[str, list] = {bob_label: [], eve_label: []}
    for rec in trace.records:
        if rec.link_label in streams:
            streams[rec.link_label].append(
                ch.ChannelRealization(rec.gains, rec.time_index, rec.link_label)
            )
    total = config.num_blocks * config.block_size
    for label in (bob_label, eve_label):
        if len(streams[label]) < total:
            raise ValueError(
                f"trace has {len(streams[label])} records for link {label!r}, "
                f"need {total}"
            )
    pairs = iter(zip(streams[bob_label], streams[eve_label]))
    return _run_on_pairs(config, pairs, trace.m_full)


def compute_roc(bob_scores, eve_scores) -> RocCurve:
    """Threshold sweep over all observed scores.

    Scores must be in acceptance direction (reject strictly below the
    threshold).  Each swept threshold contributes the point
    (fraction of legitimate scores below, fraction of attacker scores below);
    the curve is deduplicated to strictly increasing p_fa, keeping the best
    p_d per p_fa, and always ends at (1, 1).
    """
    bob = np.sort(np.asarray(bob_scores, dtype=np.float64))
    eve = np.sort(np.asarray(eve_scores, dtype=np.float64))
    if bob.size == 0 or eve.size == 0:
        raise ValueError("both score collections must be non-empty")
    thresholds = np.unique(np.concatenate([bob, eve]))
    fa = np.searchsorted(bob, thresholds, side="left") / bob.size
    pd = np.searchsorted(eve, thresholds, side="left") / eve.size
    fa = np.append(fa, 1.0)  # threshold above every score
    pd = np.append(pd, 1.0)
    # keep the last (= best pd) entry of each run of equal fa
    keep = np.append(fa[1:] != fa[:-1], True)
    return RocCurve(p_fa=fa[keep], p_d=pd[keep])


def detection_at_fa(result: TrialResult, fa: float) -> float:
    """Detection probability at a matched false-alarm rate.

    Thresholds the trial's pooled scores so that the given fraction of
    legitimate messages would be rejected, then reports the fraction of
    attacker messages rejected at that same threshold.
    """
    if result.bob_scores.size == 0 or result.eve_scores.size == 0:
        raise ValueError("trial must contain scores from both sources")
    thr = gmm.lower_tail_threshold(result.bob_scores, fa)
    return float(np.mean(result.eve_scores < thr))


def sweep_subcarriers(base: ExperimentConfig, m_values) -> list:
    """Rerun one scenario at several subcarrier counts with common seeds."""
    m_values = list(m_values)
    if not m_values:
        raise ValueError("m_values must be non-empty")
    results = []
    for m in m_values:
        result = run_experiment(replace(base, m_subcarriers=int(m)))
        results.append((int(m), result))
    return results


def compare_update_modes(base: ExperimentConfig) -> tuple[TrialResult, TrialResult]:
    """Paired-seed comparison of block updating on versus off."""
    if not np.isfinite(base.coherence_samples):
        raise ValueError("coherence_samples must be finite for an update comparison")
    with_update = run_experiment(replace(base, update_enabled=True))
    without_update = run_experiment(replace(base, update_enabled=False))
    return with_update, without_update
