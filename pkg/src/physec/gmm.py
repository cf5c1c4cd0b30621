"""One-class Gaussian mixture detector: EM training, likelihood thresholding,
and decision-directed block updates.

The mixture uses diagonal covariances.  A message is accepted as legitimate
when its log-likelihood under the trained model reaches the threshold, which
is calibrated as a lower-tail empirical quantile of legitimate scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .features import FeatureVector

__all__ = [
    "Hypothesis",
    "Decision",
    "DetectorConfig",
    "GmmModel",
    "as_feature_matrix",
    "fit",
    "log_likelihood",
    "log_likelihoods",
    "responsibilities",
    "lower_tail_threshold",
    "calibrate_threshold",
    "classify",
    "update_block",
    "dump_model",
    "load_model",
]

_LOG_2PI = math.log(2.0 * math.pi)


class Hypothesis(Enum):
    H0_BOB = "bob"
    H1_NOT_BOB = "not-bob"


@dataclass
class Decision:
    hypothesis: Hypothesis
    score: float


@dataclass
class DetectorConfig:
    """Training, calibration, and update parameters of the mixture detector.

    `min_update_fraction` guards block updates against poisoning: a refit
    only happens when at least max(num_components, fraction * block) samples
    were accepted, so a block of rejected attacker traffic cannot drag the
    model off its legitimate cluster.
    """

    num_components: int = 3
    max_em_iterations: int = 200
    convergence_tol: float = 1e-6
    variance_floor: float = 1e-8
    target_false_alarm: float = 0.01
    update_enabled: bool = True
    block_size: int = 1000
    rng_seed: int = 0
    min_update_fraction: float = 0.1

    def __post_init__(self):
        if self.num_components < 1:
            raise ValueError("num_components must be >= 1")
        if self.max_em_iterations < 1:
            raise ValueError("max_em_iterations must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be positive")
        if not 0.0 < self.target_false_alarm < 1.0:
            raise ValueError("target_false_alarm must lie in (0, 1)")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 0.0 <= self.min_update_fraction <= 1.0:
            raise ValueError("min_update_fraction must lie in [0, 1]")


@dataclass
class GmmModel:
    """Diagonal-covariance Gaussian mixture with a decision threshold."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_floor: float
    threshold: float | None = None
    trained_on: int = 0
    em_log_likelihoods: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        k = self.weights.size
        if self.weights.ndim != 1 or k < 1:
            raise ValueError("weights must be a non-empty 1-D vector")
        if self.means.ndim != 2 or self.means.shape[0] != k:
            raise ValueError("means must have shape (num_components, dim)")
        if self.variances.shape != self.means.shape:
            raise ValueError("variances must have the same shape as means")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be positive")
        if np.any(self.variances < self.variance_floor):
            raise ValueError("variances must not fall below the variance floor")

    @property
    def num_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def as_feature_matrix(features, dim: int | None = None) -> np.ndarray:
    """Stack features into an (N, dim) float64 matrix.

    Accepts an ndarray or a sequence of FeatureVector / 1-D arrays; all rows
    must share one dimension.
    """
    if isinstance(features, np.ndarray):
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2:
            raise ValueError("feature array must be 1-D or 2-D")
    else:
        rows = [f.values if isinstance(f, FeatureVector) else np.asarray(f, dtype=np.float64) for f in features]
        if not rows:
            raise ValueError("empty feature collection")
        widths = {r.size for r in rows}
        if len(widths) != 1:
            raise ValueError(f"inconsistent feature dimensions: {sorted(widths)}")
        x = np.stack(rows).astype(np.float64)
    if x.shape[0] == 0:
        raise ValueError("empty feature collection")
    if dim is not None and x.shape[1] != dim:
        raise ValueError(f"expected feature dimension {dim}, got {x.shape[1]}")
    return x


def _component_log_densities(
    x: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """Per-sample, per-component diagonal Gaussian log-densities, shape (N, K)."""
    diff = x[:, None, :] - means[None, :, :]
    quad = np.sum(diff * diff / variances[None, :, :], axis=2)
    log_norm = np.sum(np.log(variances), axis=1) + means.shape[1] * _LOG_2PI
    return -0.5 * (quad + log_norm[None, :])


def _weighted_log_densities(
    x: np.ndarray, weights: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    with np.errstate(divide="ignore"):  # zero weights contribute -inf, which is correct
        log_w = np.log(weights)
    return _component_log_densities(x, means, variances) + log_w[None, :]


def log_likelihoods(model: GmmModel, features) -> np.ndarray:
    """Mixture log-likelihood of each feature, computed via log-sum-exp."""
    x = as_feature_matrix(features, model.dim)
    return logsumexp(
        _weighted_log_densities(x, model.weights, model.means, model.variances), axis=1
    )


def log_likelihood(model: GmmModel, feature) -> float:
    """Mixture log-likelihood of a single feature."""
    if isinstance(feature, FeatureVector):
        feature = feature.values
    return float(log_likelihoods(model, np.asarray(feature, dtype=np.float64)[None, :])[0])


def responsibilities(
    x: np.ndarray, weights: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """Posterior component memberships; rows sum to 1."""
    lw = _weighted_log_densities(x, weights, means, variances)
    return np.exp(lw - logsumexp(lw, axis=1)[:, None])


def _seed_initial_parameters(x, k, rng, floor):
    """k-means++-style seeding followed by a hard assignment.

    Returns initial (weights, means, variances) for EM.
    """
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            [np.sum((x - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers.append(x[idx])
    centers = np.array(centers)
    dist = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    assign = np.argmin(dist, axis=1)
    counts = np.bincount(assign, minlength=k)
    global_var = np.maximum(x.var(axis=0), floor)
    means = centers.copy()
    variances = np.tile(global_var, (k, 1))
    for j in range(k):
        if counts[j] > 0:
            means[j] = x[assign == j].mean(axis=0)
        if counts[j] > 1:
            variances[j] = np.maximum(x[assign == j].var(axis=0), floor)
    counts_adj = np.maximum(counts, 1)
    weights = counts_adj / counts_adj.sum()
    return weights, means, variances


def _em(x, weights, means, variances, config):
    """Run EM to convergence; returns parameters and the log-likelihood history.

    The history is non-decreasing: flooring the variances is the constrained
    M-step maximizer, so the usual EM guarantee is preserved.
    """
    n = x.shape[0]
    history = []
    ll_prev = None
    for _ in range(config.max_em_iterations):
        lw = _weighted_log_densities(x, weights, means, variances)
        per_sample = logsumexp(lw, axis=1)
        ll = float(per_sample.sum())
        history.append(ll)
        resp = np.exp(lw - per_sample[:, None])
        nk = resp.sum(axis=0)
        weights = nk / n
        safe_nk = np.where(nk > 0, nk, 1.0)
        means = np.where(
            nk[:, None] > 0, (resp.T @ x) / safe_nk[:, None], means
        )
        new_var = np.empty_like(variances)
        for j in range(weights.size):
            if nk[j] > 0:
                d = x - means[j]
                new_var[j] = resp[:, j] @ (d * d) / nk[j]
            else:
                new_var[j] = variances[j]
        variances = np.maximum(new_var, config.variance_floor)
        if ll_prev is not None and abs(ll - ll_prev) <= config.convergence_tol * abs(ll_prev):
            break
        ll_prev = ll
    return weights, means, variances, history


def fit(
    training,
    config: DetectorConfig,
    *,
    init: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> GmmModel:
    """Train the mixture on legitimate features and calibrate its threshold.

    Initial parameters come from k-means++-style seeding driven by
    config.rng_seed, or from `init` (weights, means, variances) for warm
    starts.  The threshold is set on the training scores at
    config.target_false_alarm.
    """
    x = as_feature_matrix(training)
    n = x.shape[0]
    k = config.num_components
    if k > n:
        raise ValueError(f"num_components={k} exceeds training size {n}")
    if init is None:
        rng = np.random.default_rng(config.rng_seed)
        weights, means, variances = _seed_initial_parameters(
            x, k, rng, config.variance_floor
        )
    else:
        weights = np.asarray(init[0], dtype=np.float64).copy()
        means = np.asarray(init[1], dtype=np.float64).copy()
        variances = np.asarray(init[2], dtype=np.float64).copy()
        if weights.size != k or means.shape != (k, x.shape[1]):
            raise ValueError("warm-start parameters do not match config/data shape")
        # a component may have starved in an earlier refit; give it a sliver of
        # weight so EM can revive it instead of freezing it at exactly zero
        weights = np.maximum(weights, 1e-12)
        weights = weights / weights.sum()
        variances = np.maximum(variances, config.variance_floor)
    weights, means, variances, history = _em(x, weights, means, variances, config)
    model = GmmModel(
        weights,
        means,
        variances,
        variance_floor=config.variance_floor,
        threshold=None,
        trained_on=n,
        em_log_likelihoods=history,
    )
    scores = log_likelihoods(model, x)
    model.threshold = calibrate_threshold(model, scores, config.target_false_alarm)
    return model


def lower_tail_threshold(scores, target_fa: float) -> float:
    """Largest t such that the fraction of scores strictly below t is <= target_fa."""
    s = np.sort(np.asarray(scores, dtype=np.float64))
    if s.size == 0:
        raise ValueError("cannot calibrate a threshold on an empty score list")
    if not 0.0 < target_fa < 1.0:
        raise ValueError("target_fa must lie in (0, 1)")
    j = min(int(math.floor(target_fa * s.size)), s.size - 1)
    return float(s[j])


def calibrate_threshold(model: GmmModel, held_out_bob_scores, target_fa: float) -> float:
    """Lower-tail empirical quantile of legitimate scores.

    The model itself does not enter the computation; it is part of the
    signature so calibration sits next to the model it belongs to.
    """
    return lower_tail_threshold(held_out_bob_scores, target_fa)


def classify(model: GmmModel, feature) -> Decision:
    """Accept as legitimate when the log-likelihood reaches the threshold."""
    if model.threshold is None:
        raise ValueError("model has no calibrated threshold")
    score = log_likelihood(model, feature)
    hyp = Hypothesis.H0_BOB if score >= model.threshold else Hypothesis.H1_NOT_BOB
    return Decision(hypothesis=hyp, score=score)


def update_block(
    model: GmmModel,
    block,
    config: DetectorConfig,
    bob_mask: np.ndarray | None = None,
) -> GmmModel:
    """Decision-directed refit on one block of streamed features.

    Samples the current model accepts are used for a warm-started refit and
    threshold recalibration.  `bob_mask` substitutes ground-truth labels for
    the detector's own decisions (oracle-labeled updates, for comparison
    runs).  The model is returned unchanged when updating is disabled or too
    few samples were accepted.
    """
    if not config.update_enabled:
        return model
    if model.threshold is None:
        raise ValueError("model has no calibrated threshold")
    x = as_feature_matrix(block, model.dim)
    if x.shape[0] != config.block_size:
        raise ValueError(
            f"block length {x.shape[0]} does not match config.block_size={config.block_size}"
        )
    if bob_mask is not None:
        accept = np.asarray(bob_mask, dtype=bool)
        if accept.shape != (x.shape[0],):
            raise ValueError("bob_mask must have one boolean per block sample")
    else:
        accept = log_likelihoods(model, x) >= model.threshold
    n_accepted = int(accept.sum())
    guard = max(
        config.num_components,
        math.ceil(config.min_update_fraction * x.shape[0]),
    )
    if n_accepted < guard:
        return model
    warm = (model.weights, model.means, model.variances)
    refit_config = config
    if config.num_components != model.num_components:
        raise ValueError("config.num_components does not match the model")
    return fit(x[accept], refit_config, init=warm)


# --- flat text serialization ------------------------------------------------
#
# K=<int>
# M=<int>
# floor=<float>
# trained_on=<int>
# <weight> <mean_0> ... <mean_{M-1}> <var_0> ... <var_{M-1}>     (K lines)
# threshold=<float or none>
#
# Floats use Python repr, the shortest form that round-trips exactly.


def _fmt(v: float) -> str:
    return repr(float(v))


def dump_model(model: GmmModel, dest) -> None:
    """Write a model in the flat text format (path or text stream)."""
    lines = [
        f"K={model.num_components}",
        f"M={model.dim}",
        f"floor={_fmt(model.variance_floor)}",
        f"trained_on={model.trained_on}",
    ]
    for j in range(model.num_components):
        parts = [_fmt(model.weights[j])]
        parts += [_fmt(v) for v in model.means[j]]
        parts += [_fmt(v) for v in model.variances[j]]
        lines.append(" ".join(parts))
    thr = "none" if model.threshold is None else _fmt(model.threshold)
    lines.append(f"threshold={thr}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def load_model(src) -> GmmModel:
    """Read a model written by dump_model (path or text stream)."""
    if hasattr(src, "read"):
        text = src.read()
    else:
        text = Path(src).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        header = dict(ln.split("=", 1) for ln in lines[:4])
        k = int(header["K"])
        m = int(header["M"])
        floor = float(header["floor"])
        trained_on = int(header["trained_on"])
        comp_lines = lines[4 : 4 + k]
        if len(comp_lines) != k:
            raise ValueError(f"expected {k} component lines")
        weights = np.empty(k)
        means = np.empty((k, m))
        variances = np.empty((k, m))
        for j, ln in enumerate(comp_lines):
            vals = [float(tok) for tok in ln.split()]
            if len(vals) != 1 + 2 * m:
                raise ValueError(f"component line {j} has {len(vals)} values, expected {1 + 2 * m}")
            weights[j] = vals[0]
            means[j] = vals[1 : 1 + m]
            variances[j] = vals[1 + m :]
        thr_line = lines[4 + k]
        key, _, val = thr_line.partition("=")
        if key != "threshold":
            raise ValueError("missing threshold line")
        threshold = None if val == "none" else float(val)
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed model file: {exc}") from exc
    return GmmModel(
        weights,
        means,
        variances,
        variance_floor=floor,
        threshold=threshold,
        trained_on=trained_on,
    )
