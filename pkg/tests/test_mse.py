"""Mean-squared-error baseline: scoring, reference tracking, calibration."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from physec import mse
from physec.gmm import Hypothesis


def state(reference, threshold=None, track=True) -> mse.MseDetectorState:
    return mse.MseDetectorState(
        reference=np.asarray(reference, dtype=np.float64),
        threshold=threshold,
        track_reference=track,
    )


def test_score_hand_example():
    # mean of [(0.3)^2, (0.3)^2] = 0.09
    s = state([0.0, 0.0])
    assert mse.mse_score(s, np.array([0.3, 0.3])) == pytest.approx(0.09, abs=1e-12)
    assert mse.mse_score(s, np.array([0.0, 0.0])) == 0.0


def test_score_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        mse.mse_score(state([0.0, 0.0]), np.array([1.0]))


finite_vec = st.lists(
    st.floats(min_value=-1e3, max_value=1e3), min_size=1, max_size=8
)


@given(a=finite_vec, data=st.data())
def test_score_is_symmetric(a, data):
    b = data.draw(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3),
            min_size=len(a),
            max_size=len(a),
        )
    )
    va, vb = np.array(a), np.array(b)
    assert mse.mse_score(state(va), vb) == mse.mse_score(state(vb), va)


def test_accept_updates_reference_only_when_tracking():
    tracking = state([0.0, 0.0], threshold=1.0, track=True)
    feat = np.array([0.5, 0.5])
    decision = mse.classify_mse(tracking, feat)
    assert decision.hypothesis is Hypothesis.H0_BOB
    assert np.array_equal(tracking.reference, feat)

    fixed = state([0.0, 0.0], threshold=1.0, track=False)
    mse.classify_mse(fixed, feat)
    assert np.array_equal(fixed.reference, np.array([0.0, 0.0]))


def test_reject_never_touches_the_reference():
    s = state([0.0, 0.0], threshold=0.01, track=True)
    decision = mse.classify_mse(s, np.array([5.0, 5.0]))
    assert decision.hypothesis is Hypothesis.H1_NOT_BOB
    assert np.array_equal(s.reference, np.array([0.0, 0.0]))


def test_boundary_score_accepts():
    s = state([0.0], threshold=0.25, track=False)
    decision = mse.classify_mse(s, np.array([0.5]))  # score exactly 0.25
    assert decision.score == 0.25
    assert decision.hypothesis is Hypothesis.H0_BOB


def test_classify_requires_threshold():
    with pytest.raises(ValueError, match="threshold"):
        mse.classify_mse(state([0.0]), np.array([0.0]))


def test_fit_tracking_uses_consecutive_differences():
    # x = 0,1,3,6 -> consecutive squared differences 1,4,9.
    # At target 0.4 the mirrored quantile rule admits scores above 4 as
    # alarms: 1/3 of the calibration scores, within target.
    x = np.array([[0.0], [1.0], [3.0], [6.0]])
    s = mse.fit_mse(x, target_fa=0.4, track_reference=True)
    assert s.threshold == pytest.approx(4.0, abs=1e-12)
    assert np.array_equal(s.reference, np.array([6.0]))
    assert s.track_reference is True


def test_fit_fixed_reference_uses_training_mean():
    x = np.array([[0.0], [2.0]])
    s = mse.fit_mse(x, target_fa=0.3, track_reference=False)
    assert np.array_equal(s.reference, np.array([1.0]))
    assert s.threshold == pytest.approx(1.0, abs=1e-12)
    scores = np.array([mse.mse_score(s, row) for row in x])
    assert np.mean(scores > s.threshold) <= 0.3


def test_fit_needs_two_samples():
    with pytest.raises(ValueError, match="two"):
        mse.fit_mse(np.zeros((1, 3)), target_fa=0.1)


@given(
    n=st.integers(min_value=3, max_value=40),
    d=st.integers(min_value=1, max_value=3),
    target=st.floats(min_value=0.05, max_value=0.5),
    seed=st.integers(min_value=0, max_value=2**31),
    track=st.booleans(),
)
def test_calibration_false_alarm_never_exceeds_target(n, d, target, seed, track):
    x = np.random.default_rng(seed).standard_normal((n, d))
    s = mse.fit_mse(x, target_fa=target, track_reference=track)
    if track:
        scores = np.mean(np.diff(x, axis=0) ** 2, axis=1)
    else:
        scores = np.mean((x - x.mean(axis=0)) ** 2, axis=1)
    assert np.mean(scores > s.threshold) <= target + 1e-12


def test_state_validation():
    with pytest.raises(ValueError):
        mse.MseDetectorState(reference=np.empty(0))
    with pytest.raises(ValueError):
        mse.MseDetectorState(reference=np.zeros((2, 2)))
