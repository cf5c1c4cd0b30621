"""Feature extraction: subcarrier selection, normalization, delta features."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from physec import features as ft

from conftest import make_channel


# ---------------------------------------------------------------------------
# subcarrier selection
# ---------------------------------------------------------------------------


def test_equally_spaced_indices_hand_values():
    # floor(i * m_full / m) for i = 0..m-1, written out by hand
    assert ft.subcarrier_indices(48, 4).tolist() == [0, 12, 24, 36]
    assert ft.subcarrier_indices(48, 16).tolist() == list(range(0, 48, 3))
    assert ft.subcarrier_indices(48, 48).tolist() == list(range(48))
    assert ft.subcarrier_indices(48, 5).tolist() == [0, 9, 19, 28, 38]
    assert ft.subcarrier_indices(48, 1).tolist() == [0]


@given(
    m_full=st.integers(min_value=1, max_value=256),
    data=st.data(),
)
def test_indices_strictly_increasing_and_in_range(m_full, data):
    m = data.draw(st.integers(min_value=1, max_value=m_full))
    idx = ft.subcarrier_indices(m_full, m)
    assert idx.shape == (m,)
    assert idx[0] == 0
    assert np.all(np.diff(idx) >= 1)
    assert idx[-1] < m_full


def test_indices_validation():
    with pytest.raises(ValueError):
        ft.subcarrier_indices(48, 0)
    with pytest.raises(ValueError):
        ft.subcarrier_indices(48, 49)


def test_select_subcarriers_picks_expected_gains():
    gains = np.arange(48, dtype=np.complex128)
    c = make_channel(gains, time_index=5, link_id="AB")
    sel = ft.select_subcarriers(c, 4)
    assert np.array_equal(sel.gains, np.array([0, 12, 24, 36], dtype=np.complex128))
    assert sel.time_index == 5
    assert sel.link_id == "AB"


# ---------------------------------------------------------------------------
# normalized magnitude
# ---------------------------------------------------------------------------


def test_normalized_magnitude_hand_example():
    # |[1, 2i, -2, 0]| = [1, 2, 2, 0], sum 5 -> [0.2, 0.4, 0.4, 0.0]
    c = make_channel([1 + 0j, 2j, -2 + 0j, 0 + 0j], time_index=3)
    f = ft.normalize_magnitude(c)
    assert np.allclose(f.values, [0.2, 0.4, 0.4, 0.0], atol=1e-15)
    assert f.kind is ft.FeatureKind.NORMALIZED_MAGNITUDE
    assert f.source_time == 3
    assert f.dim == 4


def test_all_zero_estimate_rejected():
    with pytest.raises(ValueError, match="all-zero"):
        ft.normalize_magnitude(make_channel([0j, 0j]))


complex_gains = st.lists(
    st.tuples(
        st.floats(min_value=-100.0, max_value=100.0),
        st.floats(min_value=-100.0, max_value=100.0),
    ),
    min_size=1,
    max_size=32,
).filter(lambda pairs: any(re != 0.0 or im != 0.0 for re, im in pairs))


@given(pairs=complex_gains)
def test_normalized_magnitude_sums_to_one(pairs):
    gains = np.array([complex(re, im) for re, im in pairs])
    f = ft.normalize_magnitude(make_channel(gains))
    assert np.all(f.values >= 0.0)
    assert abs(f.values.sum() - 1.0) < 1e-9


@settings(max_examples=50)
@given(
    pairs=complex_gains,
    magnitude=st.floats(min_value=1e-3, max_value=1e3),
    phase=st.floats(min_value=0.0, max_value=2 * math.pi),
)
def test_normalized_magnitude_scale_invariant(pairs, magnitude, phase):
    gains = np.array([complex(re, im) for re, im in pairs])
    scale = magnitude * complex(math.cos(phase), math.sin(phase))
    base = ft.normalize_magnitude(make_channel(gains))
    scaled = ft.normalize_magnitude(make_channel(gains * scale))
    assert np.allclose(base.values, scaled.values, atol=1e-9)


def test_normalized_magnitude_permutation_equivariant(rng):
    gains = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    perm = rng.permutation(12)
    base = ft.normalize_magnitude(make_channel(gains))
    permuted = ft.normalize_magnitude(make_channel(gains[perm]))
    assert np.allclose(permuted.values, base.values[perm], atol=1e-15)


# ---------------------------------------------------------------------------
# delta feature
# ---------------------------------------------------------------------------


def test_delta_feature_hand_example():
    prev = make_channel([0 + 0j, 1 + 0j], time_index=0)
    cur = make_channel([1 + 1j, 0 + 0j], time_index=1)
    f = ft.delta_feature(cur, prev)
    assert np.allclose(f.values, [math.sqrt(2.0), 1.0], atol=1e-15)
    assert f.kind is ft.FeatureKind.DELTA
    assert f.source_time == 1

    split = ft.delta_feature(cur, prev, split_complex=True)
    assert np.allclose(split.values, [1.0, -1.0, 1.0, 0.0], atol=1e-15)
    assert split.dim == 4


def test_delta_of_identical_estimates_is_zero():
    prev = make_channel([1 + 2j, -3 + 0j], time_index=0)
    cur = make_channel([1 + 2j, -3 + 0j], time_index=1)
    assert np.array_equal(ft.delta_feature(cur, prev).values, np.zeros(2))
    assert np.array_equal(
        ft.delta_feature(cur, prev, split_complex=True).values, np.zeros(4)
    )


def test_delta_requires_consistent_inputs():
    prev = make_channel([1 + 0j, 2 + 0j], time_index=5)
    with pytest.raises(ValueError, match="subcarriers"):
        ft.delta_feature(make_channel([1 + 0j], time_index=6), prev)
    with pytest.raises(ValueError, match="later"):
        ft.delta_feature(make_channel([1 + 0j, 2 + 0j], time_index=5), prev)
    with pytest.raises(ValueError, match="later"):
        ft.delta_feature(make_channel([1 + 0j, 2 + 0j], time_index=4), prev)


def test_feature_vector_validation():
    with pytest.raises(ValueError):
        ft.FeatureVector(np.empty(0), source_time=0, kind=ft.FeatureKind.DELTA)
    with pytest.raises(ValueError):
        ft.FeatureVector(np.zeros((2, 2)), source_time=0, kind=ft.FeatureKind.DELTA)
