"""Shared test helpers."""

import numpy as np
import pytest

from physec.channel import ChannelRealization
from physec.evaluation import DESK_PRESET, ExperimentConfig


def make_channel(gains, time_index=0, link_id="AB") -> ChannelRealization:
    return ChannelRealization(
        np.asarray(gains, dtype=np.complex128), time_index=time_index, link_id=link_id
    )


def desk_config(**overrides) -> ExperimentConfig:
    """Small, fast experiment config used throughout the unit tests."""
    kwargs = dict(
        m_subcarriers=8,
        snr_db=20.0,
        attack_intensity=0.5,
        rng_seed=0,
        **DESK_PRESET,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
