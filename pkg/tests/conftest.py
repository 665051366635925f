import pytest

from cvkeyrate import BlockParams, ChannelParams, Detection, Scenario


@pytest.fixture
def fig_channel():
    """Reference channel: 7 dB thermal-loss link with trusted detector."""
    return ChannelParams.from_db(7.0, 0.01, 0.6, 0.1, 30.0)


@pytest.fixture
def fig_block_homodyne():
    return BlockParams.split(10_000_000, 1_000_000, adc_bits=7)


@pytest.fixture
def fig_block_heterodyne():
    return BlockParams.split(10_000_000, 1_000_000, adc_bits=14)


@pytest.fixture
def homodyne_scenario():
    return Scenario(detection=Detection.HOMODYNE)


@pytest.fixture
def heterodyne_scenario():
    return Scenario(detection=Detection.HETERODYNE)
