import numpy as np
import pytest

from cogm2m import (FBMC, OFDM, UFOFDM, WaveformSpec, generate_channels,
                    generate_spectrum, psd_profile)

DELTA_F = 312_500.0


@pytest.fixture(scope="session")
def ofdm_psd():
    return psd_profile(WaveformSpec(kind=OFDM, subband_width_hz=DELTA_F))


@pytest.fixture(scope="session")
def fbmc_psd():
    return psd_profile(WaveformSpec(kind=FBMC, subband_width_hz=DELTA_F))


@pytest.fixture(scope="session")
def uf40_psd():
    return psd_profile(WaveformSpec(kind=UFOFDM, subband_width_hz=DELTA_F,
                                    alpha_db=40.0, filter_len=73))


@pytest.fixture(scope="session")
def uf60_psd():
    return psd_profile(WaveformSpec(kind=UFOFDM, subband_width_hz=DELTA_F,
                                    alpha_db=60.0, filter_len=73))


@pytest.fixture()
def small_world():
    """A 12-subband scenario with 2 PU bands and 4 SMs' channels."""
    scenario = generate_spectrum(5, 12, 2, (5, 7), delta_f_hz=DELTA_F,
                                 i_th_watts=1e-4)
    channels = generate_channels(6, scenario, 4)
    return scenario, channels
