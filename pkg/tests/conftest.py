import numpy as np
import pytest

from irsbc import (
    BISTATIC,
    ChannelSet,
    IrsGeometry,
    PathLossModel,
    Position2D,
    SystemLayout,
)

PAPER_WAVELENGTH = 299792458.0 / 915e6
SNR_TARGET = 10.0**0.8  # 8 dB
NOISE_POWER = 1e-14  # -110 dBm


def toy_channels(n, l, rng, amp=1.0):
    """Unit-amplitude random-phase channel set at O(1) scale."""

    def u(shape):
        return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, shape))

    return ChannelSet(
        ce_tag=amp * u(l),
        ce_irs=amp * u((n, l)),
        ce_reader=amp * u(l),
        tag_irs=amp * u(n),
        reader_irs=amp * u(n),
        tag_reader=complex(amp * u(())),
        architecture=BISTATIC,
    )


def bistatic_layout(tag_xy=(30.0, 0.0), n_elements=16, l_antennas=4):
    return SystemLayout(
        ce_position=Position2D(0.0, 0.0),
        reader_position=Position2D(100.0, 0.0),
        tag_position=Position2D(*tag_xy),
        irs=IrsGeometry(
            center=Position2D(20.0, 20.0),
            orientation=(0.0, -1.0),
            element_count=n_elements,
            element_width=PAPER_WAVELENGTH,
        ),
        wavelength=PAPER_WAVELENGTH,
        ce_antennas=l_antennas,
    )


def monostatic_layout(tag_xy=(20.0, 0.0), n_elements=16):
    return SystemLayout(
        ce_position=Position2D(0.0, 0.0),
        reader_position=Position2D(0.0, 0.0),
        tag_position=Position2D(*tag_xy),
        irs=IrsGeometry(
            center=Position2D(40.0, 0.0),
            orientation=(-1.0, 0.0),
            element_count=n_elements,
            element_width=PAPER_WAVELENGTH,
        ),
        wavelength=PAPER_WAVELENGTH,
        ce_antennas=1,
        architecture="monostatic",
    )


@pytest.fixture
def model():
    return PathLossModel()
