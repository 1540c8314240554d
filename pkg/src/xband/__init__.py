"""Cross-band interference toolkit for asynchronous OFDMA links.

Closed-form interference models, a waveform-level Monte Carlo engine,
synchronization primitives and three interference-mitigation schemes
(frequency guardband, intra-symbol cancellation, cross-symbol cancellation).
"""

from xband.ofdm import (
    OfdmConfig,
    SubcarrierSet,
    LinkSpec,
    FreqSymbol,
    TimeSymbol,
    map_bits,
    ofdm_modulate,
    ofdm_demodulate,
)
from xband.analytic import PowerSpectrum, CirProfile
from xband.channel import (
    MismatchModel,
    FreqOffsetModel,
    ChannelModel,
    ScenarioSpec,
    ReceivedFrame,
    realize_trial,
    dtft_probe,
    measure_cbi,
)

__version__ = "0.1.0"

__all__ = [
    "OfdmConfig",
    "SubcarrierSet",
    "LinkSpec",
    "FreqSymbol",
    "TimeSymbol",
    "map_bits",
    "ofdm_modulate",
    "ofdm_demodulate",
    "PowerSpectrum",
    "CirProfile",
    "MismatchModel",
    "FreqOffsetModel",
    "ChannelModel",
    "ScenarioSpec",
    "ReceivedFrame",
    "realize_trial",
    "dtft_probe",
    "measure_cbi",
]
