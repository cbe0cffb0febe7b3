"""Max-min energy-efficiency design for RIS-aided MISO broadcast channels.

The package optimizes base-station beamformers and the RIS scattering
matrix by alternating optimization, with majorization-minimization rate
bounds and a generalized Dinkelbach iteration for the beamformer block.
"""

__version__ = "0.1.0"

from .config import Architecture, ConfigError, Scenario, derived_static_power, load_scenario
from .channel import ChannelSet, draw_channels, effective_channel
from .metrics import EEReport, evaluate
from .ris import RisState, certify, gp_slack, incident_covariance
from .ao import AoState, AoStatus, ao_run, initialize, lpd_repair

__all__ = [
    "__version__",
    "Architecture", "ConfigError", "Scenario", "derived_static_power", "load_scenario",
    "ChannelSet", "draw_channels", "effective_channel",
    "EEReport", "evaluate",
    "RisState", "certify", "gp_slack", "incident_covariance",
    "AoState", "AoStatus", "ao_run", "initialize", "lpd_repair",
]
