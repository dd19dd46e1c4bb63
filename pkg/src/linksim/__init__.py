"""linksim: deterministic link-level simulator for a highly reliable,
ultra-low-latency short-range wireless module.

Subpackages and modules map to the subsystems of the simulated device:
``profiles`` (QoS contracts and admission), ``baseband`` (single-carrier
transceivers with time-domain and frequency-domain equalization),
``channel`` (multipath + directive circularly polarized antenna model),
``mux`` (redundant dual-modem multiplexer), ``ranging`` (two-way ToF and
radar-style echo processing) and ``harness`` (Monte Carlo orchestration,
latency budgets, CSV reporting and the ``sim`` CLI).
"""

__version__ = "0.1.0"

from . import baseband, channel, harness, mux, profiles, ranging  # noqa: F401
from .errors import (AmbiguousVelocityError, CapacityError, ConfigError,
                     DegenerateChannelError, MeasurementError, NoTargetError,
                     SyncError)

__all__ = [
    "AmbiguousVelocityError", "CapacityError", "ConfigError",
    "DegenerateChannelError", "MeasurementError", "NoTargetError",
    "SyncError", "__version__", "baseband", "channel", "harness", "mux",
    "profiles", "ranging",
]
