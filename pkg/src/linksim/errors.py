"""Exception types shared across the simulator."""


class SyncError(RuntimeError):
    """Preamble acquisition failed (correlation peak below threshold)."""


class DegenerateChannelError(ValueError):
    """Channel frequency response is zero on every bin; cannot equalize."""


class CapacityError(ValueError):
    """Payload does not fit the configured frame geometry."""


class MeasurementError(ValueError):
    """A ranging exchange produced a physically invalid measurement."""


class NoTargetError(RuntimeError):
    """Echo correlation peak below the detection threshold."""


class AmbiguousVelocityError(ValueError):
    """Per-block phase progression at or beyond the aliasing limit."""


class ConfigError(ValueError):
    """Simulation configuration is invalid; message names the field."""
