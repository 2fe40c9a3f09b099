"""Exception hierarchy shared by every SPIKE subpackage."""
from typing import Any, Optional


class SpikeError(Exception):
    """Base class for all solver and harness failures."""


class DegenerateSpacingError(SpikeError):
    """Two knots coincide or a gap fell below the admissible minimum."""


class OrderingViolatedError(SpikeError):
    """Knots crossed each other inside a time step."""


class InadmissibleStateError(SpikeError):
    """A state left the admissible set of the flux model (e.g. negative pressure)."""


class LinearSolveError(SpikeError):
    """The periodic block system could not be solved reliably."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class UnrecoverableStiffnessError(SpikeError):
    """The step size underflowed while trying to advance the state."""

    def __init__(self, message: str, last_state: Any, time: float, dt: float):
        super().__init__(f"{message} at t={time:.6g} (dt={dt:.3e})")
        self.last_state = last_state
        self.time = time
        self.dt = dt


class NoShockDetectedError(SpikeError):
    """No snapshot in the requested window carries a developed shock."""


class TimeMismatchError(SpikeError):
    """Two objects that must describe the same instant do not."""


class BlowupError(SpikeError):
    """A reduced-model amplitude exceeded the blowup threshold."""

    def __init__(self, message: str, time: float, last_state: Optional[Any] = None):
        super().__init__(f"{message} at t={time:.10g}")
        self.time = time
        self.last_state = last_state


class WaveSpeedOverflowError(SpikeError):
    """The maximal characteristic speed is not finite."""


class ConfigError(SpikeError):
    """Experiment configuration failed validation."""
