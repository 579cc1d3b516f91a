"""Exception types shared across the simulator.

Every error that reaches the CLI maps onto its exit-code contract:
validation/geometry/parse problems exit 2, a diverged integration exits 3.
"""

from __future__ import annotations


class FlapsimError(Exception):
    """Base class for all flapsim errors."""


class ValidationError(FlapsimError):
    """A parameter, configuration value, or argument violates its invariant."""


class GeometryError(ValidationError):
    """A linkage configuration is unreachable (arc argument out of range)."""


class DeadCenterOverrunError(GeometryError):
    """Requested slider position lies beyond a crank dead center."""


class UnreachableDisplacementError(GeometryError):
    """No wing angle produces the requested slider displacement."""


class ModelRangeError(ValidationError):
    """Reynolds number below the validity floor of the fitted coefficient laws."""

    def __init__(self, message: str, coefficient: str, value: float):
        super().__init__(message)
        self.coefficient = coefficient
        self.value = value


class InsufficientDataError(FlapsimError):
    """A series is too short for the requested analysis."""


class SimulationDivergedError(FlapsimError):
    """The integrator left the reachable linkage range or produced non-finite state.

    Carries the last valid state so callers can report where the run died.
    """

    def __init__(self, message: str, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class PipelineStageError(FlapsimError):
    """A stage of the wing-abdomen coupling pipeline failed."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class ParseError(FlapsimError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OrderingError(ParseError):
    """Explicit time column is not non-decreasing."""


class DegeneratePoseError(FlapsimError):
    """Marker geometry on a frame is degenerate (coincident centroids)."""


class EmptyFlightError(FlapsimError):
    """A flight record contains no airborne pose frames."""
