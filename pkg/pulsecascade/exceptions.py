"""
Exceptions raised by the pulsecascade library.
"""


class SimulationError(Exception):
    """Base pulsecascade error."""


class InvalidDimensionError(SimulationError, ValueError):
    """Raised when an operator or space dimension is invalid or mismatched."""


class InvalidArgumentError(SimulationError, ValueError):
    """Raised when an argument violates the precondition of an operation."""


class OutOfRangeError(SimulationError, ValueError):
    """Raised when a time lies outside the span of the time grid."""


class TruncatedModeError(SimulationError):
    """
    Raised when a mode function does not fit its time grid.

    This error could indicate:
        * The analytic pulse has more than a negligible mass outside the grid.
        * A filtered pulse spilled into the zero padding of the Fourier transform.
    """


class InsufficientTruncationError(SimulationError):
    """Raised when a Fock truncation cannot hold the requested state."""


class IntegrationError(SimulationError):
    """Base error for failures of the master equation integration."""


class IntegrationDivergedError(IntegrationError):
    """
    Raised when the trace of the density matrix drifts beyond tolerance.

    A smaller step (or tighter tolerances) usually cures it.
    """


class NumericalFailureError(IntegrationError):
    """Raised when the integration produces NaN or infinite values."""


class DegeneratePostselectionError(SimulationError):
    """Raised when a post-selected outcome has (numerically) zero probability."""
