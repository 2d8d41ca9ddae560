"""Exception hierarchy.

Guard violations (critical inclination, eccentricity floor, nonpositive
energy radicand) share a base class so front ends can map them onto a single
exit status.
"""


class DomainError(ValueError):
    """Argument outside the domain of an element chart or formula."""


class GuardViolation(DomainError):
    """A configured numerical guard refused the evaluation."""

    guard = "guard"


class CriticalInclinationError(GuardViolation):
    guard = "critical-inclination"


class EccentricityFloorError(GuardViolation):
    guard = "eccentricity-floor"


class InvalidEnergyError(GuardViolation):
    guard = "calibration-energy"


class TableDenominatorError(GuardViolation):
    guard = "table-denominator"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class IntegrationError(RuntimeError):
    """The reference integrator could not reach the requested accuracy."""
