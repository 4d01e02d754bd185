"""Exception hierarchy for the dressed-oscillator package.

Every failure the library can diagnose maps onto one of these classes so the
CLI can translate it into a stable exit code: configuration problems exit
with 1, physics-threshold violations with 2, numerical failures with 3.
"""

from __future__ import annotations


class DressedError(Exception):
    """Base class for all package errors."""


class ConfigError(DressedError):
    """Malformed or inconsistent configuration input (CLI exit code 1)."""


class UnitsModeError(ConfigError):
    """Operation requested in a units mode that cannot support it."""


class ThresholdError(DressedError):
    """Bare frequency at or below the instability threshold (CLI exit code 2).

    Carries the offending frequencies so callers can report how far past
    the edge the parameters sit.
    """

    def __init__(self, omega0: float, omega_t: float, message: str | None = None):
        self.omega0 = omega0
        self.omega_t = omega_t
        if message is None:
            message = (
                f"bound state unstable: omega0={omega0:.6g} does not exceed "
                f"the threshold frequency omega_T={omega_t:.6g}"
            )
        super().__init__(message)


class InstabilityError(ThresholdError):
    """Coupled-pair coupling |g| >= 1 makes the relative mode unstable."""

    def __init__(self, g: float):
        self.g = g
        DressedError.__init__(
            self, f"pair coupling |g|={abs(g):.6g} >= 1: ground state does not exist"
        )


class NumericalError(DressedError):
    """Base for numerical failures (CLI exit code 3)."""


class QuadratureError(NumericalError):
    """Requested tolerance not reached; carries the best value and estimate."""

    def __init__(self, message: str, value: float | complex | None = None,
                 error_estimate: float | None = None):
        self.value = value
        self.error_estimate = error_estimate
        super().__init__(message)


class GridRefinementError(NumericalError):
    """Emission-grid refinement stalled above the normalization target."""

    def __init__(self, message: str, defect: float | None = None):
        self.defect = defect
        super().__init__(message)


class DifferentiationError(NumericalError):
    """Numerical derivative failed its step-halving consistency check."""


class ChiRangeError(NumericalError):
    """Characteristic-functional exponent too large to exponentiate safely."""

    def __init__(self, exponent: float):
        self.exponent = exponent
        super().__init__(
            f"characteristic functional exponent {exponent:.6g} exceeds the "
            f"safe range (|Re| <= 700); rescale the arguments"
        )
