"""Model parameters, the coupling function, and derived frequency scales.

A single harmonic oscillator of bare frequency omega0 sits in a continuum of
bosonic modes with coupling density

    V^2(omega) = scale * omega^3 * exp(-omega/omega_c),

where scale = A (dimensionless) in reduced units or C/omega0 (C in seconds)
in physical SI units.  Everything downstream is expressed through V^2 and the
two derived frequencies: the threshold  omega_T = Int V^2/omega d omega  and
the renormalized oscillation frequency  sqrt(omega0*(omega0 - omega_T)).

All numerical work happens in reduced units (hbar = 1, frequencies measured
in units of omega_c); physical-mode parameters are converted on entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _const

from .errors import ConfigError, ThresholdError, UnitsModeError

REDUCED = "reduced"
PHYSICAL = "physical"


def electron_coupling_time() -> float:
    """The coupling constant C = e^2/(3 pi^2 eps0 c^3 m) for an electron [s]."""
    e = _const.elementary_charge
    return e * e / (3.0 * math.pi**2 * _const.epsilon_0 * _const.c**3 * _const.m_e)


@dataclass(frozen=True)
class ModelParams:
    """Immutable model parameters.

    omega0, omega_c are angular frequencies (rad/s in physical mode,
    dimensionless multiples of the base unit in reduced mode).
    coupling_scale is A (dimensionless, reduced) or C in seconds (physical).
    """

    omega0: float
    coupling_scale: float
    omega_c: float = 1.0
    units_mode: str = REDUCED

    def __post_init__(self):
        if self.units_mode not in (REDUCED, PHYSICAL):
            raise ConfigError(f"unknown units_mode {self.units_mode!r}")
        if not (self.omega0 > 0.0):
            raise ConfigError(f"omega0 must be positive, got {self.omega0!r}")
        if not (self.omega_c > 0.0):
            raise ConfigError(f"omega_c must be positive, got {self.omega_c!r}")
        if not (self.coupling_scale >= 0.0):
            raise ConfigError(
                f"coupling_scale must be non-negative, got {self.coupling_scale!r}"
            )

    @property
    def reduced_amplitude(self) -> float:
        """The dimensionless amplitude A with V^2 = A omega^3 e^{-omega/omega_c}.

        In physical mode this is the amplitude of the equivalent reduced model
        with base frequency unit omega_c: A = C * omega_c^2 / omega0.
        """
        if self.units_mode == REDUCED:
            return self.coupling_scale
        return self.coupling_scale * self.omega_c**2 / self.omega0

    def to_reduced(self) -> "ModelParams":
        """Equivalent reduced-units parameters (base frequency unit omega_c)."""
        if self.units_mode == REDUCED:
            return self
        return ModelParams(
            omega0=self.omega0 / self.omega_c,
            coupling_scale=self.reduced_amplitude,
            omega_c=1.0,
            units_mode=REDUCED,
        )

    @property
    def frequency_scale(self) -> float:
        """Multiply reduced frequencies by this to recover the caller's units."""
        return self.omega_c if self.units_mode == PHYSICAL else 1.0


@dataclass(frozen=True)
class DerivedFrequencies:
    omega_t: float
    omega0_renorm: float
    figure_unit: float


def coupling_v2(params: ModelParams, omega):
    """Squared coupling density V^2(omega); accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("omega must be non-negative")
    if params.units_mode == REDUCED:
        scale = params.coupling_scale
    else:
        scale = params.coupling_scale / params.omega0
    out = scale * w**3 * np.exp(-w / params.omega_c)
    return float(out) if np.isscalar(omega) else out


def coupling_v(params: ModelParams, omega):
    """V(omega) = sqrt(V^2(omega))."""
    out = np.sqrt(coupling_v2(params, omega))
    return float(out) if np.isscalar(omega) else out


def threshold_frequency(params: ModelParams, method: str = "analytic") -> float:
    """omega_T = Int_0^inf V^2(omega)/omega d omega = 2 * scale * omega_c^3.

    method="quadrature" evaluates the integral numerically instead of using
    the closed form (the two must agree to 1e-10 relative).
    """
    if method == "analytic":
        if params.units_mode == REDUCED:
            scale = params.coupling_scale
        else:
            scale = params.coupling_scale / params.omega0
        return 2.0 * scale * params.omega_c**3
    if method == "quadrature":
        from .quadrature import QuadratureConfig, integrate_semi_infinite

        if params.units_mode == REDUCED:
            scale = params.coupling_scale
        else:
            scale = params.coupling_scale / params.omega0
        cfg = QuadratureConfig(rel_tol=1e-12, decay_scale=params.omega_c)
        value, _ = integrate_semi_infinite(
            lambda w: scale * w**2 * np.exp(-w / params.omega_c), cfg
        )
        return value
    raise ConfigError(f"unknown threshold method {method!r}")


def renormalized_frequency(params: ModelParams) -> float:
    """sqrt(omega0*(omega0 - omega_T)); requires omega0 > omega_T."""
    omega_t = threshold_frequency(params)
    if params.omega0 <= omega_t:
        raise ThresholdError(params.omega0, omega_t)
    return math.sqrt(params.omega0 * (params.omega0 - omega_t))


def figure_frequency_unit(params: ModelParams) -> float:
    """The frequency unit Lambda = (pi/2) * scale * omega0 * omega_c^2.

    scale*omega0 is C (physical) or A*omega0 (reduced), so in physical units
    Lambda = e^2 omega_c^2 / (6 pi eps0 c^3 m) for the electron constant.
    """
    if params.units_mode == REDUCED:
        c_like = params.coupling_scale * params.omega0
    else:
        c_like = params.coupling_scale
    return 0.5 * math.pi * c_like * params.omega_c**2


def derived_frequencies(params: ModelParams) -> DerivedFrequencies:
    return DerivedFrequencies(
        omega_t=threshold_frequency(params),
        omega0_renorm=renormalized_frequency(params),
        figure_unit=figure_frequency_unit(params),
    )


def omega_in_figure_units(params: ModelParams, omega):
    return np.asarray(omega, dtype=float) / figure_frequency_unit(params)


def dipole_validity(params: ModelParams, threshold: float = 1e-3):
    """Check hbar*omega0 << 8 pi^2 m c^2 for an electron (physical mode only).

    Returns (ratio, ok) with ok = ratio < threshold.
    """
    if params.units_mode != PHYSICAL:
        raise UnitsModeError(
            "dipole validity is a statement about SI scales; "
            "construct the params in physical units_mode"
        )
    ratio = (_const.hbar * params.omega0) / (
        8.0 * math.pi**2 * _const.m_e * _const.c**2
    )
    return ratio, ratio < threshold


def physical_coupling_prefactor(e: float = _const.elementary_charge,
                                m: float = _const.m_e,
                                eps0: float = _const.epsilon_0,
                                c: float = _const.c,
                                hbar: float = _const.hbar,
                                omega0: float = 1.0):
    """The two prefactor routes for the interaction amplitude.

    Returns (hamiltonian_prefactor, field_prefactor) where

      hamiltonian_prefactor = sqrt(hbar^2 e^2 / (12 pi^2 eps0 c^3 m omega0))
      field_prefactor       = sqrt(hbar / (2 eps0 c^3)) / (sqrt(3) pi)

    and the consistency identity
      hamiltonian_prefactor == e * sqrt(hbar/(2 m omega0)) * field_prefactor
    holds algebraically (both describe the same coupling: the second route is
    dipole moment times vacuum field amplitude).
    """
    for name, val in (("e", e), ("m", m), ("eps0", eps0), ("c", c),
                      ("hbar", hbar), ("omega0", omega0)):
        if not (val > 0.0):
            raise ValueError(f"{name} must be positive, got {val!r}")
    ham = math.sqrt(hbar**2 * e**2 / (12.0 * math.pi**2 * eps0 * c**3 * m * omega0))
    field = math.sqrt(hbar / (2.0 * eps0 * c**3)) / (math.sqrt(3.0) * math.pi)
    return ham, field


def cutoff_bound_frequency(params: ModelParams) -> float:
    """The cutoff value at which omega_T = omega0: (omega0^2/(2C))^(1/3) physical,
    (omega0/(2A))^(1/3) reduced.  omega_T < omega0 iff omega_c below this."""
    if params.units_mode == REDUCED:
        if params.coupling_scale == 0.0:
            return math.inf
        return (params.omega0 / (2.0 * params.coupling_scale)) ** (1.0 / 3.0)
    if params.coupling_scale == 0.0:
        return math.inf
    return (params.omega0**2 / (2.0 * params.coupling_scale)) ** (1.0 / 3.0)
