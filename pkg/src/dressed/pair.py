"""Two identical oscillators with a bilinear position coupling (hbar = 1).

H = (p1^2 + p2^2)/2m + (m Omega0^2/2)(x1^2 + x2^2) - g m Omega0^2 x1 x2.

The +/- normal modes have frequencies Omega0 sqrt(1 -/+ g), so everything
about the ground state is elementary; |g| >= 1 makes the symmetric mode
unstable.  This is the warm-up for the continuum problem and doubles as a
closed-form anchor for the finite-mode oracle: one bath mode at Omega0
with coupling -g Omega0 reproduces the same stiffness matrix.

Note the contrast with the charge-field model: here positive g means an
attractive x1 x2 term, so positions correlate and momenta anticorrelate;
the minimally coupled charge picks up the opposite position-correlation
sign (its interaction enters with the opposite sign convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError, InstabilityError


@dataclass(frozen=True)
class PairParams:
    m: float
    omega0: float
    g: float

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise ConfigError(f"mass must be positive, got {self.m}")
        if not (self.omega0 > 0.0 and math.isfinite(self.omega0)):
            raise ConfigError(f"omega0 must be positive, got {self.omega0}")
        if not math.isfinite(self.g):
            raise ConfigError("coupling g must be finite")


class PairCorrelations(NamedTuple):
    xx: float
    pp: float
    xp: float
    px: float


def _mode_roots(p: PairParams) -> tuple[float, float]:
    """(sqrt(1-g), sqrt(1+g)); the instability gate for every ground-state
    quantity lives here."""
    if abs(p.g) >= 1.0:
        raise InstabilityError(p.g)
    return math.sqrt(1.0 - p.g), math.sqrt(1.0 + p.g)


def pair_ground_energy(p: PairParams) -> float:
    """Ground energy; at most Omega0, with equality only when uncoupled."""
    rm, rp = _mode_roots(p)
    return 0.5 * p.omega0 * (rm + rp)


def pair_single_oscillator_energy(p: PairParams) -> float:
    """<H_1> in the coupled ground state: exceeds the bare Omega0/2 even
    though the total ground energy goes down."""
    rm, rp = _mode_roots(p)
    return 0.125 * p.omega0 * (rm + rp + 1.0 / rm + 1.0 / rp)


def pair_correlations(p: PairParams) -> PairCorrelations:
    """Cross-oscillator second moments <x1 x2>, <p1 p2>, <x1 p2>, <p1 x2>."""
    rm, rp = _mode_roots(p)
    xx = (1.0 / rm - 1.0 / rp) / (4.0 * p.m * p.omega0)
    pp = 0.25 * p.m * p.omega0 * (rm - rp)
    return PairCorrelations(xx=xx, pp=pp, xp=0.0, px=0.0)


def as_single_mode(p: PairParams):
    """The same system written as atom + one bath mode for the finite-mode
    oracle (mass-scaled coordinates, so only m = 1 maps verbatim)."""
    import numpy as np

    from .model import ModelParams
    from .oracle import DiscretizedModel

    if p.m != 1.0:
        raise ConfigError("the oracle works in mass-scaled coordinates; use m=1")
    params = ModelParams(omega0=p.omega0, coupling_scale=0.0)
    return DiscretizedModel(
        params=params,
        omegas=np.array([p.omega0]),
        weights=np.array([1.0]),
        couplings=np.array([-p.g * p.omega0]),
        rule="manual",
    )
