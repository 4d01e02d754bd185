"""Ground-state expectation values of the dressed oscillator.

Every atomic moment is a single integral against the weight pi(omega); the
field-side quantities (photon spectral density, two-mode coherences, and
atom-field correlations) each add one smooth or principal-value kernel on
top of the same measure.  Double integrals are evaluated as one shared
tabulation of the pi-side integral followed by an outer quadrature, never
as a nested O(n^2) loop over adaptive calls.

Conventions: hbar = 1; atom_energy is omega0*(mean_excitation + 1/2) in the
frequency units of the supplied parameters.  Position-field and
momentum-field products use Hermitian quadrature combinations, so all
reported correlations are real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fano import PiDistribution, pi_quadrature, pi_value, w1_function
from .model import ModelParams, coupling_v, coupling_v2
from .quadrature import PanelGrid, QuadratureConfig, build_panel_grid


@dataclass(frozen=True)
class MomentSet:
    avg_omega: float
    avg_inv_omega: float
    var_x_quadrature: float
    var_p_quadrature: float
    atom_energy: float
    mean_excitation: float
    a_squared: float

    @property
    def uncertainty_product(self) -> float:
        return math.sqrt(self.var_x_quadrature * self.var_p_quadrature)


@dataclass(frozen=True, eq=False)
class PhotonSpectrum:
    grid: np.ndarray
    density: np.ndarray
    spectrum: np.ndarray
    total_number: float
    total_energy: float
    omega_c: float


@dataclass(frozen=True, eq=False)
class CorrelationSet:
    grid: np.ndarray
    x_b_plus: np.ndarray
    p_b_minus: np.ndarray
    cross_zero_1: np.ndarray
    cross_zero_2: np.ndarray
    z_e: float
    dz_de: float
    coherence_grid: np.ndarray
    coherence_bb: np.ndarray
    cross_ab: np.ndarray


def _check_normalized(pi: PiDistribution):
    if abs(pi.norm - 1.0) > 1e-6:
        raise ConfigError(
            f"pi measure is not normalized (defect {abs(pi.norm - 1.0):.3e})"
        )


def _uncoupled_moments(params: ModelParams) -> MomentSet:
    w0 = params.omega0
    return MomentSet(
        avg_omega=w0,
        avg_inv_omega=1.0 / w0,
        var_x_quadrature=1.0,
        var_p_quadrature=1.0,
        atom_energy=0.5 * w0,
        mean_excitation=0.0,
        a_squared=0.0,
    )


def compute_moments(params: ModelParams,
                    pi: PiDistribution | None = None) -> MomentSet:
    """All single-mode atomic moments from the pi measure.

    The two quadrature variances are omega0*<<1/omega>> and <<omega>>/omega0;
    everything else is linear algebra on those two numbers.
    """
    if params.coupling_scale == 0.0:
        return _uncoupled_moments(params)
    if pi is None:
        pi = pi_quadrature(params)
    _check_normalized(pi)
    w0 = params.omega0
    avg_omega = float(pi.integrate(pi.values * pi.grid))
    avg_inv = float(pi.integrate(pi.values / pi.grid))
    var_x = w0 * avg_inv
    var_p = avg_omega / w0
    mean_exc = 0.25 * (var_x + var_p - 2.0)
    return MomentSet(
        avg_omega=avg_omega,
        avg_inv_omega=avg_inv,
        var_x_quadrature=var_x,
        var_p_quadrature=var_p,
        atom_energy=w0 * (mean_exc + 0.5),
        mean_excitation=mean_exc,
        a_squared=0.25 * (var_x - var_p),
    )


# ---------------------------------------------------------------------------
# kernels against the pi measure
# ---------------------------------------------------------------------------

def _pi_times(pi: PiDistribution, extra: np.ndarray) -> np.ndarray:
    return pi.values * extra


# cap on the pole-by-node kernel block; refined pi grids reach ~2e4 nodes
# and a full outer product at that size is gigabytes
_KERNEL_BLOCK = 4_000_000


def _resolvent_sq(pi: PiDistribution, omegas: np.ndarray) -> np.ndarray:
    """Int pi(w)/((w+omega)^2 w) dw for a batch of omegas."""
    w = pi.grid
    kern = pi.values / w
    out = np.empty_like(omegas)
    step = max(1, _KERNEL_BLOCK // w.size)
    for start in range(0, omegas.size, step):
        block = omegas[start:start + step, None]
        out[start:start + step] = (kern / (block + w) ** 2) @ pi.weights
    return out


def _resolvent(pi: PiDistribution, omegas: np.ndarray,
               inv_weight: bool) -> np.ndarray:
    """Int pi(w)/((w+omega) w^k) dw with k = 1 (inv_weight) or 0."""
    w = pi.grid
    kern = pi.values / w if inv_weight else pi.values
    out = np.empty_like(omegas)
    step = max(1, _KERNEL_BLOCK // w.size)
    for start in range(0, omegas.size, step):
        block = omegas[start:start + step, None]
        out[start:start + step] = (kern / (block + w)) @ pi.weights
    return out


def _pv_on_pi(pi: PiDistribution, smooth_of, poles: np.ndarray) -> np.ndarray:
    """P Int pi(w) s(w) / (pole - w) dw on the pi measure for many poles.

    smooth_of(w) must be evaluable anywhere (it is sampled at the poles and
    at finite-difference stencils around them, via pi_value for the pi
    factor).  The neglected [0, domain_lo] piece is O(domain_lo^4).
    """
    f_nodes = pi.values * np.asarray(smooth_of(pi.grid))
    params = pi.params
    width = max(pi.peak_width, 1e-14 * pi.peak_omega)

    def f_at(x):
        return pi_value(params, x) * np.asarray(smooth_of(x))

    near_peak = np.abs(poles - pi.peak_omega) < 50.0 * width
    steps = np.where(near_peak, width / 20.0, 1e-5 * np.maximum(poles, params.omega_c))
    f_pole = f_at(poles)
    slopes = (f_at(poles + steps) - f_at(poles - steps)) / (2.0 * steps)
    lo, hi = pi.domain
    d = poles[:, None] - pi.grid[None, :]
    guard = 1e-9 * width + 1e-13 * pi.peak_omega
    near = np.abs(d) < guard
    quot = np.where(near, -slopes[:, None],
                    (f_nodes[None, :] - f_pole[:, None]) / np.where(near, 1.0, d))
    log_term = f_pole * np.log((poles - lo) / (hi - poles))
    return quot @ pi.weights + log_term


# ---------------------------------------------------------------------------
# photon spectrum
# ---------------------------------------------------------------------------

def photon_spectral_density(params: ModelParams, pi: PiDistribution | None,
                            grid) -> PhotonSpectrum:
    """N(omega) = (V^2 omega0 / 4) Int pi(w)/((w+omega)^2 w) dw and S = omega N.

    Totals Int N and Int omega N run over the coupling-decay panel rule and
    are reported together with omega_c (they are cutoff-dependent).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid < 0.0):
        raise ConfigError("spectrum grid must be a 1-D array of non-negative frequencies")
    if params.coupling_scale == 0.0:
        zeros = np.zeros_like(grid)
        return PhotonSpectrum(grid, zeros, zeros.copy(), 0.0, 0.0, params.omega_c)
    if pi is None:
        pi = pi_quadrature(params)
    _check_normalized(pi)

    def density_on(omegas: np.ndarray) -> np.ndarray:
        j = _resolvent_sq(pi, omegas)
        return coupling_v2(params, omegas) * params.omega0 * 0.25 * j

    density = density_on(grid)
    from .fano import _coupling_panel_grid

    cg, _ = _coupling_panel_grid(params)
    n_nodes = density_on(cg.nodes)
    total_number = float(n_nodes @ cg.weights)
    total_energy = float((cg.nodes * n_nodes) @ cg.weights)
    return PhotonSpectrum(
        grid=grid, density=density, spectrum=grid * density,
        total_number=total_number, total_energy=total_energy,
        omega_c=params.omega_c,
    )


# ---------------------------------------------------------------------------
# coherences and correlations
# ---------------------------------------------------------------------------

def field_coherence(params: ModelParams, omega: float, omega_prime: float,
                    pi: PiDistribution | None = None) -> complex:
    """<b(omega) b(omega')>: anomalous two-photon coherence (real, symmetric)."""
    if params.coupling_scale == 0.0:
        return 0.0 + 0.0j
    if not (omega > 0.0 and omega_prime > 0.0):
        raise ConfigError("coherence frequencies must be positive")
    if pi is None:
        pi = pi_quadrature(params)
    _check_normalized(pi)
    w0 = params.omega0
    nu = omega_prime

    pv = _pv_on_pi(pi, lambda w: 1.0 / (np.asarray(w) * (np.asarray(w) + nu)),
                   np.array([omega]))[0]
    w1 = w1_function(params, np.array([omega]))[0]
    v2 = coupling_v2(params, omega)
    y_pi = (w1 / v2) * pi_value(params, np.array([omega]))[0]
    delta_part = y_pi / (omega * (omega + nu))
    pref = -coupling_v(params, omega) * coupling_v(params, nu) * w0 * 0.25
    # P Int .../(w - omega) = -P Int .../(omega - w)
    return complex(pref * (-pv + delta_part))


def cross_moment_ab(params: ModelParams, nu: float,
                    pi: PiDistribution | None = None) -> complex:
    """<a b(nu)>: atom-field annihilation cross moment (real, negative)."""
    if params.coupling_scale == 0.0:
        return 0.0 + 0.0j
    if not (nu > 0.0):
        raise ConfigError("nu must be positive")
    if pi is None:
        pi = pi_quadrature(params)
    _check_normalized(pi)
    w0 = params.omega0
    vnu = coupling_v(params, nu)

    part2 = vnu * 0.25 * float(
        pi.integrate(pi.values * (pi.grid + w0) / (pi.grid * (pi.grid + nu)))
    )
    pv = _pv_on_pi(
        pi, lambda w: (np.asarray(w) - w0) / (4.0 * np.asarray(w)),
        np.array([nu]),
    )[0]
    w1 = w1_function(params, np.array([nu]))[0]
    v2 = coupling_v2(params, nu)
    y_delta = (w1 / v2) * pi_value(params, np.array([nu]))[0] \
        * (nu - w0) / (4.0 * nu)
    part1 = vnu * (-pv + y_delta)
    return complex(-0.5 * (part1 + part2))


_HALF_DECAY_CACHE: dict = {}


def _half_decay_grid(params: ModelParams) -> PanelGrid:
    """Panel rule reaching 2x further: for integrands decaying as e^{-w/2wc}."""
    key = (params.omega_c,)
    grid = _HALF_DECAY_CACHE.get(key)
    if grid is None:
        s = 2.0 * params.omega_c
        x_max = QuadratureConfig(decay_scale=s).upper_limit
        edges = list(np.arange(0.0, 8.0 * s, 0.5 * s))
        e = 8.0 * s
        while e < x_max:
            edges.append(e)
            e *= 1.5
        edges.append(x_max)
        grid = build_panel_grid(edges, 16)
        _HALF_DECAY_CACHE[key] = grid
    return grid


def x_b_plus_values(params: ModelParams, omegas,
                    pi: PiDistribution | None = None) -> np.ndarray:
    """<(a+a†)(b(omega)+b†(omega))> = -omega0 V(omega) Int pi(w)/(w(w+omega)) dw."""
    if pi is None:
        pi = pi_quadrature(params)
    omegas = np.asarray(omegas, dtype=float)
    return -params.omega0 * coupling_v(params, omegas) * _resolvent(pi, omegas, True)


def p_b_minus_values(params: ModelParams, omegas,
                     pi: PiDistribution | None = None) -> np.ndarray:
    """<[-i(a-a†)][-i(b(omega)-b†(omega))]> = V(omega) Int pi(w)/(w+omega) dw."""
    if pi is None:
        pi = pi_quadrature(params)
    omegas = np.asarray(omegas, dtype=float)
    return coupling_v(params, omegas) * _resolvent(pi, omegas, False)


def atom_field_correlations(params: ModelParams, pi: PiDistribution | None,
                            grid) -> CorrelationSet:
    """Quadrature-quadrature correlations between the atom and field modes.

    The two mixed combinations vanish identically (the expansion coefficients
    conspire to real kernels); they are reported as exact zeros.  z_e and
    dz_de are the frequency-integrated position-field and velocity-field
    products in reduced-model units (signs and cutoff convergence are
    the physical content; constant prefactors are normalized away).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid <= 0.0):
        raise ConfigError("correlation grid must be positive frequencies")
    if params.coupling_scale == 0.0:
        z = np.zeros_like(grid)
        return CorrelationSet(grid, z, z.copy(), z.copy(), z.copy(), 0.0, 0.0,
                              grid.copy(), np.zeros((len(grid), len(grid))),
                              z.copy().astype(complex))
    if pi is None:
        pi = pi_quadrature(params)
    _check_normalized(pi)
    w0 = params.omega0
    xbp = x_b_plus_values(params, grid, pi)
    pbm = p_b_minus_values(params, grid, pi)
    zeros = np.zeros_like(grid)

    scale = params.reduced_amplitude if params.units_mode == "reduced" \
        else params.coupling_scale / params.omega0
    hgrid = _half_decay_grid(params)
    pos = hgrid.nodes > 0.0
    nodes = hgrid.nodes[pos]
    wts = hgrid.weights[pos]
    z_e = 0.5 * math.sqrt(scale) * float(
        (nodes**1.5 * x_b_plus_values(params, nodes, pi)) @ wts
    )
    dz_de = 0.5 * w0 * math.sqrt(scale) * float(
        (nodes**2.5 * p_b_minus_values(params, nodes, pi)) @ wts
    )

    coh_grid = grid if len(grid) <= 8 else grid[
        np.linspace(0, len(grid) - 1, 8).astype(int)
    ]
    coh = np.empty((len(coh_grid), len(coh_grid)))
    for i, wi in enumerate(coh_grid):
        for j, wj in enumerate(coh_grid):
            if j < i:
                coh[i, j] = coh[j, i]
            else:
                coh[i, j] = field_coherence(params, wi, wj, pi).real
    cross = np.array([cross_moment_ab(params, nu, pi) for nu in grid])
    return CorrelationSet(
        grid=grid, x_b_plus=xbp, p_b_minus=pbm,
        cross_zero_1=zeros, cross_zero_2=zeros.copy(),
        z_e=z_e, dz_de=dz_de,
        coherence_grid=coh_grid, coherence_bb=coh, cross_ab=cross,
    )
