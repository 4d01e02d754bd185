"""Normal-ordered characteristic functional of the dressed ground state.

chi[eta, xi] = <exp(eta a† + Int xi b†) exp(-eta* a - Int xi* b)> closes in
Gaussian form: writing the bare operators through the dressed continuum
turns the expectation into quadratic integrals of two auxiliary functions

    p(nu) = eta beta*(nu) + Int xi(omega) delta*(nu, omega) domega
    q(nu) = eta alpha(nu) + c(nu) P Int xi(omega) V(omega)/(nu-omega) domega
            + xi(nu) W1(nu)/(W1(nu) - i pi V^2(nu))

so ln chi = -Re Int q p dnu - Int |p|^2 dnu, manifestly quadratic in
(eta, xi).  Moments then follow by differentiation: a -> -d/deta*,
a† -> d/deta, b(nu) -> -delta/dxi*(nu), b†(nu) -> delta/dxi(nu), all at
the origin.  This module evaluates chi on a sampled grid and extracts
moments by finite differences, independently of the closed-form moment
integrals elsewhere in the package.

Note the normal-ordered functional of a squeezed vacuum exceeds 1 for
some arguments (here: real eta, since <(a+a†)^2> > 1).  The bound that
every physical state does satisfy is the Weyl-ordered one,
|chi·exp(-|eta|^2/2 - Int|xi|^2/2)| <= 1, exposed as chi_is_physical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ChiRangeError, ConfigError, DifferentiationError
from .fano import pi_quadrature, w1_function
from .model import ModelParams, coupling_v
from .quadrature import PanelGrid, QuadratureConfig, build_panel_grid, gaussian_bump, pv_batch


@dataclass(frozen=True)
class TestFunction:
    """Argument pair of the functional: xi sampled on grid nodes, plus eta."""

    __test__ = False  # keep pytest from collecting this despite the name

    grid: PanelGrid
    xi: np.ndarray
    eta: complex = 0.0

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        if xi.shape != (self.grid.size,):
            raise ConfigError(
                f"xi has {xi.shape} samples for a grid of {self.grid.size} nodes"
            )
        if not (np.all(np.isfinite(xi)) and np.isfinite(self.eta)):
            raise ConfigError("test function must be finite")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", complex(self.eta))

    def scaled(self, s: complex) -> "TestFunction":
        return replace(self, xi=s * self.xi, eta=s * self.eta)


@dataclass(frozen=True)
class PQFunctions:
    grid: PanelGrid
    p: np.ndarray
    q: np.ndarray


def default_grid(params: ModelParams) -> PanelGrid:
    """Evaluation grid resolving the dressed line (alpha, beta are sharply
    peaked there); at zero coupling a plain geometric grid suffices."""
    if params.coupling_scale == 0.0:
        x_max = QuadratureConfig(decay_scale=params.omega_c).upper_limit
        return build_panel_grid(
            np.geomspace(1e-4 * params.omega_c, x_max, 48), 8
        )
    pi = pi_quadrature(params)
    return PanelGrid(pi.grid, pi.weights, pi.domain[0], pi.domain[1])


_COEFF_CACHE: dict = {}


def _coefficients(params: ModelParams, grid: PanelGrid):
    """alpha, beta, c = V/(W1 - i pi V^2), the local (delta-part) coefficient
    W1/(W1 - i pi V^2), and the cached 1/(nu+omega) kernel matrix.

    Test-function independent, so cached per (params, grid): the W1 shift
    integral dominates the cost of a chi evaluation otherwise."""
    nodes = grid.nodes
    key = (params, nodes.tobytes())
    hit = _COEFF_CACHE.get(key)
    if hit is not None:
        return hit
    w0 = params.omega0
    v = coupling_v(params, nodes)
    v2 = v * v
    w1 = w1_function(params, nodes)
    inv_denom = (w1 + 1j * math.pi * v2) / (w1**2 + (math.pi * v2) ** 2)
    c = v * inv_denom
    alpha = (nodes + w0) * c / w0
    beta = alpha * (nodes - w0) / (nodes + w0)
    sum_kernel = 1.0 / (nodes[:, None] + nodes[None, :])
    out = (alpha, beta, c, w1 * inv_denom, v, sum_kernel)
    if len(_COEFF_CACHE) > 8:
        _COEFF_CACHE.clear()
    _COEFF_CACHE[key] = out
    return out


def build_pq(params: ModelParams, tf: TestFunction) -> PQFunctions:
    nodes = tf.grid.nodes
    if params.coupling_scale == 0.0:
        # V = 0 decouples everything: q keeps only the local part (whose
        # coefficient degenerates to 1), p vanishes
        return PQFunctions(tf.grid, np.zeros_like(tf.xi), tf.xi.copy())
    alpha, beta, c, local, v, sum_kernel = _coefficients(params, tf.grid)
    fv = tf.xi * v
    slopes = np.gradient(fv, nodes)
    pv = pv_batch(tf.grid, fv, fv, slopes, nodes, 1e-13 * params.omega_c)
    plus = sum_kernel @ (fv * tf.grid.weights)
    q = tf.eta * alpha + c * pv + local * tf.xi
    p = tf.eta * np.conj(beta) + np.conj(c) * plus
    return PQFunctions(tf.grid, p, q)


def log_chi(params: ModelParams, tf: TestFunction) -> float:
    """ln chi; exactly real (the state is a real Gaussian)."""
    pq = build_pq(params, tf)
    w = tf.grid.weights
    cross = complex((pq.q * pq.p) @ w)
    return -cross.real - float(np.abs(pq.p) ** 2 @ w)


def evaluate_chi(params: ModelParams, tf: TestFunction) -> complex:
    ln = log_chi(params, tf)
    if abs(ln) > 700.0:
        raise ChiRangeError(ln)
    return complex(math.exp(ln))


def chi_is_physical(params: ModelParams, tf: TestFunction,
                    tol: float = 1e-10) -> bool:
    """Weyl-ordered bound: chi * exp(-|eta|^2/2 - Int|xi|^2/2) <= 1."""
    ln = log_chi(params, tf)
    weyl = ln - 0.5 * abs(tf.eta) ** 2 \
        - 0.5 * float(np.abs(tf.xi) ** 2 @ tf.grid.weights)
    return weyl <= tol


_STENCIL_4TH_1 = (np.array([-2.0, -1.0, 1.0, 2.0]),
                  np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
_STENCIL_4TH_2 = (np.array([-2.0, -1.0, 0.0, 1.0, 2.0]),
                  np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)


def _partials(g, h: float):
    """(g_x, g_y, g_xx, g_yy, g_xy) at the origin, 4th order in h except
    the mixed term (2nd order, Richardson handles it upstream)."""
    off1, c1 = _STENCIL_4TH_1
    off2, c2 = _STENCIL_4TH_2
    gx = sum(c * g(o * h, 0.0) for o, c in zip(off1, c1)) / h
    gy = sum(c * g(0.0, o * h) for o, c in zip(off1, c1)) / h
    gxx = sum(c * g(o * h, 0.0) for o, c in zip(off2, c2)) / h**2
    gyy = sum(c * g(0.0, o * h) for o, c in zip(off2, c2)) / h**2
    gxy = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h**2)
    return np.array([gx, gy, gxx, gyy, gxy])


def _richardson_partials(g, h: float, order: int = 4):
    fine = _partials(g, 0.5 * h)
    coarse = _partials(g, h)
    factor = 2.0**order
    est = (factor * fine - coarse) / (factor - 1.0)
    drift = np.max(np.abs(fine - coarse))
    if drift > 1e-4 * max(1.0, float(np.max(np.abs(est)))):
        raise DifferentiationError(
            f"finite-difference estimates unstable: step halving moved "
            f"results by {drift:.3e} at h={h:g}"
        )
    return est


def _normalized_bump(grid: PanelGrid, center: float, width: float) -> np.ndarray:
    vals = gaussian_bump(center, width, 1.0).fn(grid.nodes)
    norm = float(vals @ grid.weights)
    if norm <= 0.0:
        raise DifferentiationError(
            f"bump at {center:g} (width {width:g}) not resolved by the grid"
        )
    return vals / norm


MOMENTS = ("a", "a_dagger", "a_squared", "a_dagger_a", "b_dagger_b")


def moment_by_differentiation(params: ModelParams, moment: str,
                              frequency: float | None = None,
                              grid: PanelGrid | None = None,
                              step: float = 1e-3,
                              bump_width: float | None = None) -> complex:
    """Moments of the interacting ground state from chi alone.

    eta-derivatives use 4th-order central stencils at `step`, Richardson
    extrapolated over a step halving; the b†b density additionally uses
    two bump widths to remove the leading smearing error.
    """
    if moment not in MOMENTS:
        raise ConfigError(f"unknown moment {moment!r}; use one of {MOMENTS}")
    if grid is None:
        grid = default_grid(params)
    zero = np.zeros(grid.size, dtype=complex)

    if moment in ("a", "a_dagger", "a_squared", "a_dagger_a"):
        def g(x, y):
            return evaluate_chi(params, TestFunction(grid, zero, x + 1j * y)).real

        gx, gy, gxx, gyy, gxy = _richardson_partials(g, step)
        if moment == "a":
            return complex(-0.5 * (gx + 1j * gy))
        if moment == "a_dagger":
            return complex(0.5 * (gx - 1j * gy))
        if moment == "a_squared":
            return complex(0.25 * (gxx - gyy) + 0.5j * gxy)
        return complex(-0.25 * (gxx + gyy))

    if frequency is None:
        raise ConfigError("b_dagger_b needs the frequency argument")

    def occupation(width: float) -> float:
        bump = _normalized_bump(grid, frequency, width)

        def g(x, y):
            return evaluate_chi(
                params, TestFunction(grid, (x + 1j * y) * bump, 0.0)
            ).real

        _, _, gxx, gyy, _ = _richardson_partials(g, step)
        return -0.25 * (gxx + gyy)

    if bump_width is None:
        spacing = float(np.median(np.diff(grid.nodes)))
        bump_width = max(0.02 * params.omega_c, 4.0 * spacing)
    coarse = occupation(bump_width)
    fine = occupation(0.5 * bump_width)
    return complex((4.0 * fine - coarse) / 3.0)
