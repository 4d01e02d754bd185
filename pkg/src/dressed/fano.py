"""Diagonalization data for the oscillator-continuum model.

The dressed annihilation operators are linear in (a, a†, b(w), b†(w)) with
coefficients alpha, beta, gamma, delta.  Everything reduces to two real
functions of frequency:

    W1(omega) = Y(omega) V^2(omega)
              = 2(omega^2 - omega0^2)/omega0 - I(omega),
    I(omega)  = Int (P/(omega - w) - 1/(omega + w)) V^2(w) dw,

and the weight

    pi(omega) = 4 omega V^2(omega) / (omega0 * (W1^2 + pi^2 V^4)),

which is positive and integrates to one below threshold.  W1 is the stable
combination: Y itself diverges where V^2 vanishes, so all coefficient
formulas here are assembled from W1 and the complex denominator
W1 - i pi V^2 rather than from Y directly.

The sharp line of width  pi V^2(peak)/W1'(peak)  at the root of W1 is where
pi concentrates; both grid builders resolve it explicitly.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, GridRefinementError
from .model import (
    ModelParams,
    coupling_v,
    coupling_v2,
    renormalized_frequency,
    threshold_frequency,
)
from .quadrature import (
    PanelGrid,
    QuadratureConfig,
    SingularKernel,
    SupportedFunction,
    adaptive_panels,
    build_panel_grid,
    integrate_semi_infinite,
    principal_value,
    pv_batch,
    smeared_delta_pairing,
)

_GRID_CACHE: dict = {}
_GRID_LOCK = threading.Lock()


def _coupling_scale(params: ModelParams) -> float:
    if params.units_mode == "reduced":
        return params.coupling_scale
    return params.coupling_scale / params.omega0


def _v2_slope(params: ModelParams, omega):
    """d(V^2)/d omega in closed form (needed at PV pole locations)."""
    scale = _coupling_scale(params)
    w = np.asarray(omega, dtype=float)
    return scale * np.exp(-w / params.omega_c) * w**2 * (3.0 - w / params.omega_c)


def _coupling_panel_grid(params: ModelParams) -> tuple[PanelGrid, np.ndarray]:
    """Shared Gauss-Legendre rule for every integral against V^2.

    The regularized PV integrands vary on the omega_c scale everywhere, so a
    fixed layout (half-omega_c panels through the bulk, doubling beyond)
    integrates them to near machine precision.
    """
    key = (params.omega0, params.coupling_scale, params.omega_c,
           params.units_mode)
    with _GRID_LOCK:
        hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    s = params.omega_c
    x_max = QuadratureConfig(decay_scale=s).upper_limit
    edges = list(np.arange(0.0, 8.0 * s, 0.5 * s))
    e = 8.0 * s
    while e < x_max:
        edges.append(e)
        e *= 1.5
    edges.append(x_max)
    grid = build_panel_grid(edges, 16)
    v2 = coupling_v2(params, grid.nodes)
    with _GRID_LOCK:
        _GRID_CACHE[key] = (grid, v2)
    return grid, v2


def shift_integral(params: ModelParams, omega):
    """I(omega) = Int (P/(omega-w) - 1/(omega+w)) V^2(w) dw, vectorized."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    grid, v2n = _coupling_panel_grid(params)
    pv = np.empty(len(w))
    # at omega = 0 the pole sits on the edge but under a V^2 zero of third
    # order, so the PV piece is the plain convergent integral -Int V^2/w
    at_zero = w == 0.0
    if np.any(at_zero):
        pv[at_zero] = -float((v2n / grid.nodes) @ grid.weights)
    inside = (w < grid.hi) & ~at_zero
    if np.any(inside):
        wi = w[inside]
        pv[inside] = pv_batch(
            grid, v2n, coupling_v2(params, wi), _v2_slope(params, wi), wi,
            1e-7 * params.omega_c,
        )
    if np.any(~inside):
        # beyond the truncation V^2 is below abs_tol: no pole to subtract
        wo = w[~inside]
        pv[~inside] = (v2n[None, :] / (wo[:, None] - grid.nodes[None, :])) \
            @ grid.weights
    plus = (v2n[None, :] / (w[:, None] + grid.nodes[None, :])) @ grid.weights
    out = pv - plus
    return float(out[0]) if np.isscalar(omega) or np.ndim(omega) == 0 else out


def w1_function(params: ModelParams, omega):
    """W1 = Y V^2: the real part of the inverse response, vectorized."""
    w = np.asarray(omega, dtype=float)
    bare = 2.0 * (w**2 - params.omega0**2) / params.omega0
    return bare - shift_integral(params, omega)


def y_function(params: ModelParams, omega: float,
               cfg: QuadratureConfig | None = None) -> float:
    """Y(omega) via the generic adaptive quadrature path (scalar).

    This is the contract route: the PV piece through principal_value, the
    anti-resonant piece through integrate_semi_infinite.  Production code
    uses w1_function (same quantity times V^2, batched, no V^2 division).
    """
    v2w = coupling_v2(params, omega)
    if v2w == 0.0:
        raise ValueError(
            f"Y({omega!r}) undefined where the coupling vanishes"
        )
    cfg = cfg or QuadratureConfig(decay_scale=params.omega_c)

    def smooth(w):
        return coupling_v2(params, w)

    pv, _ = principal_value(SingularKernel(smooth, pole=omega), cfg)

    def anti(w):
        return coupling_v2(params, w) / (omega + w)

    plus, _ = integrate_semi_infinite(anti, cfg)
    bare = 2.0 * (omega**2 - params.omega0**2) / params.omega0
    return (bare - (pv - plus)) / v2w


@dataclass(frozen=True)
class Resonance:
    """Location, width, and W1-slope of the dressed line."""

    omega_peak: float
    width: float
    slope: float


def resonance(params: ModelParams) -> Resonance:
    """Root of W1 where pi(omega) peaks, with its Lorentzian width."""
    renormalized_frequency(params)  # threshold gate
    omega0 = params.omega0
    if params.coupling_scale == 0.0:
        return Resonance(omega0, 0.0, 4.0)
    hi = max(3.0 * omega0, omega0 + 4.0 * params.omega_c)
    sample = np.concatenate([
        omega0 * np.geomspace(0.02, 1.0, 60),
        np.linspace(omega0, hi, 80)[1:],
    ])
    vals = w1_function(params, sample)
    idx = np.flatnonzero((vals[:-1] < 0.0) & (vals[1:] >= 0.0))
    if len(idx) == 0:
        raise GridRefinementError("no sign change of W1 found in the scan band")
    a, b = sample[idx[0]], sample[idx[0] + 1]
    peak = brentq(lambda x: w1_function(params, np.array([x]))[0], a, b,
                  xtol=1e-30, rtol=8.9e-16)
    h = 1e-6 * max(peak, params.omega_c)
    slope = (w1_function(params, np.array([peak + h]))[0]
             - w1_function(params, np.array([peak - h]))[0]) / (2.0 * h)
    width = math.pi * coupling_v2(params, peak) / slope
    return Resonance(peak, width, slope)


def pi_value(params: ModelParams, omega):
    """pi(omega) pointwise (vectorized); equals |alpha|^2 4 omega0 omega/(omega0+omega)^2."""
    w = np.asarray(omega, dtype=float)
    v2 = coupling_v2(params, w)
    w1 = w1_function(params, w)
    denom = w1**2 + (math.pi * v2) ** 2
    return 4.0 * w * v2 / (params.omega0 * denom)


@dataclass(frozen=True, eq=False)
class FanoCoefficients:
    """Expansion coefficients of one dressed operator at frequency omega."""

    omega: float
    y_value: float
    alpha: complex
    beta: complex
    gamma_smooth: Callable
    gamma_delta_coeff: complex
    delta_kernel: Callable


def alpha_beta(params: ModelParams, omega):
    """(alpha, beta), vectorized over omega."""
    w = np.asarray(omega, dtype=float)
    v = coupling_v(params, w)
    w1 = w1_function(params, w)
    denom = w1 - 1j * math.pi * coupling_v2(params, w)
    alpha = (w + params.omega0) * v / (params.omega0 * denom)
    beta = alpha * (w - params.omega0) / (w + params.omega0)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(alpha), complex(beta)
    return alpha, beta


def gamma_delta(params: ModelParams, omega: float) -> FanoCoefficients:
    """All expansion coefficients at one frequency, in stable combinations."""
    omega = float(omega)
    v2w = coupling_v2(params, omega)
    if v2w == 0.0:
        raise ValueError("coefficients undefined where the coupling vanishes")
    vw = math.sqrt(v2w)
    w1 = w1_function(params, np.array([omega]))[0]
    denom = w1 - 1j * math.pi * v2w
    alpha = (omega + params.omega0) * vw / (params.omega0 * denom)
    beta = alpha * (omega - params.omega0) / (omega + params.omega0)
    c = vw / denom  # = omega0 * alpha / (omega + omega0)

    def gamma_smooth(wp):
        return c * coupling_v(params, wp)

    def delta_kernel(wp):
        wp_arr = np.asarray(wp, dtype=float)
        return c * coupling_v(params, wp_arr) / (omega + wp_arr)

    return FanoCoefficients(
        omega=omega,
        y_value=w1 / v2w,
        alpha=alpha,
        beta=beta,
        gamma_smooth=gamma_smooth,
        gamma_delta_coeff=w1 / denom,
        delta_kernel=delta_kernel,
    )


# ---------------------------------------------------------------------------
# pi grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PiDistribution:
    """pi(omega) sampled with an integration rule that resolves its peak.

    weights are the rule weights on grid (Gauss-Legendre panels from
    pi_quadrature, trapezoid from pi_distribution); norm includes the
    analytic tail estimates beyond the grid.
    """

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    norm: float
    tail_low: float
    tail_high: float
    peak_omega: float
    peak_width: float
    params: ModelParams
    domain: tuple[float, float] = (0.0, 0.0)

    @property
    def x_max(self) -> float:
        return float(self.domain[1])

    def integrate(self, integrand_values: np.ndarray):
        """Integrate values-given-on-grid against the pi measure's rule."""
        return integrand_values @ self.weights


def _tail_estimates(params: ModelParams, lo: float, hi: float,
                    pi_lo: float, pi_hi: float) -> tuple[float, float]:
    # pi ~ omega^4 below the grid, ~ V^2-envelope above it
    return pi_lo * lo / 5.0, pi_hi * params.omega_c


def _window_edges(peak: float, width: float, w_lo: float, w_hi: float):
    edges = {w_lo, w_hi, peak}
    if width <= 0.0:
        return edges
    step = width
    while step < (w_hi - w_lo):
        for cand in (peak - step, peak + step):
            if w_lo < cand < w_hi:
                edges.add(cand)
        step *= 2.0
    edges.update((max(peak - 0.5 * width, w_lo), min(peak + 0.5 * width, w_hi)))
    return edges


def pi_quadrature(params: ModelParams,
                  points_per_panel: int = 16) -> PiDistribution:
    """Gauss-Legendre panel measure for integrating smooth functions
    against pi; norm defect typically ~1e-10."""
    if params.coupling_scale == 0.0:
        raise ConfigError(
            "pi is a point mass at omega0 for zero coupling; "
            "use the uncoupled closed forms instead"
        )
    res = resonance(params)
    peak, width = res.omega_peak, res.width
    x_max = QuadratureConfig(decay_scale=params.omega_c).upper_limit
    lo = peak * 1e-3
    h = max(60.0 * width, 0.02 * peak)
    w_lo = peak - min(h, 0.85 * (peak - lo))
    w_hi = peak + min(h, 0.85 * (x_max - peak))
    edges = set(np.geomspace(lo, w_lo, 25))
    edges |= _window_edges(peak, width, w_lo, w_hi)
    edges |= set(np.geomspace(w_hi, x_max, 40))
    grid = build_panel_grid(sorted(edges), points_per_panel)
    values = pi_value(params, grid.nodes)
    tail_low, tail_high = _tail_estimates(
        params, lo, x_max,
        float(pi_value(params, np.array([lo]))[0]),
        float(pi_value(params, np.array([x_max]))[0]),
    )
    norm = float(values @ grid.weights) + tail_low + tail_high
    if abs(norm - 1.0) > 1e-6:
        raise GridRefinementError(
            f"pi measure norm defect {abs(norm - 1.0):.3e} exceeds 1e-6",
            defect=abs(norm - 1.0),
        )
    return PiDistribution(
        grid=grid.nodes, values=values, weights=grid.weights, norm=norm,
        tail_low=tail_low, tail_high=tail_high,
        peak_omega=peak, peak_width=width, params=params,
        domain=(lo, x_max),
    )


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.zeros_like(grid)
    d = np.diff(grid)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def pi_distribution(params: ModelParams, grid=None,
                    target_defect: float = 2e-7,
                    max_passes: int = 16) -> PiDistribution:
    """Emission-grade pi on an explicit point grid (trapezoid weights).

    Starts from a logarithmic base grid (peak/100 to 50 omega_c) plus an
    arctan-clustered core across the peak, then inserts midpoints where the
    local curvature error dominates until the normalization defect
    |trapz(pi) + tails - 1| drops below target_defect.
    """
    if params.coupling_scale == 0.0:
        raise ConfigError(
            "pi is a point mass at omega0 for zero coupling; "
            "use the uncoupled closed forms instead"
        )
    res = resonance(params)
    peak, width = res.omega_peak, res.width
    hi_edge = 50.0 * params.omega_c
    if grid is None:
        base = np.geomspace(peak / 100.0, hi_edge, 400)
    else:
        base = np.asarray(grid, dtype=float)
        if base.ndim != 1 or len(base) < 2 or np.any(np.diff(base) <= 0.0):
            raise ConfigError("grid must be a strictly increasing 1-D array")
        if np.any(base <= 0.0):
            raise ConfigError("grid frequencies must be positive")
        hi_edge = float(base[-1])
    half_span = min(0.45 * peak, max(200.0 * width, 1e-3 * peak))
    u_max = math.atan2(half_span, width) if width > 0.0 else 0.0
    if u_max > 0.0:
        core = peak + width * np.tan(np.linspace(-u_max, u_max, 601))
        core = core[(core > base[0]) & (core < base[-1])]
        pts = np.union1d(base, core)
    else:
        pts = base
    pts = pts[np.concatenate(([True], np.diff(pts) > 1e-14 * peak))]

    values = pi_value(params, pts)
    for _ in range(max_passes):
        weights = _trapezoid_weights(pts)
        tail_low, tail_high = _tail_estimates(
            params, pts[0], pts[-1], values[0], values[-1]
        )
        norm = float(values @ weights) + tail_low + tail_high
        defect = abs(norm - 1.0)
        if defect <= target_defect:
            break
        # trapezoid error indicator per interval: |slope change| * h^2
        d = np.diff(pts)
        slopes = np.diff(values) / d
        err = np.zeros(len(d))
        err[1:] = np.abs(np.diff(slopes)) * d[1:] ** 2
        err[0] = err[1] if len(err) > 1 else 1.0
        order = np.argsort(err)[::-1]
        cum = np.cumsum(err[order])
        n_split = int(np.searchsorted(cum, 0.9 * cum[-1])) + 1
        n_split = min(max(n_split, 16), len(d))
        mids = 0.5 * (pts[order[:n_split]] + pts[order[:n_split] + 1])
        mid_vals = pi_value(params, mids)
        insert_at = np.searchsorted(pts, mids)
        pts = np.insert(pts, insert_at, mids)
        values = np.insert(values, insert_at, mid_vals)
    else:
        weights = _trapezoid_weights(pts)
        tail_low, tail_high = _tail_estimates(
            params, pts[0], pts[-1], values[0], values[-1]
        )
        norm = float(values @ weights) + tail_low + tail_high
        defect = abs(norm - 1.0)
        if defect > 1e-3:
            raise GridRefinementError(
                f"pi grid refinement stalled at norm defect {defect:.3e}",
                defect=defect,
            )
    return PiDistribution(
        grid=pts, values=values, weights=_trapezoid_weights(pts), norm=norm,
        tail_low=tail_low, tail_high=tail_high,
        peak_omega=peak, peak_width=width, params=params,
        domain=(float(pts[0]), float(pts[-1])),
    )


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------

def eigen_residual(params: ModelParams, omega: float,
                   cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Residuals of the four coupled eigenoperator coefficient equations.

    Components 1 and 2 evaluate the atom-sector equations with the kernel
    integral Int V(w)[gamma - delta] dw taken through the generic adaptive
    quadrature (so they measure cross-route quadrature consistency);
    components 3 and 4 are the pointwise field-sector identities sampled
    away from the pole.  All are relative to the largest term involved.
    """
    cfg = cfg or QuadratureConfig(decay_scale=params.omega_c)
    co = gamma_delta(params, omega)
    omega0 = params.omega0
    alpha, beta = co.alpha, co.beta
    c = omega0 * alpha / (omega + omega0)

    def v2_smooth(w):
        return coupling_v2(params, w)

    pv, _ = principal_value(SingularKernel(v2_smooth, pole=omega), cfg)

    def anti(w):
        return coupling_v2(params, w) / (omega + w)

    plus, _ = integrate_semi_infinite(anti, cfg)
    i_generic = pv - plus
    w1 = co.y_value * coupling_v2(params, omega)
    s_term = 0.5 * c * (i_generic + w1)

    lhs1, rhs1 = alpha * omega0 + s_term, omega * alpha
    r1 = abs(lhs1 - rhs1) / max(abs(alpha * omega0), abs(s_term), abs(rhs1))
    lhs2, rhs2 = -beta * omega0 + s_term, omega * beta
    r2 = abs(lhs2 - rhs2) / max(abs(beta * omega0), abs(s_term), abs(rhs2), 1e-300)

    sample = np.array([0.5 * omega, 0.9 * omega, 1.3 * omega, 2.0 * omega])
    vws = coupling_v(params, sample)
    target = 0.5 * vws * (alpha - beta)
    g_smooth = np.asarray(co.gamma_smooth(sample))
    r3 = float(np.max(np.abs(g_smooth - target) / np.abs(target)))
    d_vals = np.asarray(co.delta_kernel(sample))
    r4 = float(np.max(np.abs((omega + sample) * d_vals - target) / np.abs(target)))
    return np.array([r1, r2, r3, r4])


def _pairing_kernels(params: ModelParams):
    """Closures mapping an outer frequency to gamma*/gamma/delta/delta* kernels."""

    def gamma_kernel(nu, conjugate=False):
        co = gamma_delta(params, nu)
        cval = params.omega0 * co.alpha / (nu + params.omega0)
        dcoef = co.gamma_delta_coeff
        if conjugate:
            cval = np.conj(cval)
            dcoef = np.conj(dcoef)

        def smooth(w):
            return cval * coupling_v(params, w)

        return SingularKernel(smooth, pole=nu, delta_coeff=dcoef)

    def delta_kernel_of(nu, conjugate=False):
        co = gamma_delta(params, nu)

        def smooth(w):
            vals = np.asarray(co.delta_kernel(w))
            return np.conj(vals) if conjugate else vals

        return SingularKernel(smooth, pole=None)

    return gamma_kernel, delta_kernel_of


def completeness_check(params: ModelParams, test_f: SupportedFunction,
                       test_g: SupportedFunction,
                       cfg: QuadratureConfig | None = None) -> float:
    """Smeared overlap-completeness defect.

    Evaluates Int dnu [gamma*(nu,.) . f][gamma(nu,.) . g] -
    [delta(nu,.) . f][delta*(nu,.) . g] minus Int f g; zero in exact
    arithmetic for any pair of admissible test functions.
    """
    cfg = cfg or QuadratureConfig(decay_scale=params.omega_c, rel_tol=1e-8)
    gamma_kernel, delta_kernel_of = _pairing_kernels(params)
    res = resonance(params)
    outer_hint = set(_window_edges(
        res.omega_peak, res.width,
        res.omega_peak - max(100 * res.width, 0.05 * res.omega_peak),
        res.omega_peak + max(100 * res.width, 0.05 * res.omega_peak),
    ))
    lhs_gamma = smeared_delta_pairing(
        lambda nu: gamma_kernel(nu, conjugate=True),
        lambda nu: gamma_kernel(nu, conjugate=False),
        test_f, test_g, cfg, outer_edges=sorted(outer_hint),
    )
    lhs_delta = smeared_delta_pairing(
        lambda nu: delta_kernel_of(nu, conjugate=False),
        lambda nu: delta_kernel_of(nu, conjugate=True),
        test_f, test_g, cfg, outer_edges=sorted(outer_hint),
    )
    lo = max(test_f.support[0], test_g.support[0])
    hi = min(test_f.support[1], test_g.support[1])
    if lo < hi:
        overlap_grid = build_panel_grid(np.linspace(lo, hi, 33), 16)
        rhs = float(
            np.real(
                (np.asarray(test_f(overlap_grid.nodes))
                 * np.asarray(test_g(overlap_grid.nodes)))
                @ overlap_grid.weights
            )
        )
    else:
        rhs = 0.0
    lhs = lhs_gamma - lhs_delta
    if isinstance(lhs, complex):
        lhs = lhs.real
    return float(lhs - rhs)
