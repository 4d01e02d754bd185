"""Semi-infinite, principal-value, and smeared-distribution quadrature.

All integrals in this package live on [0, inf) with integrands that decay
like polynomial * exp(-omega/scale).  They are evaluated on [0, X] with X
chosen so the neglected tail is below the absolute tolerance, using adaptive
composite Gauss-Legendre panels.  Principal values use the subtraction
identity

    P Int_lo^hi f(w)/(omega - w) dw
        = Int_lo^hi [f(w) - f(omega)]/(omega - w) dw
          + f(omega) * ln((omega - lo)/(hi - omega)),

with a centered finite-difference estimate of f'(omega) replacing the
divided difference inside a small guard band |w - omega| < eps.

Distributional kernels (a PV pole plus a delta coefficient) are never
sampled pointwise; `smeared_delta_pairing` pairs each kernel against a
compactly supported test function first, producing smooth functions of the
outer variable, and only then multiplies and integrates.

Deterministic by construction: fixed panel seeds, worst-panel-first
bisection with a stable tie-break, no randomness.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import QuadratureError

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_GL_LOCK = threading.Lock()


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    with _GL_LOCK:
        if n not in _GL_CACHE:
            _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
        return _GL_CACHE[n]


def default_truncation(decay_scale: float, abs_tol: float = 1e-14) -> float:
    """Smallest X with (X/s)^3 exp(-X/s) below abs_tol, via fixed-point log iteration."""
    target = max(abs_tol, 1e-300)
    u = 40.0
    for _ in range(8):
        u = math.log(max(u, 1.0) ** 3 / target)
    return decay_scale * u


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and domain layout for the adaptive integrators."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    truncation: float | None = None
    panels: int = 4000
    panel_points: int = 15
    decay_scale: float = 1.0
    pole_guard: float = 1e-5

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not (self.decay_scale > 0.0):
            raise ValueError("decay_scale must be positive")
        if self.truncation is not None and not (self.truncation > 0.0):
            raise ValueError("truncation must be positive")

    @property
    def upper_limit(self) -> float:
        if self.truncation is not None:
            return self.truncation
        return default_truncation(self.decay_scale, self.abs_tol)

    @property
    def guard_width(self) -> float:
        return self.pole_guard * self.decay_scale


@dataclass(frozen=True)
class SingularKernel:
    """A kernel smooth(w) * P/(pole - w) + delta_coeff * delta(pole - w).

    Either part may be absent: pole=None makes it a plain smooth kernel,
    smooth=None a pure delta.  The smooth factor must be finite at the pole;
    the 1/(pole - w) singularity is carried structurally, never evaluated.
    """

    smooth: Callable | None
    pole: float | None = None
    delta_coeff: complex | None = None


@dataclass(frozen=True)
class SupportedFunction:
    """A callable with an explicit compact support interval."""

    fn: Callable
    support: tuple[float, float]

    def __call__(self, w):
        return self.fn(w)


def gaussian_bump(center: float, width: float,
                  amplitude: float = 1.0) -> SupportedFunction:
    """A smooth bump exp(-(w-center)^2/(2 width^2)), truncated at 8 widths."""
    lo = max(center - 8.0 * width, 0.0)
    hi = center + 8.0 * width

    def fn(w):
        w = np.asarray(w, dtype=float)
        out = amplitude * np.exp(-0.5 * ((w - center) / width) ** 2)
        out = np.where((w >= lo) & (w <= hi), out, 0.0)
        return float(out) if out.ndim == 0 else out

    return SupportedFunction(fn, (lo, hi))


# ---------------------------------------------------------------------------
# adaptive panel engine
# ---------------------------------------------------------------------------

def _panel_estimates(f, a: float, b: float, p: int):
    """(coarse, fine, error) Gauss-Legendre estimates of Int_a^b f."""
    x1, w1 = _gauss_legendre(p)
    x2, w2 = _gauss_legendre(2 * p)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    coarse = half * np.dot(np.asarray(f(mid + half * x1)), w1)
    fine = half * np.dot(np.asarray(f(mid + half * x2)), w2)
    return coarse, fine, abs(fine - coarse)


def adaptive_panels(f, edges, cfg: QuadratureConfig):
    """Adaptively integrate a vectorized f over the union of edge intervals.

    Returns (value, error_estimate).  Worst-error panel is bisected first;
    ties break on the interval's left endpoint so results are deterministic.
    """
    edges = np.unique(np.asarray(edges, dtype=float))
    if len(edges) < 2:
        raise ValueError("need at least two panel edges")
    heap = []
    total = 0.0 + 0.0j
    total_err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        coarse, fine, err = _panel_estimates(f, a, b, cfg.panel_points)
        total += fine
        total_err += err
        heapq.heappush(heap, (-err, a, b, fine))
    n_panels = len(heap)
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_panels >= cfg.panels:
            raise QuadratureError(
                f"panel budget {cfg.panels} exhausted at estimated error "
                f"{total_err:.3e}",
                value=_demote(total),
                error_estimate=total_err,
            )
        neg_err, a, b, fine = heapq.heappop(heap)
        total -= fine
        total_err -= -neg_err
        m = 0.5 * (a + b)
        for aa, bb in ((a, m), (m, b)):
            coarse, fine2, err2 = _panel_estimates(f, aa, bb, cfg.panel_points)
            total += fine2
            total_err += err2
            heapq.heappush(heap, (-err2, aa, bb, fine2))
        n_panels += 1
    return _demote(total), total_err


def _demote(z):
    """Drop a negligible imaginary part produced by complex accumulation."""
    if isinstance(z, complex) and z.imag == 0.0:
        return z.real
    return z


def _geometric_edges(lo: float, hi: float, scale: float) -> list[float]:
    """Doubling ladder from ~scale/16 up to hi; resolves both endpoints."""
    edges = [lo]
    step = scale / 16.0
    e = lo + step
    while e < hi:
        edges.append(e)
        step *= 2.0
        e = edges[-1] + step
    edges.append(hi)
    return edges


# ---------------------------------------------------------------------------
# public integrators
# ---------------------------------------------------------------------------

def integrate_semi_infinite(f, cfg: QuadratureConfig | None = None):
    """Int_0^inf f(w) dw for f decaying like w^3 exp(-w/decay_scale).

    Returns (value, error_estimate): adaptive panels on [0, X] plus the
    closed-form tail of the cubic-exponential envelope fitted at X.
    """
    cfg = cfg or QuadratureConfig()
    x_max = cfg.upper_limit
    s = cfg.decay_scale
    value, err = adaptive_panels(f, _geometric_edges(0.0, x_max, s), cfg)
    fx = complex(np.asarray(f(np.array([x_max])))[0])
    r = s / x_max
    tail = fx * s * (1.0 + 3.0 * r + 6.0 * r**2 + 6.0 * r**3)
    value = _demote(value + tail)
    return value, err + 0.5 * abs(tail)


def principal_value(kernel: SingularKernel, cfg: QuadratureConfig | None = None,
                    domain: tuple[float, float] | None = None):
    """P Int f(w)/(pole - w) dw over domain (default [0, X]) by subtraction.

    Returns (value, error_estimate).
    """
    cfg = cfg or QuadratureConfig()
    if kernel.pole is None:
        raise ValueError("principal_value requires a pole location")
    if kernel.smooth is None:
        raise ValueError("principal_value requires a smooth part")
    lo, hi = domain if domain is not None else (0.0, cfg.upper_limit)
    pole = kernel.pole
    if not (lo < pole < hi):
        raise ValueError(f"pole {pole} outside integration domain ({lo}, {hi})")
    f = kernel.smooth
    eps = min(cfg.guard_width, 0.25 * (pole - lo), 0.25 * (hi - pole))
    f_pole = complex(np.asarray(f(np.array([pole])))[0])
    f_hi = complex(np.asarray(f(np.array([pole + eps])))[0])
    f_lo = complex(np.asarray(f(np.array([pole - eps])))[0])
    fprime = (f_hi - f_lo) / (2.0 * eps)

    def regular(w):
        w = np.asarray(w, dtype=float)
        fw = np.asarray(f(w), dtype=complex)
        d = pole - w
        near = np.abs(d) < eps
        d_safe = np.where(near, 1.0, d)
        quot = (fw - f_pole) / d_safe
        return np.where(near, -fprime, quot)

    edges = set(_geometric_edges(lo, hi, cfg.decay_scale))
    step = eps
    while step < 0.5 * max(pole - lo, hi - pole):
        for cand in (pole - step, pole + step):
            if lo < cand < hi:
                edges.add(cand)
        step *= 4.0
    edges.update((pole - eps, pole + eps))
    value, err = adaptive_panels(regular, sorted(edges), cfg)
    log_term = f_pole * math.log((pole - lo) / (hi - pole))
    curv = abs(f_hi - 2.0 * f_pole + f_lo)
    return _demote(value + log_term), err + curv * eps


def pair_kernel_with_test(kernel: SingularKernel, test: SupportedFunction,
                          outer: float, cfg: QuadratureConfig):
    """Int test(w) * kernel(w) dw with the kernel's pole/delta at `outer`.

    The delta part contributes delta_coeff * test(outer); the PV part is a
    principal value when the pole lies inside the test support and a plain
    integral otherwise.
    """
    lo, hi = test.support
    total = 0.0 + 0.0j
    if kernel.smooth is not None:
        fn = kernel.smooth

        def smooth_prod(w):
            return np.asarray(test(w)) * np.asarray(fn(w))

        if kernel.pole is None:
            val, _ = adaptive_panels(smooth_prod, np.linspace(lo, hi, 17), cfg)
            total += val
        elif lo < kernel.pole < hi:
            val, _ = principal_value(
                SingularKernel(smooth_prod, pole=kernel.pole), cfg, domain=(lo, hi)
            )
            total += val
        else:
            pole = kernel.pole

            def with_pole(w):
                w = np.asarray(w, dtype=float)
                return smooth_prod(w) / (pole - w)

            val, _ = adaptive_panels(with_pole, np.linspace(lo, hi, 17), cfg)
            total += val
    if kernel.delta_coeff is not None:
        total += kernel.delta_coeff * complex(np.asarray(test(np.array([outer])))[0])
    return _demote(total)


def _paired_on_support(kernel, test: SupportedFunction, grid: "PanelGrid",
                       test_vals: np.ndarray, nu: float, eps: float):
    """Fast fixed-grid version of pair_kernel_with_test for smooth tests."""
    total = 0.0 + 0.0j
    if kernel.smooth is not None:
        fn = kernel.smooth
        prod = test_vals * np.asarray(fn(grid.nodes), dtype=complex)
        pole = kernel.pole
        if pole is None:
            total += prod @ grid.weights
        elif grid.lo < pole < grid.hi:
            e = min(eps, 0.25 * (pole - grid.lo), 0.25 * (grid.hi - pole))
            pts = np.array([pole - e, pole, pole + e])
            fp = np.asarray(test(pts), dtype=complex) * np.asarray(
                fn(pts), dtype=complex
            )
            slope = (fp[2] - fp[0]) / (2.0 * e)
            d = pole - grid.nodes
            near = np.abs(d) < e
            quot = np.where(near, -slope, (prod - fp[1]) / np.where(near, 1.0, d))
            total += quot @ grid.weights
            total += fp[1] * math.log((pole - grid.lo) / (grid.hi - pole))
        else:
            total += (prod / (pole - grid.nodes)) @ grid.weights
    if kernel.delta_coeff is not None:
        total += kernel.delta_coeff * complex(np.asarray(test(np.array([nu])))[0])
    return total


def smeared_delta_pairing(kernel_a, kernel_b, test_f: SupportedFunction,
                          test_g: SupportedFunction,
                          cfg: QuadratureConfig | None = None,
                          outer_edges=None):
    """Int_0^X [kernel_a(nu) . f] * [kernel_b(nu) . g] d nu.

    kernel_a and kernel_b map an outer frequency nu to the SingularKernel
    (in the inner variable) whose pole/delta sit at nu.  Each kernel is
    paired with its test function first, so no distributional product is
    ever formed.  Inner integrals run on fixed composite rules over the
    compact supports; the outer integral is adaptive.
    """
    cfg = cfg or QuadratureConfig()
    x_max = cfg.upper_limit
    grid_f = build_panel_grid(np.linspace(*test_f.support, 25), 16)
    grid_g = build_panel_grid(np.linspace(*test_g.support, 25), 16)
    vals_f = np.asarray(test_f(grid_f.nodes), dtype=complex)
    vals_g = np.asarray(test_g(grid_g.nodes), dtype=complex)
    eps = cfg.guard_width

    def integrand(nus):
        nus = np.asarray(nus, dtype=float)
        out = np.empty(len(nus), dtype=complex)
        for i, nu in enumerate(nus):
            pa = _paired_on_support(kernel_a(nu), test_f, grid_f, vals_f, nu, eps)
            pb = _paired_on_support(kernel_b(nu), test_g, grid_g, vals_g, nu, eps)
            out[i] = pa * pb
        return out

    edges = {0.0, x_max}
    for sup in (test_f.support, test_g.support):
        edges.update(np.linspace(sup[0], sup[1], 9))
    if outer_edges is not None:
        edges.update(float(e) for e in np.asarray(outer_edges).ravel()
                     if 0.0 < e < x_max)
    value, _ = adaptive_panels(integrand, sorted(edges), cfg)
    return _demote(value)


# ---------------------------------------------------------------------------
# batched fixed-grid helpers (shared panel grids, many poles)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PanelGrid:
    """Flattened composite Gauss-Legendre rule over fixed panel edges."""

    nodes: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray):
        return values @ self.weights


def build_panel_grid(edges, points_per_panel: int = 16) -> PanelGrid:
    edges = np.unique(np.asarray(edges, dtype=float))
    x, w = _gauss_legendre(points_per_panel)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)[:, None]
    mid = 0.5 * (a + b)[:, None]
    nodes = (mid + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return PanelGrid(nodes, weights, float(edges[0]), float(edges[-1]))


def pv_batch(grid: PanelGrid, values: np.ndarray, pole_values: np.ndarray,
             pole_slopes: np.ndarray, poles: np.ndarray,
             guard: float) -> np.ndarray:
    """P Int f(w)/(pole_i - w) dw on a shared grid for a batch of poles.

    values: f at grid.nodes; pole_values/pole_slopes: f and f' at the poles.
    Uses the same subtraction identity as `principal_value`; poles must lie
    strictly inside (grid.lo, grid.hi).
    """
    poles = np.asarray(poles, dtype=float)
    d = poles[:, None] - grid.nodes[None, :]
    near = np.abs(d) < guard
    d_safe = np.where(near, 1.0, d)
    quot = (values[None, :] - pole_values[:, None]) / d_safe
    quot = np.where(near, -pole_slopes[:, None], quot)
    log_term = pole_values * np.log((poles - grid.lo) / (grid.hi - poles))
    return quot @ grid.weights + log_term
