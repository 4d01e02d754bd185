"""The shift integral has a closed form in exponential integrals,

    I(omega) = A wc^3 [ -4 - 2u^2 + u^3 (e^{-u} Ei(u) + e^{u} E1(u)) ],
    u = omega/wc,

which pins the whole layer: W1, the resonance location and width, the
coefficient functions, and the pi weight are all arithmetic on top of it.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import exp1, expi

from dressed import (
    ConfigError,
    GridRefinementError,
    ModelParams,
    ThresholdError,
    alpha_beta,
    gamma_delta,
    pi_distribution,
    pi_quadrature,
    resonance,
)
from dressed.fano import (
    eigen_residual,
    pi_value,
    shift_integral,
    w1_function,
    y_function,
)

# independently refined root of W1 and the line width at the reference set
REF_PEAK = 0.48903221382259143
REF_WIDTH = 5.744042141123868e-4


def shift_closed_form(params, omega):
    u = np.asarray(omega, dtype=float) / params.omega_c
    a = params.coupling_scale * params.omega_c**3
    out = np.full_like(u, -4.0 * a)
    pos = u > 0.0
    up = u[pos]
    out[pos] = a * (-4.0 - 2.0 * up**2
                    + up**3 * (np.exp(-up) * expi(up) + np.exp(up) * exp1(up)))
    return out


def test_shift_integral_closed_form(ref_params):
    omegas = np.array([0.0, 0.05, 0.3, 0.49, 1.0, 2.7, 5.0, 10.0])
    got = shift_integral(ref_params, omegas)
    want = shift_closed_form(ref_params, omegas)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-16)


@settings(max_examples=25)
@given(a=st.floats(1e-3, 0.2), wc=st.floats(0.5, 2.0),
       u=st.floats(0.01, 8.0))
def test_shift_integral_closed_form_property(a, wc, u):
    p = ModelParams(omega0=1.0, coupling_scale=a, omega_c=wc)
    got = shift_integral(p, np.array([u * wc]))[0]
    want = float(shift_closed_form(p, np.array([u * wc]))[0])
    assert got == pytest.approx(want, rel=1e-9, abs=1e-14)


def test_w1_assembles_bare_and_shift(ref_params):
    w = np.array([0.2, 0.49, 1.3])
    bare = 2.0 * (w**2 - 0.25) / 0.5
    np.testing.assert_allclose(
        w1_function(ref_params, w),
        bare - shift_closed_form(ref_params, w), rtol=1e-10)


def test_y_function_cross_route(ref_params):
    from dressed.model import coupling_v2
    for w in (0.3, 0.8, 2.0):
        y = y_function(ref_params, w)
        w1 = w1_function(ref_params, np.array([w]))[0]
        assert y == pytest.approx(w1 / coupling_v2(ref_params, w), rel=1e-9)
    with pytest.raises(ValueError):
        y_function(ref_params, 0.0)


def test_resonance_reference_values(ref_params):
    res = resonance(ref_params)
    assert res.omega_peak == pytest.approx(REF_PEAK, rel=1e-12)
    assert res.width == pytest.approx(REF_WIDTH, rel=1e-8)
    assert res.slope > 0.0
    # the root of the closed-form W1 confirms the scan+brentq machinery
    assert w1_function(ref_params, np.array([res.omega_peak]))[0] == \
        pytest.approx(0.0, abs=1e-13)


def test_resonance_limits():
    res = resonance(ModelParams(omega0=0.7, coupling_scale=0.0))
    assert res.omega_peak == 0.7 and res.width == 0.0
    with pytest.raises(ThresholdError):
        resonance(ModelParams(omega0=0.01, coupling_scale=0.01))


def test_alpha_beta_identities(ref_params):
    w0 = ref_params.omega0
    w = np.geomspace(0.05, 6.0, 25)
    alpha, beta = alpha_beta(ref_params, w)
    # beta/alpha ratio is real and vanishes exactly at the bare frequency
    np.testing.assert_allclose(beta, alpha * (w - w0) / (w + w0), rtol=1e-14)
    a0, b0 = alpha_beta(ref_params, w0)
    assert b0 == 0.0
    assert isinstance(a0, complex)
    # normalization: |alpha|^2 - |beta|^2 is exactly the pi weight
    np.testing.assert_allclose(
        np.abs(alpha) ** 2 - np.abs(beta) ** 2,
        pi_value(ref_params, w), rtol=1e-12)


def test_gamma_delta_coefficients(ref_params):
    co = gamma_delta(ref_params, 0.8)
    assert co.alpha == alpha_beta(ref_params, 0.8)[0]
    # the delta-part coefficient and the local expansion weight agree:
    # gamma's delta coefficient is W1/(W1 - i pi V^2)
    from dressed.model import coupling_v2
    w1 = w1_function(ref_params, np.array([0.8]))[0]
    denom = w1 - 1j * math.pi * coupling_v2(ref_params, 0.8)
    assert co.gamma_delta_coeff == pytest.approx(w1 / denom, rel=1e-14)
    # smooth parts evaluate finitely on arrays
    vals = co.delta_kernel(np.array([0.4, 1.0]))
    assert np.all(np.isfinite(vals))
    with pytest.raises(ValueError):
        gamma_delta(ref_params, 0.0)


def test_eigen_residuals_tiny(ref_params):
    for w in (0.1, 0.49, 1.7):
        assert np.max(eigen_residual(ref_params, w)) < 1e-10


def test_pi_value_positive_and_normalized(ref_params, ref_pi):
    assert np.all(ref_pi.values > 0.0)
    assert abs(ref_pi.norm - 1.0) < 1e-6
    assert ref_pi.tail_low >= 0.0 and ref_pi.tail_high >= 0.0
    # the measure is concentrated at the resonance
    assert ref_pi.peak_omega == pytest.approx(REF_PEAK, rel=1e-12)
    near = np.abs(ref_pi.grid - REF_PEAK) < 10.0 * REF_WIDTH
    assert float(ref_pi.values[near] @ ref_pi.weights[near]) > 0.9


def test_pi_quadrature_moments_match_trapezoid_route(ref_params, ref_pi):
    emission = pi_distribution(ref_params, target_defect=1e-8)
    for power in (-1.0, 1.0, 2.0):
        a = float(ref_pi.integrate(ref_pi.values * ref_pi.grid**power))
        b = float(emission.integrate(emission.values * emission.grid**power))
        assert a == pytest.approx(b, rel=2e-7)


def test_pi_distribution_grid_validation(ref_params):
    with pytest.raises(ConfigError):
        pi_distribution(ref_params, grid=np.array([[1.0, 2.0]]))
    with pytest.raises(ConfigError):
        pi_distribution(ref_params, grid=np.array([2.0, 1.0]))
    with pytest.raises(ConfigError):
        pi_distribution(ref_params, grid=np.array([0.0, 1.0]))


def test_pi_refinement_stall(ref_params):
    # a two-point grid cannot reach the target and must refine toward it;
    # with refinement disabled it reports the stall
    with pytest.raises(GridRefinementError) as err:
        pi_distribution(ref_params, grid=np.array([0.4, 0.6]), max_passes=0)
    assert err.value.defect > 1e-3


def test_zero_coupling_rejected(ref_params):
    p = ModelParams(omega0=0.5, coupling_scale=0.0)
    with pytest.raises(ConfigError):
        pi_quadrature(p)
    with pytest.raises(ConfigError):
        pi_distribution(p)
