"""The integration engine is validated against closed forms only: gamma
integrals for the semi-infinite rule, log/polynomial identities and the
exponential-integral value for principal values, and Gaussian product
integrals for the smeared distributional pairings."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import expi

from dressed import QuadratureError
from dressed.quadrature import (
    PanelGrid,
    QuadratureConfig,
    SingularKernel,
    adaptive_panels,
    build_panel_grid,
    default_truncation,
    gaussian_bump,
    integrate_semi_infinite,
    pair_kernel_with_test,
    principal_value,
    pv_batch,
    smeared_delta_pairing,
)

# P Int_0^inf e^{-w}/(1-w) dw = e^{-1} Ei(1)
PV_EXP_AT_1 = math.exp(-1.0) * expi(1.0)


def test_default_truncation_kills_the_tail():
    for s in (0.5, 1.0, 3.0):
        x = default_truncation(s)
        # the fixed point lands on the tolerance itself; allow its roundoff
        assert (x / s) ** 3 * math.exp(-x / s) < 1.01e-14
        assert x < 80.0 * s  # not absurdly far out either


@given(k=st.integers(0, 5), s=st.floats(0.3, 3.0))
def test_gamma_integrals(k, s):
    cfg = QuadratureConfig(decay_scale=s)
    value, err = integrate_semi_infinite(
        lambda w: w**k * np.exp(-w / s), cfg)
    exact = math.factorial(k) * s ** (k + 1)
    assert value == pytest.approx(exact, rel=1e-10)
    assert err < 1e-6 * exact + 1e-12


def test_principal_value_log_identity():
    # P Int_0^2 dw/(1-w) = 0 and P Int_0^2 w dw/(1-w) = -2
    cfg = QuadratureConfig()
    v0, _ = principal_value(SingularKernel(lambda w: np.ones_like(w), pole=1.0),
                            cfg, domain=(0.0, 2.0))
    assert abs(v0) < 1e-12
    v1, _ = principal_value(SingularKernel(lambda w: np.asarray(w), pole=1.0),
                            cfg, domain=(0.0, 2.0))
    assert v1 == pytest.approx(-2.0, abs=1e-11)


def test_principal_value_exponential():
    cfg = QuadratureConfig()
    value, _ = principal_value(
        SingularKernel(lambda w: np.exp(-np.asarray(w)), pole=1.0), cfg)
    assert value == pytest.approx(PV_EXP_AT_1, rel=1e-10)


def test_principal_value_guard_independence():
    # the subtraction must not depend on the guard-band width
    vals = []
    for guard in (1e-4, 1e-5, 1e-6):
        cfg = QuadratureConfig(pole_guard=guard)
        v, _ = principal_value(
            SingularKernel(lambda w: np.exp(-np.asarray(w)), pole=1.0), cfg)
        vals.append(v)
    assert max(vals) - min(vals) < 1e-11


def test_principal_value_input_checks():
    cfg = QuadratureConfig()
    with pytest.raises(ValueError):
        principal_value(SingularKernel(None, pole=1.0), cfg)
    with pytest.raises(ValueError):
        principal_value(SingularKernel(lambda w: w, pole=None), cfg)
    with pytest.raises(ValueError):
        principal_value(SingularKernel(lambda w: w, pole=5.0), cfg,
                        domain=(0.0, 2.0))


def test_panel_budget_error():
    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-300, panels=4)
    with pytest.raises(QuadratureError) as err:
        adaptive_panels(lambda w: np.abs(np.sin(50.0 / (w + 0.01))),
                        [0.0, 1.0], cfg)
    assert err.value.value is not None
    assert err.value.error_estimate > 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(decay_scale=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(truncation=0.0)
    assert QuadratureConfig(truncation=7.0).upper_limit == 7.0


def test_panel_grid_polynomial_exactness():
    grid = build_panel_grid([0.0, 0.7, 2.0], points_per_panel=8)
    # degree 15 is exact for 8-point panels
    vals = grid.nodes**15
    assert grid.integrate(vals) == pytest.approx(2.0**16 / 16.0, rel=1e-14)
    assert grid.lo == 0.0 and grid.hi == 2.0 and grid.size == 16


def test_pv_batch_matches_scalar_route():
    edges = np.linspace(0.0, 10.0, 81)
    grid = build_panel_grid(edges, 16)
    f = np.exp(-grid.nodes)
    poles = np.array([0.5, 1.0, 3.5])
    batch = pv_batch(grid, f, np.exp(-poles), -np.exp(-poles), poles, 1e-9)
    cfg = QuadratureConfig()
    for i, pole in enumerate(poles):
        # sign: pv_batch integrates f/(pole - w)
        ref, _ = principal_value(
            SingularKernel(lambda w: np.exp(-np.asarray(w)), pole=float(pole)),
            cfg, domain=(0.0, 10.0))
        assert batch[i] == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_gaussian_bump_support():
    bump = gaussian_bump(1.0, 0.1)
    assert bump.support == (1.0 - 0.8, 1.0 + 0.8)
    assert bump(1.0) == 1.0
    assert bump(2.5) == 0.0
    assert bump(np.array([0.1, 1.0]))[0] == 0.0
    # support clipped at zero for wide bumps
    assert gaussian_bump(0.2, 0.1).support[0] == 0.0


def test_pair_kernel_delta_and_pole_branches():
    cfg = QuadratureConfig()
    test = gaussian_bump(1.0, 0.1)
    # pure delta: picks out test(outer)
    val = pair_kernel_with_test(
        SingularKernel(None, delta_coeff=2.0), test, 1.05, cfg)
    assert val == pytest.approx(2.0 * test(1.05), rel=1e-12)
    # pole outside the support: plain integral of test/(pole - w)
    val = pair_kernel_with_test(
        SingularKernel(lambda w: np.ones_like(np.asarray(w)), pole=5.0),
        test, 5.0, cfg)
    direct = build_panel_grid(np.linspace(*test.support, 33), 16)
    expect = float((test(direct.nodes) / (5.0 - direct.nodes)) @ direct.weights)
    assert val == pytest.approx(expect, rel=1e-9)


@settings(max_examples=20)
@given(c1=st.floats(1.0, 2.0), c2=st.floats(1.0, 2.0),
       w1=st.floats(0.05, 0.15), w2=st.floats(0.05, 0.15))
def test_smeared_delta_pairing_gaussian_product(c1, c2, w1, w2):
    # two pure-delta kernels: the pairing collapses to Int f(nu) g(nu) dnu
    f = gaussian_bump(c1, w1)
    g = gaussian_bump(c2, w2)
    cfg = QuadratureConfig(decay_scale=1.0)
    value = smeared_delta_pairing(
        lambda nu: SingularKernel(None, delta_coeff=1.0),
        lambda nu: SingularKernel(None, delta_coeff=1.0),
        f, g, cfg)
    s2 = w1 * w1 + w2 * w2
    exact = math.sqrt(2.0 * math.pi) * w1 * w2 / math.sqrt(s2) * math.exp(
        -0.5 * (c1 - c2) ** 2 / s2)
    assert value == pytest.approx(exact, rel=1e-6, abs=1e-12)


def test_panel_grid_type():
    grid = build_panel_grid([0.0, 1.0], 4)
    assert isinstance(grid, PanelGrid)
    assert np.all(np.diff(grid.nodes) > 0.0)
    assert np.all(grid.weights > 0.0)
