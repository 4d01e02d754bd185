import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dressed import (
    ConfigError,
    ModelParams,
    ThresholdError,
    UnitsModeError,
    coupling_v,
    coupling_v2,
    derived_frequencies,
    renormalized_frequency,
    threshold_frequency,
)
from dressed.model import (
    cutoff_bound_frequency,
    dipole_validity,
    electron_coupling_time,
    figure_frequency_unit,
    physical_coupling_prefactor,
)


def test_reference_derived_frequencies(ref_params):
    d = derived_frequencies(ref_params)
    assert d.omega_t == pytest.approx(0.02, rel=1e-15)
    assert d.omega0_renorm == pytest.approx(math.sqrt(0.24), rel=1e-15)


def test_threshold_quadrature_matches_closed_form(ref_params):
    analytic = threshold_frequency(ref_params, method="analytic")
    quad = threshold_frequency(ref_params, method="quadrature")
    assert abs(quad - analytic) / analytic < 1e-10


@given(a=st.floats(1e-4, 0.2), wc=st.floats(0.3, 4.0))
def test_threshold_quadrature_property(a, wc):
    p = ModelParams(omega0=1.0, coupling_scale=a, omega_c=wc)
    analytic = 2.0 * a * wc**3
    assert threshold_frequency(p) == pytest.approx(analytic, rel=1e-14)
    assert threshold_frequency(p, "quadrature") == pytest.approx(analytic, rel=1e-9)


def test_threshold_unknown_method(ref_params):
    with pytest.raises(ConfigError):
        threshold_frequency(ref_params, method="montecarlo")


def test_coupling_shape(ref_params):
    w = np.array([0.0, 0.5, 1.0, 3.0])
    v2 = coupling_v2(ref_params, w)
    assert v2[0] == 0.0
    assert np.all(np.diff(v2[:3]) > 0.0)  # rising below the 3 omega_c max
    np.testing.assert_allclose(
        v2, 0.01 * w**3 * np.exp(-w), rtol=1e-15)
    np.testing.assert_allclose(coupling_v(ref_params, w), np.sqrt(v2), rtol=1e-15)
    assert isinstance(coupling_v2(ref_params, 1.0), float)
    with pytest.raises(ValueError):
        coupling_v2(ref_params, -1.0)


def test_renormalized_frequency_threshold_gate():
    with pytest.raises(ThresholdError) as err:
        renormalized_frequency(ModelParams(omega0=0.02, coupling_scale=0.01))
    assert err.value.omega0 == 0.02
    # softening: renormalized frequency always below the bare one
    p = ModelParams(omega0=0.5, coupling_scale=0.01)
    assert renormalized_frequency(p) < p.omega0


def test_params_validation():
    with pytest.raises(ConfigError):
        ModelParams(omega0=-1.0, coupling_scale=0.01)
    with pytest.raises(ConfigError):
        ModelParams(omega0=1.0, coupling_scale=-0.01)
    with pytest.raises(ConfigError):
        ModelParams(omega0=1.0, coupling_scale=0.01, omega_c=0.0)
    with pytest.raises(ConfigError):
        ModelParams(omega0=1.0, coupling_scale=0.01, units_mode="natural")


def test_physical_units_reduce_consistently():
    # an electron-like configuration: omega0 = 1e15 rad/s, cutoff 100x higher
    c_time = electron_coupling_time()
    p = ModelParams(omega0=1e15, coupling_scale=c_time, omega_c=1e17,
                    units_mode="physical")
    red = p.to_reduced()
    assert red.units_mode == "reduced"
    assert red.omega_c == 1.0
    assert red.omega0 == pytest.approx(1e-2, rel=1e-12)
    # same dimensionless amplitude through both routes
    assert red.coupling_scale == pytest.approx(p.reduced_amplitude, rel=1e-12)
    # the threshold maps with the same omega_c rescaling as every frequency
    assert threshold_frequency(p) / p.omega_c == pytest.approx(
        threshold_frequency(red), rel=1e-12)


def test_dipole_validity_modes():
    with pytest.raises(UnitsModeError):
        dipole_validity(ModelParams(omega0=0.5, coupling_scale=0.01))
    ratio, ok = dipole_validity(
        ModelParams(omega0=1e15, coupling_scale=electron_coupling_time(),
                    omega_c=1e17, units_mode="physical"))
    assert ok and 0.0 < ratio < 1e-3


def test_prefactor_identity():
    ham, field = physical_coupling_prefactor()
    from scipy import constants as const
    e, m, hbar = const.elementary_charge, const.m_e, const.hbar
    assert ham == pytest.approx(e * math.sqrt(hbar / (2.0 * m)) * field,
                                rel=1e-12)
    with pytest.raises(ValueError):
        physical_coupling_prefactor(e=-1.0)


@given(a=st.floats(1e-4, 0.4), w0=st.floats(0.05, 3.0))
def test_cutoff_bound_is_the_threshold_boundary(a, w0):
    p = ModelParams(omega0=w0, coupling_scale=a)
    wc_star = cutoff_bound_frequency(p)
    below = ModelParams(omega0=w0, coupling_scale=a, omega_c=0.99 * wc_star)
    above = ModelParams(omega0=w0, coupling_scale=a, omega_c=1.01 * wc_star)
    assert threshold_frequency(below) < w0 < threshold_frequency(above)


def test_cutoff_bound_uncoupled():
    assert cutoff_bound_frequency(
        ModelParams(omega0=1.0, coupling_scale=0.0)) == math.inf


def test_figure_unit_positive(ref_params):
    unit = figure_frequency_unit(ref_params)
    assert unit == pytest.approx(0.5 * math.pi * 0.01 * 0.5, rel=1e-15)
