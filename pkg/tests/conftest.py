import pytest
from hypothesis import HealthCheck, settings

from dressed import ModelParams, compute_moments, pi_quadrature

settings.register_profile(
    "suite", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# the parameter set most tests run on: weak coupling, comfortably below
# threshold (omega_T = 0.02), resonance at 0.48903 with width 5.7e-4
REF = dict(omega0=0.5, coupling_scale=0.01, omega_c=1.0)


@pytest.fixture(scope="session")
def ref_params():
    return ModelParams(**REF)


@pytest.fixture(scope="session")
def ref_pi(ref_params):
    return pi_quadrature(ref_params)


@pytest.fixture(scope="session")
def ref_moments(ref_params, ref_pi):
    return compute_moments(ref_params, ref_pi)
