"""Ground state of a harmonically bound charge dressed by a 1-D field.

The library solves the quadratic atom-field model exactly: the coupled
normal modes in the continuum, the resonance they produce, and every
Gaussian ground-state observable built from them.  `oracle` carries an
independent finite-mode diagonalization used to validate the continuum
route, and `pair` the two-oscillator closed forms it reduces to.
"""

from .errors import (
    ChiRangeError,
    ConfigError,
    DifferentiationError,
    DressedError,
    GridRefinementError,
    InstabilityError,
    NumericalError,
    QuadratureError,
    ThresholdError,
    UnitsModeError,
)
from .model import (
    ModelParams,
    coupling_v,
    coupling_v2,
    derived_frequencies,
    renormalized_frequency,
    threshold_frequency,
)
from .fano import (
    FanoCoefficients,
    PiDistribution,
    Resonance,
    alpha_beta,
    gamma_delta,
    pi_distribution,
    pi_quadrature,
    resonance,
)
from .observables import (
    CorrelationSet,
    MomentSet,
    PhotonSpectrum,
    atom_field_correlations,
    compute_moments,
    field_coherence,
    photon_spectral_density,
)
from .chifunc import (
    TestFunction,
    chi_is_physical,
    evaluate_chi,
    log_chi,
    moment_by_differentiation,
)
from .pair import (
    PairParams,
    pair_correlations,
    pair_ground_energy,
    pair_single_oscillator_energy,
)
from .oracle import (
    CovarianceMatrix,
    DiscretizedModel,
    discretize,
    ground_covariance,
    oracle_chi,
    oracle_observables,
)

__version__ = "0.1.0"

__all__ = [
    "ChiRangeError", "ConfigError", "DifferentiationError", "DressedError",
    "GridRefinementError", "InstabilityError", "NumericalError",
    "QuadratureError", "ThresholdError", "UnitsModeError",
    "ModelParams", "coupling_v", "coupling_v2", "derived_frequencies",
    "renormalized_frequency", "threshold_frequency",
    "FanoCoefficients", "PiDistribution", "Resonance", "alpha_beta",
    "gamma_delta", "pi_distribution", "pi_quadrature", "resonance",
    "CorrelationSet", "MomentSet", "PhotonSpectrum",
    "atom_field_correlations", "compute_moments", "field_coherence",
    "photon_spectral_density",
    "TestFunction", "chi_is_physical", "evaluate_chi", "log_chi",
    "moment_by_differentiation",
    "PairParams", "pair_correlations", "pair_ground_energy",
    "pair_single_oscillator_energy",
    "CovarianceMatrix", "DiscretizedModel", "discretize",
    "ground_covariance", "oracle_chi", "oracle_observables",
    "__version__",
]
