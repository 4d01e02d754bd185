"""Independent finite-mode ground truth for every continuum observable.

The continuum is replaced by M discrete modes from a positive quadrature
rule, giving the exact quadratic Hamiltonian

    H = 1/2 p^T p + 1/2 x^T K x   (mass-scaled coordinates),

with the arrowhead stiffness matrix  K00 = omega0^2, Kjj = omega_j^2,
K0j = V_j sqrt(omega0 omega_j), V_j = V(omega_j) sqrt(w_j).  Because the
interaction couples only position quadratures, the ground state needs no
Bogoliubov machinery: its covariances are matrix square roots,

    <x x^T> = 1/2 K^{-1/2},   <p p^T> = 1/2 K^{+1/2},

from one real-symmetric eigendecomposition.  Ladder-operator moments follow
from the standard dictionary, and dividing by the quadrature weights maps
mode sums back to continuum densities.  Nothing here touches the
diagonalization formulas being validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import roots_laguerre

from .errors import ConfigError, NumericalError, ThresholdError
from .model import ModelParams, coupling_v
from .quadrature import QuadratureConfig

RULES = ("linear-panel", "gauss-laguerre-scaled")


@dataclass(frozen=True, eq=False)
class DiscretizedModel:
    """M bath modes (nodes, weights, couplings) plus the atom frequency."""

    params: ModelParams
    omegas: np.ndarray
    weights: np.ndarray
    couplings: np.ndarray
    rule: str = "manual"

    @property
    def size(self) -> int:
        return len(self.omegas)

    def discretized_threshold(self) -> float:
        """sum V_j^2/omega_j: the rule's approximation to omega_T."""
        return float(np.sum(self.couplings**2 / self.omegas))


def _linear_panel_nodes(params: ModelParams, m: int):
    """Open midpoint panels: a geometric block resolving omega -> 0 and a
    uniform bulk out to the decay cutoff.  Second order in the panel width,
    so oracle errors shrink predictably as M grows; nothing in the layout
    depends on the solution being validated."""
    x_max = QuadratureConfig(decay_scale=params.omega_c).upper_limit
    n_low = min(max(1, int(round(0.12 * m))), m - 1)
    n_bulk = m - n_low
    h = x_max / n_bulk
    # V^2 ~ omega^3 kills the deep IR; stopping at 1e-4 omega_c keeps the
    # smallest stiffness eigenvalue well above eigh's roundoff floor
    lo_floor = min(1e-4 * params.omega_c, 0.5 * h)
    ratio = (lo_floor / h) ** (1.0 / n_low)
    low_edges = [0.0] + [h * ratio**k for k in range(n_low - 1, 0, -1)]
    edges = np.unique(np.concatenate([low_edges,
                                      np.linspace(h, x_max, n_bulk + 1)]))
    nodes = 0.5 * (edges[:-1] + edges[1:])
    return nodes, np.diff(edges)


def discretize(params: ModelParams, m: int,
               rule: str = "linear-panel") -> DiscretizedModel:
    """Build the M-mode stand-in for the continuum."""
    if m < 1:
        raise ConfigError("mode count must be >= 1")
    if rule not in RULES:
        raise ConfigError(f"unknown discretization rule {rule!r}; use one of {RULES}")
    if m == 1:
        omegas = np.array([params.omega0])
        weights = np.array([1.0])
    elif rule == "linear-panel":
        omegas, weights = _linear_panel_nodes(params, m)
    else:
        x, lam = roots_laguerre(m)
        if np.max(x) > 700.0:
            raise ConfigError(
                f"gauss-laguerre-scaled order {m} puts its largest node at "
                f"{np.max(x):.1f}, beyond the exp range of the weight "
                "correction; use rule='linear-panel'"
            )
        omegas = params.omega_c * x
        weights = params.omega_c * lam * np.exp(x)
    couplings = coupling_v(params, omegas) * np.sqrt(weights)
    return DiscretizedModel(params=params, omegas=omegas, weights=weights,
                            couplings=couplings, rule=rule)


def stiffness(dm: DiscretizedModel) -> np.ndarray:
    """The (M+1)x(M+1) arrowhead stiffness matrix (atom row/column first)."""
    m = dm.size
    k = np.zeros((m + 1, m + 1))
    k[0, 0] = dm.params.omega0**2
    idx = np.arange(1, m + 1)
    k[idx, idx] = dm.omegas**2
    border = dm.couplings * np.sqrt(dm.params.omega0 * dm.omegas)
    k[0, 1:] = border
    k[1:, 0] = border
    return k


def is_positive_definite(dm: DiscretizedModel) -> bool:
    try:
        np.linalg.cholesky(stiffness(dm))
        return True
    except np.linalg.LinAlgError:
        return False


def effective_atom_frequency(dm: DiscretizedModel) -> float:
    """sqrt of the stiffness matrix's Schur complement at the atom:
    the discrete renormalized frequency (converges from the node rule)."""
    val = dm.params.omega0**2 - dm.params.omega0 * dm.discretized_threshold()
    if val <= 0.0:
        raise ThresholdError(dm.params.omega0, dm.discretized_threshold())
    return math.sqrt(val)


class CovarianceMatrix:
    """Ground-state covariances <x x^T> = K^{-1/2}/2, <p p^T> = K^{1/2}/2.

    Stores the eigendecomposition; rows, diagonals, or full blocks are
    assembled on demand (full blocks are O((M+1)^2) memory each).
    """

    def __init__(self, dm: DiscretizedModel):
        self.dm = dm
        k = stiffness(dm)
        try:
            np.linalg.cholesky(k)
        except np.linalg.LinAlgError:
            raise ThresholdError(
                dm.params.omega0, dm.discretized_threshold(),
                message=(
                    "discretized stiffness matrix not positive definite: "
                    "coupling at or beyond the binding threshold"
                ),
            ) from None
        lam, u = np.linalg.eigh(k)
        if lam[0] <= 0.0:
            raise NumericalError(
                f"stiffness eigenvalue {lam[0]:.3e} lost to roundoff; "
                "discretization reaches frequencies too small to resolve"
            )
        self.eigenvalues = lam
        self.eigenvectors = u
        self._sqrt = np.sqrt(lam)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def x_row(self, i: int) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * u @ (u[i] / self._sqrt)

    def p_row(self, i: int) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * u @ (u[i] * self._sqrt)

    def x_diag(self) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * np.einsum("in,n,in->i", u, 1.0 / self._sqrt, u)

    def p_diag(self) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * np.einsum("in,n,in->i", u, self._sqrt, u)

    def x_block(self) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * (u / self._sqrt) @ u.T

    def p_block(self) -> np.ndarray:
        u = self.eigenvectors
        return 0.5 * (u * self._sqrt) @ u.T

    def x_entry(self, i: int, j: int) -> float:
        u = self.eigenvectors
        return float(0.5 * np.sum(u[i] * u[j] / self._sqrt))

    def p_entry(self, i: int, j: int) -> float:
        u = self.eigenvectors
        return float(0.5 * np.sum(u[i] * u[j] * self._sqrt))

    @cached_property
    def total_energy(self) -> float:
        """Ground energy 1/2 sum of normal-mode frequencies."""
        return float(0.5 * np.sum(self._sqrt))


def ground_covariance(dm: DiscretizedModel) -> CovarianceMatrix:
    return CovarianceMatrix(dm)


def nearest_node_indices(dm: DiscretizedModel, freqs) -> np.ndarray:
    """Indices (into the bath arrays) of the nodes closest to freqs."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.array([int(np.argmin(np.abs(dm.omegas - f))) for f in freqs])


def oracle_observables(cov: CovarianceMatrix, dm: DiscretizedModel,
                       density_freqs=None, coherence_pairs=None,
                       correlation_freqs=None) -> dict:
    """Continuum-comparable observables from the covariance blocks.

    density_freqs / correlation_freqs: target frequencies; values are
    computed at the nearest bath node and reported with that node.
    coherence_pairs: (f1, f2) tuples for <b b> coherences.
    """
    w0 = dm.params.omega0
    out: dict = {}
    cx00 = cov.x_entry(0, 0)
    cp00 = cov.p_entry(0, 0)
    var_x = 2.0 * w0 * cx00
    var_p = 2.0 * cp00 / w0
    out["var_x"] = var_x
    out["var_p"] = var_p
    out["mean_excitation"] = 0.25 * (var_x + var_p - 2.0)
    out["a_squared"] = 0.25 * (var_x - var_p)
    out["avg_omega"] = w0 * var_p
    out["avg_inv_omega"] = var_x / w0
    out["total_energy"] = cov.total_energy

    if density_freqs is not None:
        idx = nearest_node_indices(dm, density_freqs)
        xd = cov.x_diag()[1:]
        pd = cov.p_diag()[1:]
        occ = 0.5 * (dm.omegas * xd + pd / dm.omegas - 1.0)
        out["density_nodes"] = dm.omegas[idx]
        out["density"] = occ[idx] / dm.weights[idx]
        out["total_number"] = float(np.sum(occ))
    if coherence_pairs is not None:
        vals = []
        nodes = []
        for f1, f2 in coherence_pairs:
            j = int(nearest_node_indices(dm, f1)[0])
            k = int(nearest_node_indices(dm, f2)[0])
            wj, wk = dm.omegas[j], dm.omegas[k]
            root = math.sqrt(wj * wk)
            bb = 0.5 * (root * cov.x_entry(j + 1, k + 1)
                        - cov.p_entry(j + 1, k + 1) / root)
            vals.append(bb / math.sqrt(dm.weights[j] * dm.weights[k]))
            nodes.append((wj, wk))
        out["coherence_nodes"] = nodes
        out["coherence_bb"] = np.array(vals)
    if correlation_freqs is not None:
        idx = nearest_node_indices(dm, correlation_freqs)
        x0 = cov.x_row(0)[1:]
        p0 = cov.p_row(0)[1:]
        root = np.sqrt(w0 * dm.omegas)
        xbp = 2.0 * root * x0
        pbm = 2.0 * p0 / root
        ab = 0.5 * (root * x0 - p0 / root)
        out["correlation_nodes"] = dm.omegas[idx]
        out["x_b_plus"] = (xbp / np.sqrt(dm.weights))[idx]
        out["p_b_minus"] = (pbm / np.sqrt(dm.weights))[idx]
        out["cross_ab"] = (ab / np.sqrt(dm.weights))[idx]
    return out


def oracle_chi(cov: CovarianceMatrix, dm: DiscretizedModel, eta: complex,
               xi_at_nodes: np.ndarray | None = None) -> complex:
    """Normal-ordered characteristic function of the discrete Gaussian
    ground state at (eta, xi): the independent check for the continuum
    functional.  xi_at_nodes are xi(omega_j); mode arguments enter as
    zeta_j = xi(omega_j) sqrt(w_j)."""
    m = dm.size
    zeta = np.zeros(m + 1, dtype=complex)
    zeta[0] = eta
    if xi_at_nodes is not None:
        zeta[1:] = np.asarray(xi_at_nodes, dtype=complex) * np.sqrt(dm.weights)
    freqs = np.concatenate([[dm.params.omega0], dm.omegas])
    sq = np.sqrt(freqs)
    cx = cov.x_block()
    cp = cov.p_block()
    mm = 0.5 * (np.outer(sq, sq) * cx - cp / np.outer(sq, sq))
    nm = 0.5 * (np.outer(sq, sq) * cx + cp / np.outer(sq, sq)) \
        - 0.5 * np.eye(m + 1)
    ln_chi = (0.5 * zeta @ mm @ zeta
              + 0.5 * np.conj(zeta) @ mm @ np.conj(zeta)
              - np.conj(zeta) @ nm @ zeta)
    return complex(np.exp(ln_chi))


def convergence_study(params: ModelParams, m_list,
                      reference: dict, density_freqs, coherence_pairs,
                      correlation_freqs, rule: str = "linear-panel") -> list[dict]:
    """Relative errors of the oracle against continuum reference values.

    reference holds the continuum numbers keyed like oracle_observables
    output; returns one row per M with the per-observable relative errors.
    """
    rows = []
    for m in m_list:
        dm = discretize(params, int(m), rule)
        cov = ground_covariance(dm)
        # evaluate continuum quantities at the oracle's own nodes
        obs = oracle_observables(
            cov, dm, density_freqs=density_freqs,
            coherence_pairs=coherence_pairs,
            correlation_freqs=correlation_freqs,
        )
        row = {"m": int(m)}
        for key in ("mean_excitation", "a_squared", "var_x", "var_p"):
            row[key] = abs(obs[key] - reference[key]) / abs(reference[key])
        for key in ("density", "coherence_bb", "x_b_plus"):
            ref_fn = reference[key]
            if key == "coherence_bb":
                ref_vals = np.array([ref_fn(f1, f2)
                                     for (f1, f2) in obs["coherence_nodes"]])
            elif key == "density":
                ref_vals = ref_fn(obs["density_nodes"])
            else:
                ref_vals = ref_fn(obs["correlation_nodes"])
            got = np.asarray(obs[key], dtype=float)
            row[key] = float(np.max(np.abs(got - ref_vals) / np.abs(ref_vals)))
        rows.append(row)
    return rows
