"""Entropic quantities: entropies, relative entropies and mutual informations.

Everything is reported in nats.  The two quantum relative entropies live in a
fixed ordering, together with the geometric Renyi family and an operator-norm
upper bound; that chain is the backbone the experiment harness checks at
every sweep point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrder, NotAState, SingularOperator, SupportMismatch
from .hamiltonians import GibbsEnsemble, reduced_state
from .operators import (
    Operator,
    compose,
    matrix_function,
    operator_norm,
    partial_trace,
    spectral_decomposition,
    trace_norm,
)

# Eigenvalues below this are treated as exact zeros in 0*log(0).
_ENTROPY_FLOOR = 1e-15
_STATE_TOL = 1e-10
_FULL_RANK_RTOL = 1e-13


@dataclass(frozen=True)
class DivergenceReport:
    """All divergences between one pair of states, in chain order."""

    umegaki: float
    bs: float
    geometric_renyi: dict[float, float]
    upper_bound_norm: float


def _state_spectrum(rho: Operator, *, full_rank: bool = False):
    spec = spectral_decomposition(rho)
    w = spec.eigenvalues
    tr = float(np.sum(w))
    if abs(tr - 1.0) > _STATE_TOL:
        raise NotAState(f"trace {tr} deviates from 1 beyond {_STATE_TOL}")
    if w.min() < -_STATE_TOL:
        raise NotAState(f"negative eigenvalue {w.min():.3e}")
    if full_rank and w.min() <= _FULL_RANK_RTOL * max(w.max(), 0.0):
        raise SingularOperator(f"state is numerically singular, min eig {w.min():.3e}")
    return spec


def _check_pair(rho: Operator, sigma: Operator):
    if rho.support != sigma.support or rho.local_dim != sigma.local_dim:
        raise SupportMismatch(
            f"states live on different supports: {rho.support} vs {sigma.support}"
        )


def von_neumann_entropy(rho: Operator) -> float:
    """-Tr[rho log rho]; zero eigenvalues contribute nothing."""
    spec = _state_spectrum(rho)
    w = np.clip(spec.eigenvalues, 0.0, None)
    w = w[w > _ENTROPY_FLOOR]
    return float(-np.sum(w * np.log(w)))


def umegaki(rho: Operator, sigma: Operator) -> float:
    """Tr[rho (log rho - log sigma)] for full-rank states on one support."""
    _check_pair(rho, sigma)
    spec_r = _state_spectrum(rho, full_rank=True)
    spec_s = _state_spectrum(sigma, full_rank=True)
    wr = spec_r.eigenvalues
    plus = float(np.sum(wr * np.log(wr)))
    # Tr[rho log sigma] in sigma's eigenbasis needs only the diagonal there.
    rot = spec_s.eigenvectors.conj().T @ rho.matrix @ spec_s.eigenvectors
    minus = float(np.real(np.sum(np.diagonal(rot) * np.log(spec_s.eigenvalues))))
    return plus - minus


def bs_entropy(rho: Operator, sigma: Operator) -> float:
    """Tr[rho log(rho^{1/2} sigma^{-1} rho^{1/2})].

    Evaluated in this sandwiched form (rather than log(sigma^{-1} rho)) so the
    argument of the logarithm stays Hermitian positive definite; the two forms
    agree analytically.
    """
    _check_pair(rho, sigma)
    spec_r = _state_spectrum(rho, full_rank=True)
    spec_s = _state_spectrum(sigma, full_rank=True)
    sqrt_r = spec_r.apply(np.sqrt)
    inv_s = spec_s.apply(lambda x: 1.0 / x)
    core = sqrt_r @ inv_s @ sqrt_r
    core = (core + core.conj().T) / 2.0
    log_core = spectral_decomposition(Operator(rho.support, core, rho.local_dim)).apply(np.log)
    return float(np.real(np.trace(rho.matrix @ log_core)))


def geometric_renyi(rho: Operator, sigma: Operator, q: float) -> float:
    """q-geometric Renyi divergence, q > 1; decreases to bs_entropy as q -> 1+."""
    if q <= 1:
        raise InvalidOrder(f"geometric Renyi order must exceed 1, got {q}")
    _check_pair(rho, sigma)
    _state_spectrum(rho, full_rank=True)
    spec_s = _state_spectrum(sigma, full_rank=True)
    inv_sqrt_s = spec_s.apply(lambda x: 1.0 / np.sqrt(x))
    g = inv_sqrt_s @ rho.matrix @ inv_sqrt_s
    g = (g + g.conj().T) / 2.0
    g_q = spectral_decomposition(Operator(rho.support, g, rho.local_dim)).apply(
        lambda x: np.clip(x, _ENTROPY_FLOOR, None) ** q
    )
    val = float(np.real(np.trace(sigma.matrix @ g_q)))
    return float(np.log(val) / (q - 1.0))


def upper_bound_norm(rho: Operator, sigma: Operator) -> float:
    """Operator norm of sigma^{-1} rho - 1, an upper bound on the whole chain."""
    _check_pair(rho, sigma)
    _state_spectrum(sigma, full_rank=True)
    inv_s = matrix_function(sigma, "inv")
    diff = compose(inv_s, rho) - Operator.identity(rho.support, rho.local_dim)
    return operator_norm(diff)


DEFAULT_Q_GRID = (1.01, 1.1, 1.5, 2.0)


def divergence_report(rho: Operator, sigma: Operator, q_values=DEFAULT_Q_GRID) -> DivergenceReport:
    return DivergenceReport(
        umegaki=umegaki(rho, sigma),
        bs=bs_entropy(rho, sigma),
        geometric_renyi={q: geometric_renyi(rho, sigma, q) for q in q_values},
        upper_bound_norm=upper_bound_norm(rho, sigma),
    )


# -- mutual informations -------------------------------------------------------


def _bipartite_marginals(ensemble: GibbsEnsemble, region_a, region_c):
    a_sites = set(region_a.sites) if hasattr(region_a, "sites") else {int(s) for s in region_a}
    c_sites = set(region_c.sites) if hasattr(region_c, "sites") else {int(s) for s in region_c}
    if a_sites & c_sites:
        raise ValueError("regions A and C must be disjoint")
    rho_ac = reduced_state(ensemble, a_sites | c_sites)
    rho_a = partial_trace(rho_ac, c_sites)
    rho_c = partial_trace(rho_ac, a_sites)
    return rho_ac, rho_a, rho_c


def mutual_information(ensemble: GibbsEnsemble, region_a, region_c) -> float:
    """I(A:C) = D(rho_AC || rho_A (x) rho_C) for the ensemble's thermal state."""
    rho_ac, rho_a, rho_c = _bipartite_marginals(ensemble, region_a, region_c)
    return umegaki(rho_ac, compose(rho_a, rho_c))


def bs_mutual_information(ensemble: GibbsEnsemble, region_a, region_c) -> float:
    rho_ac, rho_a, rho_c = _bipartite_marginals(ensemble, region_a, region_c)
    return bs_entropy(rho_ac, compose(rho_a, rho_c))


def geometric_renyi_mi(ensemble: GibbsEnsemble, region_a, region_c, q: float = 2.0) -> float:
    rho_ac, rho_a, rho_c = _bipartite_marginals(ensemble, region_a, region_c)
    return geometric_renyi(rho_ac, compose(rho_a, rho_c), q)


def mi_upper_bound_norm(ensemble: GibbsEnsemble, region_a, region_c) -> float:
    """Operator norm of rho_A^{-1} (x) rho_C^{-1} rho_AC - 1."""
    rho_ac, rho_a, rho_c = _bipartite_marginals(ensemble, region_a, region_c)
    inv_prod = compose(matrix_function(rho_a, "inv"), matrix_function(rho_c, "inv"))
    diff = compose(inv_prod, rho_ac) - Operator.identity(rho_ac.support, rho_ac.local_dim)
    return operator_norm(diff)


def trace_distance_to_product(ensemble: GibbsEnsemble, region_a, region_c) -> float:
    """Trace norm of rho_AC - rho_A (x) rho_C."""
    rho_ac, rho_a, rho_c = _bipartite_marginals(ensemble, region_a, region_c)
    return trace_norm(rho_ac - compose(rho_a, rho_c))


def conditional_mutual_information(ensemble: GibbsEnsemble, region_a, region_b, region_c) -> float:
    """S(AB) + S(BC) - S(B) - S(ABC) on the ensemble's thermal state."""
    sets = []
    for region in (region_a, region_b, region_c):
        sites = set(region.sites) if hasattr(region, "sites") else {int(s) for s in region}
        sets.append(sites)
    a, b, c = sets
    if (a & b) or (a & c) or (b & c):
        raise ValueError("regions A, B, C must be pairwise disjoint")
    s_ab = von_neumann_entropy(reduced_state(ensemble, a | b))
    s_bc = von_neumann_entropy(reduced_state(ensemble, b | c))
    s_b = von_neumann_entropy(reduced_state(ensemble, b)) if b else 0.0
    s_abc = von_neumann_entropy(reduced_state(ensemble, a | b | c))
    return s_ab + s_bc - s_b - s_abc
