"""Recovery products, the tripartite factorization identity and correlation
measures on A | B | C partitions of a chain.

The exact identity implemented by ``step1_factorization`` rewrites
rho_A^{-1} rho_C^{-1} rho_AC as a product of expansional-weighted partial
traces times a scalar; because it couples Gibbs construction, partial traces
and expansionals in one equation, its residual is the strongest single
cross-check in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NumericalInconsistency
from .expansionals import expansional
from .hamiltonians import GibbsEnsemble, Interaction, gibbs_state, log_partition, reduced_state
from .operators import (
    Interval,
    Operator,
    _permute_factors,
    compose,
    embed,
    inverse,
    matrix_function,
    operator_norm,
    partial_trace,
    trace_norm,
)


@dataclass(frozen=True)
class Partition:
    """Contiguous blocks A, B, C covering an interval, B shielding A from C.

    B may be empty (b_size = 0) where the quantity under study allows it.
    """

    interval: Interval
    a_size: int
    b_size: int
    c_size: int

    def __post_init__(self):
        if self.a_size < 1 or self.c_size < 1 or self.b_size < 0:
            raise ValueError("need |A| >= 1, |C| >= 1 and |B| >= 0")
        if self.a_size + self.b_size + self.c_size != self.interval.size:
            raise ValueError("block sizes must cover the interval exactly")

    @property
    def a_block(self) -> Interval:
        lo = self.interval.lo
        return Interval(lo, lo + self.a_size - 1, self.interval.local_dim)

    @property
    def b_block(self) -> Interval | None:
        if self.b_size == 0:
            return None
        lo = self.interval.lo + self.a_size
        return Interval(lo, lo + self.b_size - 1, self.interval.local_dim)

    @property
    def c_block(self) -> Interval:
        hi = self.interval.hi
        return Interval(hi - self.c_size + 1, hi, self.interval.local_dim)

    @property
    def a_sites(self) -> tuple[int, ...]:
        return self.a_block.sites

    @property
    def b_sites(self) -> tuple[int, ...]:
        return self.b_block.sites if self.b_size else ()

    @property
    def c_sites(self) -> tuple[int, ...]:
        return self.c_block.sites

    @property
    def ab_block(self) -> Interval:
        return Interval(self.interval.lo, self.a_block.hi + self.b_size, self.interval.local_dim)

    @property
    def bc_block(self) -> Interval:
        return Interval(self.c_block.lo - self.b_size, self.interval.hi, self.interval.local_dim)


def _check_partition(ensemble: GibbsEnsemble, partition: Partition):
    if partition.interval != ensemble.interval:
        raise ValueError("partition interval differs from the ensemble interval")


# -- recovery product ----------------------------------------------------------


def bs_recovery_product(ensemble: GibbsEnsemble, partition: Partition) -> Operator:
    """rho_AB rho_B^{-1} rho_BC from the marginals of the ensemble state.

    With empty B the middle factor is the scalar 1 and the product reduces to
    rho_A (x) rho_C.
    """
    _check_partition(ensemble, partition)
    rho_ab = reduced_state(ensemble, partition.a_sites + partition.b_sites)
    rho_bc = reduced_state(ensemble, partition.b_sites + partition.c_sites)
    if partition.b_size == 0:
        return compose(rho_ab, rho_bc)
    rho_b = reduced_state(ensemble, partition.b_sites)
    return compose(compose(rho_ab, matrix_function(rho_b, "inv")), rho_bc)


def recovery_distance(ensemble: GibbsEnsemble, partition: Partition) -> float:
    """Trace-norm distance of the state from its recovery product."""
    product = bs_recovery_product(ensemble, partition)
    return trace_norm(ensemble.state - product)


# -- the factorization identity --------------------------------------------------


class Step1Result(NamedTuple):
    rhs: Operator
    lam: complex
    residual: float


def _range_extended_trace(op: Operator, traced, full_sites) -> Operator:
    """Partial trace that keeps the ambient algebra: trace, then pad with
    identity back onto the full site set."""
    return embed(partial_trace(op, traced), full_sites)


def _step1_pieces(ensemble: GibbsEnsemble, partition: Partition):
    _check_partition(ensemble, partition)
    if partition.b_size < 1:
        raise ValueError("the factorization identity needs a nonempty middle block")
    inter, beta = ensemble.interaction, ensemble.beta
    a_blk, b_blk, c_blk = partition.a_block, partition.b_block, partition.c_block
    ab_blk, bc_blk = partition.ab_block, partition.bc_block
    full = ensemble.interval.sites

    e_a_bc = expansional(inter, a_blk, bc_blk, s=1.0, beta=beta)
    e_ab_c = expansional(inter, ab_blk, c_blk, s=1.0, beta=beta)
    e_a_b = expansional(inter, a_blk, b_blk, s=1.0, beta=beta)

    rho_b = embed(gibbs_state(inter, b_blk, beta).state, full)
    rho_ab = gibbs_state(inter, ab_blk, beta).state
    rho_bc = gibbs_state(inter, bc_blk, beta).state

    t_bc = _range_extended_trace(
        compose(embed(rho_bc, full), e_a_bc.dagger()), bc_blk.sites, full
    )
    t_ab = _range_extended_trace(
        compose(embed(rho_ab, full), e_ab_c.dagger()), ab_blk.sites, full
    )
    t_b = _range_extended_trace(
        compose(compose(rho_b, e_a_b.dagger()), e_ab_c.dagger()), b_blk.sites, full
    )

    lam_denominator = compose(ensemble.state, e_a_bc.dagger_inverse()).trace()
    lam_numerator = compose(rho_ab, e_a_b.dagger_inverse()).trace()
    lam = lam_numerator / lam_denominator
    return t_bc, t_ab, t_b, lam


def step1_factorization(ensemble: GibbsEnsemble, partition: Partition) -> Step1Result:
    """Evaluate both sides of the factorization identity and their mismatch.

    Returns the reassembled right-hand side, the scalar lambda, and the
    relative operator-norm residual against rho_A^{-1} rho_C^{-1} rho_AC.
    The identity is exact algebra, so the residual measures accumulated
    floating-point error only.
    """
    t_bc, t_ab, t_b, lam = _step1_pieces(ensemble, partition)
    rhs = compose(compose(inverse(t_bc), inverse(t_ab)), t_b) * lam

    rho_a = reduced_state(ensemble, partition.a_sites)
    rho_c = reduced_state(ensemble, partition.c_sites)
    rho_ac = reduced_state(ensemble, partition.a_sites + partition.c_sites)
    lhs = compose(
        compose(matrix_function(rho_a, "inv"), matrix_function(rho_c, "inv")), rho_ac
    )
    lhs_full = embed(lhs, ensemble.interval.sites)
    residual = operator_norm(lhs_full - rhs) / operator_norm(lhs_full)
    return Step1Result(rhs=rhs, lam=lam, residual=residual)


def _lambda_partition_functions(ensemble: GibbsEnsemble, partition: Partition) -> float:
    """lambda via log partition functions: Z_ABC Z_B / (Z_AB Z_BC)."""
    inter, beta = ensemble.interaction, ensemble.beta
    log_z = lambda block: log_partition(inter, block, beta)
    return float(
        np.exp(
            log_z(ensemble.interval)
            + log_z(partition.b_block)
            - log_z(partition.ab_block)
            - log_z(partition.bc_block)
        )
    )


def lambda_deviation(ensemble: GibbsEnsemble, partition: Partition) -> float:
    """|lambda - 1|, cross-checked against the partition-function ratio.

    The two routes are independent computations of the same scalar; a
    discrepancy beyond 1e-8 means something upstream is numerically wrong and
    is raised rather than returned.
    """
    *_, lam = _step1_pieces(ensemble, partition)
    lam_ratio = _lambda_partition_functions(ensemble, partition)
    if abs(lam - lam_ratio) > 1e-8:
        raise NumericalInconsistency(
            f"lambda mismatch: factorization route {lam}, partition-function route {lam_ratio}"
        )
    return float(abs(lam - 1.0))


# -- operator Schmidt decomposition ---------------------------------------------


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Operator Schmidt data across a cut, coefficients descending.

    ``coefficients`` are the squared singular values of the realignment, so
    they sum to the squared Hilbert-Schmidt norm; the reconstruction is
    sum_j sqrt(coefficients[j]) * left[j] (x) right[j] with HS-orthonormal
    factor lists.
    """

    coefficients: np.ndarray
    left_factors: tuple[Operator, ...]
    right_factors: tuple[Operator, ...]


def operator_schmidt(observable: Operator, cut: int) -> SchmidtDecomposition:
    """SVD of the realignment of ``observable`` across ``cut``.

    Sites strictly below ``cut`` form the left factor space, the rest the
    right one; both must be nonempty.
    """
    left = [s for s in observable.support if s < cut]
    right = [s for s in observable.support if s >= cut]
    if not left or not right:
        raise ValueError(f"cut {cut} does not split support {observable.support}")
    d = observable.local_dim
    dl, dr = d ** len(left), d ** len(right)
    realigned = (
        observable.matrix.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    )
    u, sv, vh = np.linalg.svd(realigned, full_matrices=False)
    lefts = tuple(Operator(left, u[:, j].reshape(dl, dl), d) for j in range(sv.size))
    rights = tuple(Operator(right, vh[j, :].reshape(dr, dr), d) for j in range(sv.size))
    return SchmidtDecomposition(coefficients=sv ** 2, left_factors=lefts, right_factors=rights)


# -- covariance correlation ------------------------------------------------------


@dataclass(frozen=True)
class CorrResult:
    """Certified lower bound on the covariance correlation with its witnesses.

    ``value`` equals |Tr[(witness_a (x) witness_c) (rho_AC - rho_A (x) rho_C)]|
    exactly; ``trace_norm_bound`` is the dual upper bound on the true supremum.
    """

    value: float
    witness_a: Operator
    witness_c: Operator
    restarts_used: int
    converged: bool
    trace_norm_bound: float


def _sign_hermitian(matrix: np.ndarray) -> np.ndarray:
    """Hermitian polar sign; ties at zero eigenvalues resolve to +1."""
    sym = (matrix + matrix.conj().T) / 2.0
    w, u = np.linalg.eigh(sym)
    signs = np.where(w >= 0.0, 1.0, -1.0)
    return (u * signs) @ u.conj().T


def _random_norm_one_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = (m + m.conj().T) / 2.0
    return m / np.abs(np.linalg.eigvalsh(m)).max()


def covariance_correlation(
    source,
    region_a,
    region_c,
    restarts: int = 8,
    max_iters: int = 200,
    tol: float = 1e-10,
    seed: int = 0,
) -> CorrResult:
    """Alternating maximization of |Tr[(O_A (x) O_C) (rho_AC - rho_A (x) rho_C)]|
    over Hermitian observables of operator norm one.

    ``source`` may be a GibbsEnsemble or a density matrix Operator.  Fixing
    one witness, the optimal other one is the Hermitian polar sign of the
    partially contracted difference, so every half-step is exact; restarts
    guard against the bilinear problem's local maxima.  The returned value is
    a lower bound on the supremum; ``trace_norm_bound`` brackets it from above.
    """
    state = source.state if isinstance(source, GibbsEnsemble) else source
    a_sites = tuple(region_a.sites) if hasattr(region_a, "sites") else tuple(sorted(region_a))
    c_sites = tuple(region_c.sites) if hasattr(region_c, "sites") else tuple(sorted(region_c))
    if set(a_sites) & set(c_sites):
        raise ValueError("regions A and C must be disjoint")
    rho_ac = partial_trace(state, set(state.support) - set(a_sites) - set(c_sites))
    rho_a = partial_trace(rho_ac, c_sites)
    rho_c = partial_trace(rho_ac, a_sites)
    delta = rho_ac - compose(rho_a, rho_c)

    d = state.local_dim
    da, dc = d ** len(a_sites), d ** len(c_sites)
    # Reorder factors so all A sites precede all C sites regardless of layout.
    order = [delta.support.index(s) for s in a_sites + c_sites]
    d4 = _permute_factors(delta.matrix, order, d).reshape(da, dc, da, dc)

    def contract_c(o_c: np.ndarray) -> np.ndarray:
        return np.einsum("cx,axbc->ab", o_c, d4)

    def contract_a(o_a: np.ndarray) -> np.ndarray:
        return np.einsum("ax,xcad->cd", o_a, d4)

    best = (-1.0, None, None, False)
    for k in range(restarts):
        rng = np.random.default_rng((int(seed), k))
        o_c = _random_norm_one_hermitian(rng, dc)
        value, converged = 0.0, False
        o_a = _sign_hermitian(contract_c(o_c))
        for _ in range(max_iters):
            o_c = _sign_hermitian(contract_a(o_a))
            o_a = _sign_hermitian(contract_c(o_c))
            new_value = float(np.real(np.einsum("ab,ba->", o_a, contract_c(o_c))))
            if abs(new_value - value) < tol:
                value, converged = new_value, True
                break
            value = new_value
        if value > best[0]:
            best = (value, o_a, o_c, converged)

    value, o_a, o_c, converged = best
    value = float(abs(np.real(np.einsum("ab,ba->", o_a, contract_c(o_c)))))
    return CorrResult(
        value=value,
        witness_a=Operator(a_sites, o_a, d),
        witness_c=Operator(c_sites, o_c, d),
        restarts_used=restarts,
        converged=converged,
        trace_norm_bound=trace_norm(delta),
    )


# -- local indistinguishability ---------------------------------------------------


def local_indistinguishability_gap(
    interaction: Interaction,
    partition: Partition,
    observable: Operator,
    beta: float = 1.0,
    full_ensemble: GibbsEnsemble | None = None,
) -> float:
    """|Tr(rho^{ABC} Q) - Tr(rho^{trunc} Q)| for Q supported in A or in C.

    The truncated state is the Gibbs state of the Hamiltonian cut down to AB
    (for Q in A) or BC (for Q in C).  ``full_ensemble`` may supply a
    precomputed state on the partition interval.
    """
    supp = set(observable.support)
    if supp <= set(partition.a_sites):
        trunc_block = partition.ab_block
    elif supp <= set(partition.c_sites):
        trunc_block = partition.bc_block
    else:
        raise ValueError("observable must be supported inside block A or block C")
    if full_ensemble is not None and (
        full_ensemble.interval == partition.interval and full_ensemble.beta == beta
    ):
        rho_full = full_ensemble.state
    else:
        rho_full = gibbs_state(interaction, partition.interval, beta).state
    rho_trunc = gibbs_state(interaction, trunc_block, beta).state
    full_val = np.real(compose(rho_full, observable).trace())
    trunc_val = np.real(compose(rho_trunc, observable).trace())
    return float(abs(full_val - trunc_val))


def dpi_gap(ensemble: GibbsEnsemble, partition: Partition) -> float:
    """BS-entropy loss under the channel that replaces A by the maximally
    mixed state: D(rho_ABC || rho_AB (x) 1/d_C) - D(rho_BC || rho_B (x) 1/d_C).

    Nonnegative by data processing; its decay is reported descriptively, with
    no rate asserted.
    """
    from .divergences import bs_entropy

    _check_partition(ensemble, partition)
    if partition.b_size < 1:
        raise ValueError("the data-processing gap needs a nonempty middle block")
    d = ensemble.interval.local_dim
    dc = d ** partition.c_size
    rho_ab = reduced_state(ensemble, partition.a_sites + partition.b_sites)
    rho_bc = reduced_state(ensemble, partition.b_sites + partition.c_sites)
    rho_b = reduced_state(ensemble, partition.b_sites)
    ident_c = Operator.identity(partition.c_sites, d)
    sigma_full = compose(rho_ab, ident_c * (1.0 / dc))
    sigma_reduced = compose(rho_b, ident_c * (1.0 / dc))
    return bs_entropy(ensemble.state, sigma_full) - bs_entropy(rho_bc, sigma_reduced)
