"""Complex-time evolutions, interpolation expansionals and locality distances.

The central object is E_{X,Y}(s) = exp(-s H_XY) exp(s H_X + s H_Y) for two
adjacent blocks X, Y: it measures how badly the Hamiltonian fails to split
across the cut.  Its inverse is always the reversed closed-form product,
never a numerical matrix inversion, which keeps it accurate when |s|·||H||
is large.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SiteNotInSupport
from .hamiltonians import Interaction, build_hamiltonian
from .operators import (
    Interval,
    Operator,
    compose,
    conditional_expectation,
    embed,
    matrix_function,
    operator_norm,
    spectral_decomposition,
)

# Real, imaginary and the half-step interpolation points, plus one oblique ray.
DEFAULT_S_GRID = (1.0, 1j, -0.5, 0.5 * (1.0 + 1.0j) / np.sqrt(2.0))


def complex_time_evolution(hamiltonian: Operator, observable: Operator, s: complex) -> Operator:
    """e^{isH} Q e^{-isH}; unitary conjugation whenever s is real."""
    if abs(s) > 1.0 + 1e-12:
        warnings.warn("complex-time evolution outside |s| <= 1; locality bounds may not apply")
    forward = matrix_function(hamiltonian, "cexp", 1j * s)
    backward = matrix_function(hamiltonian, "cexp", -1j * s)
    return compose(compose(forward, observable), backward)


def _check_adjacent(x_block: Interval, y_block: Interval):
    if y_block.lo != x_block.hi + 1:
        raise ValueError(
            f"blocks must be adjacent with X left of Y, got {x_block} and {y_block}"
        )
    if x_block.local_dim != y_block.local_dim:
        raise ValueError("blocks disagree on local dimension")


@dataclass(frozen=True)
class Expansional:
    """E_{X,Y}(s) together with its closed-form inverse."""

    x_block: Interval
    y_block: Interval
    s: complex
    value: Operator
    inverse: Operator

    def dagger(self) -> Operator:
        return self.value.dagger()

    def dagger_inverse(self) -> Operator:
        """(E^dagger)^{-1}, again in closed form."""
        return self.inverse.dagger()


def _sandwiched_exp_product(spec_left, s_left, spec_right, s_right) -> "np.ndarray":
    """exp(s_left A) exp(s_right B) from the eigenbases of A and B.

    Written as U_A (e^{s_left a_i} W_ij e^{s_right b_j}) U_B^dagger with
    W = U_A^dagger U_B, every entry of the middle matrix is one scaled product
    instead of a sum of exponentially large intermediates, which is what makes
    the result accurate when the factors have huge norms but the product does
    not.
    """
    overlap = spec_left.eigenvectors.conj().T @ spec_right.eigenvectors
    mid = (
        np.exp(s_left * spec_left.eigenvalues)[:, None]
        * overlap
        * np.exp(s_right * spec_right.eigenvalues)[None, :]
    )
    return spec_left.eigenvectors @ mid @ spec_right.eigenvectors.conj().T


def expansional(
    interaction: Interaction,
    x_block: Interval,
    y_block: Interval,
    s: complex = 1.0,
    beta: float = 1.0,
) -> Expansional:
    """exp(-s beta H_XY) exp(s beta (H_X + H_Y)) on the joined interval.

    beta multiplies the Hamiltonians, matching the convention that absorbs the
    inverse temperature into the interaction strength.
    """
    _check_adjacent(x_block, y_block)
    whole = Interval(x_block.lo, y_block.hi, x_block.local_dim)
    scale = complex(s) * beta
    h_xy = build_hamiltonian(interaction, whole)
    h_split = embed(build_hamiltonian(interaction, x_block), whole) + embed(
        build_hamiltonian(interaction, y_block), whole
    )
    if scale == 0:
        ident = Operator.identity(whole, whole.local_dim)
        return Expansional(x_block, y_block, complex(s), ident, ident)
    spec_xy = spectral_decomposition(h_xy)
    spec_split = spectral_decomposition(h_split)
    value = Operator(
        whole.sites, _sandwiched_exp_product(spec_xy, -scale, spec_split, scale), whole.local_dim
    )
    inv = Operator(
        whole.sites, _sandwiched_exp_product(spec_split, -scale, spec_xy, scale), whole.local_dim
    )
    return Expansional(x_block, y_block, complex(s), value, inv)


@dataclass(frozen=True)
class ExpansionalBoundRow:
    """Norm data of E_n(s) on the symmetric interval [1-n, n] split at zero."""

    n: int
    s: complex
    norm: float
    inv_norm: float
    diff_norm: float | None  # ||E_n - E_{n+1}||, absent on the last row


@dataclass(frozen=True)
class ExpansionalBoundReport:
    rows: tuple[ExpansionalBoundRow, ...]
    # The uniform constants in the underlying bounds are existence results;
    # this table reports finite-chain suprema, not certified values.
    note: str = "norm columns are empirical suprema from finite chains, not certified constants"


def expansional_bound_report(
    interaction: Interaction,
    max_n: int,
    s_grid=DEFAULT_S_GRID,
    beta: float = 1.0,
) -> ExpansionalBoundReport:
    """Tabulate ||E_n(s)||, ||E_n^{-1}(s)|| and successive differences.

    E_n lives on [1-n, n]; the difference column compares E_n with E_{n+1}
    embedded in the larger interval, so it is only available for n < max_n.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    d = interaction.local_dim
    rows = []
    for s in s_grid:
        values = []
        for n in range(1, max_n + 1):
            e_n = expansional(
                interaction, Interval(1 - n, 0, d), Interval(1, n, d), s=s, beta=beta
            )
            values.append(e_n)
        for i, e_n in enumerate(values):
            diff = None
            if i + 1 < len(values):
                larger = values[i + 1].value
                diff = operator_norm(embed(e_n.value, larger.support) - larger)
            rows.append(
                ExpansionalBoundRow(
                    n=i + 1,
                    s=complex(s),
                    norm=operator_norm(e_n.value),
                    inv_norm=operator_norm(e_n.inverse),
                    diff_norm=diff,
                )
            )
    return ExpansionalBoundReport(rows=tuple(rows))


@dataclass(frozen=True)
class TailDecomposition:
    """Telescoping decomposition of E_{X,Y} into terms of growing support.

    terms[n] is supported on the 2(n+1) innermost sites around the cut; the
    partial sums reconstruct E_{X,Y} exactly at the final index.
    """

    terms: tuple[Operator, ...]
    partial_sum_errors: np.ndarray


def tail_decomposition(
    interaction: Interaction,
    x_block: Interval,
    y_block: Interval,
    beta: float = 1.0,
) -> TailDecomposition:
    _check_adjacent(x_block, y_block)
    d = x_block.local_dim
    n_max = max(x_block.size, y_block.size)
    partials = []
    for n in range(1, n_max + 1):
        x_n = Interval(max(x_block.lo, x_block.hi - n + 1), x_block.hi, d)
        y_n = Interval(y_block.lo, min(y_block.hi, y_block.lo + n - 1), d)
        partials.append(expansional(interaction, x_n, y_n, s=1.0, beta=beta).value)
    terms = [partials[0]]
    for prev, cur in zip(partials, partials[1:]):
        terms.append(cur - embed(prev, cur.support))
    full = partials[-1]
    errors = np.array(
        [operator_norm(embed(p, full.support) - full) for p in partials]
    )
    return TailDecomposition(terms=tuple(terms), partial_sum_errors=errors)


def local_distance_upper(observable: Operator, region) -> float:
    """||Q - E_I(Q)||, a 2-approximation from above of the distance from Q to
    the subalgebra of operators supported in the region."""
    sites = set(region.sites) if isinstance(region, Interval) else {int(s) for s in region}
    kept = [s for s in observable.support if s in sites]
    if not kept:
        raise SiteNotInSupport("region does not intersect the observable support")
    projected = conditional_expectation(observable, kept)
    return operator_norm(observable - embed(projected, observable.support))
