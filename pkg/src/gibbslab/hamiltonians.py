"""Finite-range interactions, chain Hamiltonians and Gibbs states.

An interaction is a family of Hermitian terms attached to contiguous windows
of the chain; translation-invariant models are generated by shifting fixed
window templates.  Open boundary conditions throughout: a window contributes
exactly when it fits inside the interval being assembled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SiteNotInSupport, UnknownModel
from .operators import (
    Interval,
    Operator,
    SpectralDecomposition,
    operator_norm,
    partial_trace,
    spectral_decomposition,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class InteractionTerm:
    """One Hermitian term attached to a contiguous window of sites."""

    window: Interval
    term: Operator


@dataclass(frozen=True, eq=False)
class Interaction:
    """A finite-range, bounded-strength family of local terms.

    ``templates`` holds (window_size, matrix) pairs; the term at position x is
    the template placed on [x, x + window_size - 1].  ``range_sites`` is the
    largest window size and ``strength`` the largest template norm.
    """

    name: str
    templates: tuple[tuple[int, np.ndarray], ...]
    translation_invariant: bool = True
    seed: int | None = None
    local_dim: int = 2

    def __post_init__(self):
        for wsize, mat in self.templates:
            dim = self.local_dim ** wsize
            if mat.shape != (dim, dim):
                raise ValueError(f"template shape {mat.shape} does not fit {wsize} sites")
            dev = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
            if dev > 1e-12 * max(np.max(np.abs(mat)), 1.0):
                raise ValueError("interaction templates must be Hermitian")

    @property
    def range_sites(self) -> int:
        return max((w for w, _ in self.templates), default=1)

    @property
    def strength(self) -> float:
        return max(
            (operator_norm(Operator(range(w), m, self.local_dim)) for w, m in self.templates),
            default=0.0,
        )

    def terms_in(self, interval: Interval) -> list[InteractionTerm]:
        """All terms whose window fits inside ``interval``."""
        out = []
        for wsize, mat in self.templates:
            for x in range(interval.lo, interval.hi - wsize + 2):
                window = Interval(x, x + wsize - 1, self.local_dim)
                out.append(InteractionTerm(window, Operator(window.sites, mat, self.local_dim)))
        return out


def build_hamiltonian(interaction: Interaction, interval: Interval) -> Operator:
    """Sum of all interaction terms fitting in ``interval``, identity-padded.

    Terms are placed block-wise instead of via full-size Kronecker products,
    which keeps assembly linear in the number of matrix entries.
    """
    d = interval.local_dim
    dim = interval.dimension
    dtype = np.result_type(np.float64, *(m.dtype for _, m in interaction.templates))
    h = np.zeros((dim, dim), dtype=dtype)
    for wsize, mat in interaction.templates:
        for x in range(interval.lo, interval.hi - wsize + 2):
            dl = d ** (x - interval.lo)
            dr = d ** (interval.hi - (x + wsize - 1))
            right = np.kron(mat, np.eye(dr)) if dr > 1 else mat
            blocks = h.reshape(dl, dim // dl, dl, dim // dl)
            idx = np.arange(dl)
            blocks[idx, :, idx, :] += right
    return Operator(interval.sites, h, d)


@dataclass(frozen=True, eq=False)
class GibbsEnsemble:
    """A chain interval, its Hamiltonian and the associated thermal state.

    The spectral decomposition of the Hamiltonian is kept because every
    derived quantity (marginals, entropies, expansionals of sub-blocks) is a
    matrix function of it or of its restrictions.
    """

    interaction: Interaction
    interval: Interval
    beta: float
    hamiltonian: Operator
    spectral: SpectralDecomposition
    state: Operator


def gibbs_state(interaction: Interaction, interval: Interval, beta: float = 1.0) -> GibbsEnsemble:
    """exp(-beta H) / Z on ``interval``, built through the eigenbasis of H.

    Eigenvalues are shifted by their minimum before exponentiating so the
    construction cannot overflow at large beta.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    h = build_hamiltonian(interaction, interval)
    spec = spectral_decomposition(h)
    w = np.exp(-beta * (spec.eigenvalues - spec.eigenvalues.min()))
    w /= w.sum()
    u = spec.eigenvectors
    rho = (u * w) @ u.conj().T
    rho = (rho + rho.conj().T) / 2.0
    state = Operator(interval.sites, rho, interval.local_dim)
    return GibbsEnsemble(interaction, interval, beta, h, spec, state)


def reduced_state(ensemble: GibbsEnsemble, region) -> Operator:
    """Marginal of the ensemble state on ``region`` (a set of sites)."""
    sites = set(region.sites) if isinstance(region, Interval) else {int(s) for s in region}
    missing = sites - set(ensemble.interval.sites)
    if missing:
        raise SiteNotInSupport(f"sites {sorted(missing)} outside {ensemble.interval}")
    traced = [s for s in ensemble.interval.sites if s not in sites]
    return partial_trace(ensemble.state, traced)


def log_partition(interaction: Interaction, interval: Interval, beta: float = 1.0) -> float:
    """log Tr exp(-beta H) via a stable log-sum-exp over the spectrum."""
    h = build_hamiltonian(interaction, interval)
    w = np.linalg.eigvalsh((h.matrix + h.matrix.conj().T) / 2.0)
    x = -beta * w
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


# -- model catalog -------------------------------------------------------------


def _hermitian_template(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = (m + m.conj().T) / 2.0
    return m / np.linalg.svd(m, compute_uv=False)[0]


def _zero(**_: float) -> Interaction:
    return Interaction("zero", templates=())


def _ising_zz(**_: float) -> Interaction:
    return Interaction("ising_zz", templates=((2, np.kron(SZ, SZ)),))


def _tfim(g: float = 1.0) -> Interaction:
    return Interaction("tfim", templates=((2, np.kron(SZ, SZ)), (1, g * SX)))


def _heisenberg(jx: float = 1.0, jy: float = 1.0, jz: float = 1.0, h: float = 0.5) -> Interaction:
    two_site = jx * np.kron(SX, SX) + (jy * np.kron(SY, SY)).real + jz * np.kron(SZ, SZ)
    return Interaction("heisenberg", templates=((2, two_site), (1, h * SZ)))


def _random_nn(seed: int = 0) -> Interaction:
    rng = np.random.default_rng(int(seed))
    return Interaction("random_nn", templates=((2, _hermitian_template(rng, 4)),), seed=int(seed))


def _random_range_r(seed: int = 0, r: int = 3) -> Interaction:
    r = int(r)
    if r < 1:
        raise ValueError("range must be at least one site")
    rng = np.random.default_rng(int(seed))
    return Interaction(
        "random_range_r", templates=((r, _hermitian_template(rng, 2 ** r)),), seed=int(seed)
    )


MODEL_CATALOG: dict[str, tuple[Callable[..., Interaction], str]] = {
    "heisenberg": (_heisenberg, "jx, jy, jz couplings and field h (defaults 1, 1, 1, 0.5)"),
    "ising_zz": (_ising_zz, "nearest-neighbour ZZ chain, all terms commuting (classical)"),
    "random_nn": (_random_nn, "one random Hermitian nearest-neighbour template, norm 1; seed"),
    "random_range_r": (_random_range_r, "one random Hermitian template on r sites, norm 1; seed, r"),
    "tfim": (_tfim, "ZZ couplings plus transverse field g on every site (default g = 1)"),
    "zero": (_zero, "no interaction; every Gibbs state is maximally mixed"),
}


def preset_model(name: str, **params) -> Interaction:
    """Instantiate a catalog model by name.  Raises UnknownModel otherwise."""
    try:
        builder, _ = MODEL_CATALOG[name]
    except KeyError:
        raise UnknownModel(f"no preset named {name!r}; known: {sorted(MODEL_CATALOG)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise UnknownModel(f"bad parameters for {name!r}: {exc}") from None
