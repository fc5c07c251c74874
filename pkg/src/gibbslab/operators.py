"""Dense operator algebra on tensor products of qudit sites.

Everything acts on an ordered collection of integer lattice sites, each
carrying a local Hilbert space of dimension ``d``.  Tensor factors are always
ordered by ascending site index; keeping that single convention everywhere is
what makes embeddings, products and partial traces composable without basis
bookkeeping.  All functions are pure and inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionOverflow,
    NotHermitian,
    SingularOperator,
    SiteNotInSupport,
    SupportNotContained,
)

# Hard cap on the dense Hilbert dimension: eigendecompositions beyond this are
# not worth waiting for on a workstation.
DENSE_DIM_CAP = 2 ** 14

_HERMITIAN_RTOL = 1e-12
_SINGULAR_RTOL = 1e-13
_REAL_CAST_RTOL = 1e-14


def _check_dim(dim: int) -> None:
    if dim > DENSE_DIM_CAP:
        raise DimensionOverflow(
            f"Hilbert dimension {dim} exceeds the dense cap {DENSE_DIM_CAP}"
        )


@dataclass(frozen=True)
class Interval:
    """A contiguous block of lattice sites [lo, hi] with local dimension d."""

    lo: int
    hi: int
    local_dim: int = 2

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if self.local_dim < 2:
            raise ValueError("local dimension must be at least 2")
        _check_dim(self.dimension)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    @property
    def dimension(self) -> int:
        return self.local_dim ** self.size

    def __contains__(self, site: int) -> bool:
        return self.lo <= site <= self.hi

    def shift(self, offset: int) -> "Interval":
        return Interval(self.lo + offset, self.hi + offset, self.local_dim)


def _as_sites(target) -> tuple[int, ...]:
    if isinstance(target, Interval):
        return target.sites
    return tuple(sorted(int(s) for s in target))


class Operator:
    """A dense complex or real matrix on an ordered tuple of sites.

    ``support`` is strictly increasing and ``matrix`` has shape
    ``(d**k, d**k)`` with ``k = len(support)``.  Empty support is allowed and
    represents a scalar (1x1 matrix).  Setting ``hermitian`` or
    ``positive_definite`` verifies the corresponding property at construction
    time rather than assuming it.
    """

    __slots__ = ("support", "matrix", "local_dim")

    def __init__(
        self,
        support: Iterable[int],
        matrix,
        local_dim: int = 2,
        *,
        hermitian: bool = False,
        positive_definite: bool = False,
    ):
        support = tuple(int(s) for s in support)
        if any(a >= b for a, b in zip(support, support[1:])):
            raise ValueError(f"support must be strictly increasing, got {support}")
        matrix = np.asarray(matrix)
        if matrix.dtype.kind not in "fc":
            matrix = matrix.astype(np.float64)
        dim = local_dim ** len(support)
        _check_dim(dim)
        if matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match d^|support| = {dim}"
            )
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "local_dim", local_dim)
        if hermitian or positive_definite:
            dev = np.max(np.abs(matrix - matrix.conj().T)) if dim else 0.0
            if dev > _HERMITIAN_RTOL * max(operator_norm(self), 1e-300):
                raise NotHermitian(f"deviation from Hermiticity {dev:.3e}")
        if positive_definite:
            w = np.linalg.eigvalsh(_real_if_close(matrix))
            if w.min() <= 0:
                raise SingularOperator(f"minimum eigenvalue {w.min():.3e} not positive")

    def __setattr__(self, name, value):  # immutable by convention
        raise AttributeError("Operator is immutable")

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.support)

    def dagger(self) -> "Operator":
        return Operator(self.support, self.matrix.conj().T, self.local_dim)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, rtol: float = _HERMITIAN_RTOL) -> bool:
        dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
        return bool(dev <= rtol * max(np.max(np.abs(self.matrix)), 1e-300))

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, support, local_dim: int = 2) -> "Operator":
        sites = _as_sites(support)
        return cls(sites, np.eye(local_dim ** len(sites)), local_dim)

    @classmethod
    def zero(cls, support, local_dim: int = 2) -> "Operator":
        sites = _as_sites(support)
        dim = local_dim ** len(sites)
        return cls(sites, np.zeros((dim, dim)), local_dim)

    # -- algebra ------------------------------------------------------------

    def __matmul__(self, other: "Operator") -> "Operator":
        return compose(self, other)

    def __add__(self, other: "Operator") -> "Operator":
        a, b = _aligned(self, other)
        return Operator(a.support, a.matrix + b.matrix, a.local_dim)

    def __sub__(self, other: "Operator") -> "Operator":
        a, b = _aligned(self, other)
        return Operator(a.support, a.matrix - b.matrix, a.local_dim)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.support, self.matrix * scalar, self.local_dim)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.support, -self.matrix, self.local_dim)

    def __repr__(self) -> str:
        return f"Operator(support={self.support}, dim={self.dim})"


def _aligned(a: Operator, b: Operator) -> tuple[Operator, Operator]:
    if a.local_dim != b.local_dim:
        raise ValueError("operators have different local dimensions")
    if a.support == b.support:
        return a, b
    union = tuple(sorted(set(a.support) | set(b.support)))
    return embed(a, union), embed(b, union)


def _real_if_close(matrix: np.ndarray) -> np.ndarray:
    """Drop a numerically-zero imaginary part so LAPACK can take the real path."""
    if np.iscomplexobj(matrix):
        scale = max(np.max(np.abs(matrix.real)) if matrix.size else 0.0, 1.0)
        if matrix.size == 0 or np.max(np.abs(matrix.imag)) <= _REAL_CAST_RTOL * scale:
            return np.ascontiguousarray(matrix.real)
    return matrix


def _permute_factors(matrix: np.ndarray, perm: Sequence[int], d: int) -> np.ndarray:
    """Reorder the tensor factors of a square matrix by ``perm``.

    ``perm[i]`` is the current position of the factor that should end up at
    position ``i``, applied identically to rows and columns.
    """
    n = len(perm)
    if list(perm) == list(range(n)):
        return matrix
    t = matrix.reshape((d,) * (2 * n))
    axes = list(perm) + [n + p for p in perm]
    return np.ascontiguousarray(t.transpose(axes)).reshape(d ** n, d ** n)


def _embed_matrix(
    matrix: np.ndarray, support: Sequence[int], target: Sequence[int], d: int
) -> np.ndarray:
    pad = [s for s in target if s not in set(support)]
    if not pad:
        if tuple(support) == tuple(target):
            return matrix
        order = list(support)
    else:
        matrix = np.kron(matrix, np.eye(d ** len(pad), dtype=matrix.dtype))
        order = list(support) + pad
    perm = [order.index(s) for s in target]
    return _permute_factors(matrix, perm, d)


def embed(op: Operator, target) -> Operator:
    """Extend ``op`` by identity factors onto the sites of ``target``.

    Raises ``SupportNotContained`` if a support site is missing from target.
    """
    sites = _as_sites(target)
    missing = set(op.support) - set(sites)
    if missing:
        raise SupportNotContained(f"sites {sorted(missing)} not in target {sites}")
    _check_dim(op.local_dim ** len(sites))
    return Operator(sites, _embed_matrix(op.matrix, op.support, sites, op.local_dim), op.local_dim)


def _apply_embedded(
    big: np.ndarray,
    big_support: Sequence[int],
    small: np.ndarray,
    small_support: Sequence[int],
    d: int,
    side: str,
) -> np.ndarray:
    """Multiply ``big`` by ``small`` tensored with identity, without forming
    the embedded factor.  Cost d_small * dim^2 instead of dim^3."""
    n = len(big_support)
    dim = d ** n
    pos = [big_support.index(s) for s in small_support]
    k = len(pos)
    ds = d ** k
    if side == "right":  # big @ (small (x) 1)
        t = big.reshape((dim,) + (d,) * n)
        t = np.moveaxis(t, [1 + p for p in pos], range(1, 1 + k))
        mid_shape = t.shape
        t = t.reshape(dim, ds, -1)
        out = np.matmul(t.transpose(0, 2, 1), small).transpose(0, 2, 1)
        out = np.ascontiguousarray(out).reshape(mid_shape)
        out = np.moveaxis(out, range(1, 1 + k), [1 + p for p in pos])
        return np.ascontiguousarray(out).reshape(dim, dim)
    # side == "left":  (small (x) 1) @ big
    t = big.reshape((d,) * n + (dim,))
    t = np.moveaxis(t, pos, range(k))
    mid_shape = t.shape
    t = t.reshape(ds, -1)
    out = small @ t
    out = out.reshape(mid_shape)
    out = np.moveaxis(out, range(k), pos)
    return np.ascontiguousarray(out).reshape(dim, dim)


def compose(a: Operator, b: Operator) -> Operator:
    """Matrix product of two operators after embedding both into the union of
    their supports.  Disjoint supports therefore reduce to a tensor product."""
    if a.local_dim != b.local_dim:
        raise ValueError("operators have different local dimensions")
    d = a.local_dim
    union = tuple(sorted(set(a.support) | set(b.support)))
    _check_dim(d ** len(union))
    if a.support == b.support:
        return Operator(union, a.matrix @ b.matrix, d)
    if set(b.support) <= set(a.support):
        return Operator(union, _apply_embedded(a.matrix, a.support, b.matrix, b.support, d, "right"), d)
    if set(a.support) <= set(b.support):
        return Operator(union, _apply_embedded(b.matrix, b.support, a.matrix, a.support, d, "left"), d)
    big = _embed_matrix(a.matrix, a.support, union, d)
    return Operator(union, _apply_embedded(big, union, b.matrix, b.support, d, "right"), d)


def partial_trace(op: Operator, traced) -> Operator:
    """Unnormalized partial trace over ``traced`` sites.

    The result is supported on the remaining sites; tracing everything yields
    a 1x1 scalar operator.  Linear, and Tr(R) * S on product inputs R (x) S.
    """
    traced_sites = set(_as_sites(traced))
    missing = traced_sites - set(op.support)
    if missing:
        raise SiteNotInSupport(f"sites {sorted(missing)} not in support {op.support}")
    if not traced_sites:
        return op
    d = op.local_dim
    kept = [s for s in op.support if s not in traced_sites]
    n = op.n_sites
    perm = [op.support.index(s) for s in kept] + [op.support.index(s) for s in sorted(traced_sites)]
    t = op.matrix.reshape((d,) * (2 * n))
    axes = perm + [n + p for p in perm]
    t = t.transpose(axes)
    dk = d ** len(kept)
    dt = d ** len(traced_sites)
    out = np.trace(t.reshape(dk, dt, dk, dt), axis1=1, axis2=3)
    return Operator(kept, out, d)


def conditional_expectation(op: Operator, kept) -> Operator:
    """Normalized partial trace onto the sites in ``kept``.

    Unital (identity maps to identity) and contractive in operator norm; this
    is the projection onto the subalgebra of operators supported in ``kept``.
    """
    kept_sites = set(_as_sites(kept))
    missing = kept_sites - set(op.support)
    if missing:
        raise SiteNotInSupport(f"sites {sorted(missing)} not in support {op.support}")
    traced = [s for s in op.support if s not in kept_sites]
    reduced = partial_trace(op, traced)
    return Operator(reduced.support, reduced.matrix / op.local_dim ** len(traced), op.local_dim)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition of a Hermitian operator, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def apply(self, fn) -> np.ndarray:
        """U f(diag(w)) U^dagger for a vectorized scalar function ``fn``."""
        u = self.eigenvectors
        fw = fn(self.eigenvalues)
        return (u * fw) @ u.conj().T


def spectral_decomposition(op: Operator, *, require_hermitian: bool = True) -> SpectralDecomposition:
    """Eigendecomposition after explicit symmetrization.

    Symmetrizing (M + M^dagger)/2 first absorbs the floating-point drift that
    accumulates under repeated products; a genuinely non-Hermitian input is
    rejected instead of silently symmetrized.
    """
    m = op.matrix
    if require_hermitian and not op.is_hermitian(rtol=1e-10):
        raise NotHermitian("operator is not Hermitian within tolerance")
    sym = _real_if_close((m + m.conj().T) / 2.0)
    w, u = np.linalg.eigh(sym)
    return SpectralDecomposition(w, u)


_INVERSE_KINDS = {"log", "inv", "sqrt", "power"}


def matrix_function(op: Operator, kind: str, scalar=None) -> Operator:
    """Apply a named scalar function to a Hermitian operator spectrally.

    Supported kinds: ``exp``, ``log``, ``inv``, ``sqrt``, ``power`` (with real
    exponent ``scalar``) and ``cexp`` which returns e^{s * op} for a complex
    ``scalar`` s.  ``cexp`` goes through the Hermitian eigenbasis of the
    exponent, never a Schur form, so the exponent itself must be Hermitian.
    """
    spec = spectral_decomposition(op)
    w = spec.eigenvalues
    if kind in _INVERSE_KINDS:
        wmax = float(np.max(np.abs(w), initial=0.0))
        if w.size == 0 or w.min() <= _SINGULAR_RTOL * wmax:
            raise SingularOperator(
                f"{kind} requires a positive-definite spectrum, min eig "
                f"{w.min() if w.size else float('nan'):.3e}"
            )
    if kind == "exp":
        out = spec.apply(np.exp)
    elif kind == "log":
        out = spec.apply(np.log)
    elif kind == "inv":
        out = spec.apply(lambda x: 1.0 / x)
    elif kind == "sqrt":
        out = spec.apply(np.sqrt)
    elif kind == "power":
        if scalar is None:
            raise ValueError("power requires an exponent")
        out = spec.apply(lambda x: x ** scalar)
    elif kind == "cexp":
        if scalar is None:
            raise ValueError("cexp requires a scalar s")
        u = spec.eigenvectors
        fw = np.exp(np.asarray(scalar) * w)
        out = (u * fw) @ u.conj().T
    else:
        raise ValueError(f"unknown matrix function {kind!r}")
    return Operator(op.support, out, op.local_dim)


def inverse(op: Operator) -> Operator:
    """General (non-spectral) inverse; for Hermitian inputs prefer
    ``matrix_function(op, "inv")``."""
    sv = np.linalg.svd(_real_if_close(op.matrix), compute_uv=False)
    if sv[-1] <= _SINGULAR_RTOL * sv[0]:
        raise SingularOperator(f"condition number {sv[0] / max(sv[-1], 1e-300):.3e}")
    return Operator(op.support, np.linalg.inv(op.matrix), op.local_dim)


# -- norms -------------------------------------------------------------------


def _singular_values(matrix: np.ndarray) -> np.ndarray:
    m = _real_if_close(matrix)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if m.size and dev <= 1e-13 * max(np.max(np.abs(m)), 1e-300):
        # Hermitian shortcut: singular values are |eigenvalues|, and eigh is
        # substantially cheaper than a general SVD at these sizes.
        return np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2.0))
    return np.linalg.svd(m, compute_uv=False)


def operator_norm(op: Operator) -> float:
    """Largest singular value (Schatten-infinity norm)."""
    return float(np.max(_singular_values(op.matrix), initial=0.0))


def trace_norm(op: Operator) -> float:
    """Sum of singular values (Schatten-1 norm)."""
    return float(np.sum(_singular_values(op.matrix)))


def hs_norm(op: Operator) -> float:
    """Frobenius / Hilbert-Schmidt norm (Schatten-2)."""
    return float(np.linalg.norm(op.matrix))
