"""Decay sweeps over the shielding size, exponential fits and scans.

A sweep fixes a model and a tripartition scheme, varies the width of the
middle block B and records how each requested quantity falls off.  The default
scheme keeps the chain length fixed and shrinks the outer blocks toward their
minimum sizes as B grows, so every point of a series is computed on states of
identical global dimension; ``grow_chain`` instead widens the chain with B
and is kept for cross-checks.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .divergences import (
    bs_mutual_information,
    conditional_mutual_information,
    geometric_renyi_mi,
    mi_upper_bound_norm,
    mutual_information,
    trace_distance_to_product,
)
from .errors import ConfigInvalid, DimensionOverflow, TooFewSamples
from .hamiltonians import SZ, gibbs_state, preset_model
from .operators import DENSE_DIM_CAP, Interval, Operator
from .recovery import (
    Partition,
    covariance_correlation,
    dpi_gap,
    lambda_deviation,
    local_indistinguishability_gap,
    recovery_distance,
)

logger = logging.getLogger(__name__)

# Samples below this are double-precision noise for the superexponential
# quantities and would corrupt log-space fits.
FLOOR = 1e-12

KNOWN_QUANTITIES = (
    "corr",
    "trace_dist_product",
    "mi",
    "bs_mi",
    "grmi_q",
    "mi_norm_bound",
    "recovery_dist",
    "lambda_dev",
    "indist_gap",
    "cmi",
)

_MODES = ("fixed_chain", "grow_chain")


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to reproduce one decay experiment.

    ``a_size`` and ``c_size`` are the minimum outer block sizes; in
    ``fixed_chain`` mode leftover sites pad A and C evenly (left block gets
    the odd site).  ``model_params`` is a tuple of (name, value) pairs so the
    config stays hashable and echoes deterministically.
    """

    model: str
    chain_length: int
    a_size: int
    c_size: int
    b_range: tuple[int, ...]
    quantities: tuple[str, ...] = ("mi",)
    beta: float = 1.0
    seed: int = 0
    mode: str = "fixed_chain"
    renyi_q: float = 2.0
    model_params: tuple[tuple[str, float], ...] = ()

    @property
    def params_dict(self) -> dict[str, float]:
        return dict(self.model_params)

    def validate(self) -> None:
        if self.mode not in _MODES:
            raise ConfigInvalid(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.a_size < 1 or self.c_size < 1:
            raise ConfigInvalid("a_size and c_size must be at least 1")
        if not self.b_range:
            raise ConfigInvalid("b_range must be nonempty")
        if any(b < 1 for b in self.b_range):
            raise ConfigInvalid("every b in b_range must be at least 1")
        if len(set(self.b_range)) != len(self.b_range):
            raise ConfigInvalid("b_range has repeated entries")
        if self.beta <= 0:
            raise ConfigInvalid("beta must be positive")
        unknown = set(self.quantities) - set(KNOWN_QUANTITIES)
        if unknown:
            raise ConfigInvalid(f"unknown quantities {sorted(unknown)}")
        if not self.quantities:
            raise ConfigInvalid("no quantities requested")
        if self.renyi_q <= 1:
            raise ConfigInvalid("renyi_q must exceed 1")
        needed = self.a_size + max(self.b_range) + self.c_size
        if self.mode == "fixed_chain":
            if needed > self.chain_length:
                raise ConfigInvalid(
                    f"a_size + max(b) + c_size = {needed} exceeds chain_length {self.chain_length}"
                )
            longest = self.chain_length
        else:
            longest = needed
        if 2 ** longest > DENSE_DIM_CAP:
            raise DimensionOverflow(
                f"chain of {longest} sites exceeds the dense backend cap"
            )


def partition_for(config: SweepConfig, ell: int) -> Partition:
    """The tripartition used at shielding size ``ell``."""
    if config.mode == "grow_chain":
        n = config.a_size + ell + config.c_size
        return Partition(Interval(1, n), config.a_size, ell, config.c_size)
    pad = config.chain_length - config.a_size - config.c_size - ell
    pad_left = pad - pad // 2
    return Partition(
        Interval(1, config.chain_length),
        config.a_size + pad_left,
        ell,
        config.c_size + (pad - pad_left),
    )


@dataclass(frozen=True)
class DecaySeries:
    """(ell, value) samples of one quantity plus decay diagnostics.

    The fit is ordinary least squares on log(value); samples below the
    numerical floor are excluded from it and counted in ``floor_truncated``.
    A fit over fewer than three above-floor samples is not attempted and the
    fit fields stay None.
    """

    quantity: str
    samples: tuple[tuple[int, float], ...]
    fit_rate: float | None
    fit_intercept: float | None
    r_squared: float | None
    superexp_flag: bool
    floor_truncated: int


def _above_floor(samples, floor: float):
    return [(l, v) for l, v in samples if math.isfinite(v) and v >= floor]


def fit_exponential(samples, floor: float = FLOOR) -> tuple[float, float, float]:
    """Least-squares fit of log(value) against ell over above-floor samples.

    Returns (rate, intercept, r_squared); a constant series fits rate 0 with
    r_squared 0 by convention.  Raises TooFewSamples below three samples.
    """
    usable = _above_floor(samples, floor)
    if len(usable) < 3:
        raise TooFewSamples(f"need at least 3 above-floor samples, have {len(usable)}")
    x = np.array([l for l, _ in usable], dtype=float)
    y = np.log(np.array([v for _, v in usable]))
    rate, intercept = np.polyfit(x, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-24:
        return 0.0, float(y.mean()), 0.0
    residuals = y - (intercept + rate * x)
    r_squared = 1.0 - float(np.sum(residuals ** 2)) / ss_tot
    return float(rate), float(intercept), float(min(max(r_squared, 0.0), 1.0))


def superexponential_signature(samples, floor: float = FLOOR) -> bool:
    """True iff the log-decrements between consecutive above-floor samples
    strictly increase across at least three samples from the start.

    Exponential decay has constant decrements and never fires; genuinely
    faster-than-exponential decay shows growing decrements from the smallest
    shielding sizes, long before the samples sink into the numerical noise
    that eventually breaks any monotonicity pattern.
    """
    usable = _above_floor(sorted(samples), floor)
    if len(usable) < 3:
        return False
    decs = []
    for (l0, v0), (l1, v1) in zip(usable, usable[1:]):
        decs.append((math.log(v0) - math.log(v1)) / (l1 - l0))
    increasing_prefix = 1
    for a, b in zip(decs, decs[1:]):
        # growth must clear rounding noise, or an exact exponential would
        # fire on coin-flip float differences
        if b > a + 1e-9 * max(abs(a), 1.0):
            increasing_prefix += 1
        else:
            break
    return increasing_prefix >= 2  # two growing decrements = three samples


def _make_series(quantity: str, samples) -> DecaySeries:
    samples = tuple(sorted((int(l), float(v)) for l, v in samples))
    usable = _above_floor(samples, FLOOR)
    # decay bounds do not promise monotone raw values: report, never fail
    for (l0, v0), (l1, v1) in zip(usable, usable[1:]):
        if v1 > v0 + 1e-12:
            logger.warning(
                "non-monotone decay in %s: value rises from %.3e to %.3e between "
                "shield sizes %d and %d", quantity, v0, v1, l0, l1
            )
    if len(usable) >= 3:
        rate, intercept, r2 = fit_exponential(samples)
    else:
        rate = intercept = r2 = None
    return DecaySeries(
        quantity=quantity,
        samples=samples,
        fit_rate=rate,
        fit_intercept=intercept,
        r_squared=r2,
        superexp_flag=superexponential_signature(samples),
        floor_truncated=len(samples) - len(usable),
    )


# -- quantity evaluators ---------------------------------------------------------


def _eval_corr(ens, part, config, interaction) -> float:
    return covariance_correlation(
        ens, part.a_sites, part.c_sites, seed=config.seed
    ).value


def _eval_indist(ens, part, config, interaction) -> float:
    probe = Operator([part.a_block.lo], SZ, ens.interval.local_dim)
    return local_indistinguishability_gap(
        interaction, part, probe, beta=config.beta, full_ensemble=ens
    )


EVALUATORS: dict[str, Callable] = {
    "corr": _eval_corr,
    "trace_dist_product": lambda e, p, c, i: trace_distance_to_product(e, p.a_sites, p.c_sites),
    "mi": lambda e, p, c, i: mutual_information(e, p.a_sites, p.c_sites),
    "bs_mi": lambda e, p, c, i: bs_mutual_information(e, p.a_sites, p.c_sites),
    "grmi_q": lambda e, p, c, i: geometric_renyi_mi(e, p.a_sites, p.c_sites, q=c.renyi_q),
    "mi_norm_bound": lambda e, p, c, i: mi_upper_bound_norm(e, p.a_sites, p.c_sites),
    "recovery_dist": lambda e, p, c, i: recovery_distance(e, p),
    "lambda_dev": lambda e, p, c, i: lambda_deviation(e, p),
    "indist_gap": _eval_indist,
    "cmi": lambda e, p, c, i: conditional_mutual_information(e, p.a_sites, p.b_sites, p.c_sites),
}


def _max_workers(requested: int | None) -> int:
    return max(1, int(requested)) if requested else 1


def run_sweep(config: SweepConfig, max_workers: int | None = None) -> list[DecaySeries]:
    """Evaluate every requested quantity at every shielding size.

    Deterministic given (config, seed): all randomness is derived from the
    config seed.  Sweep points are independent; ``max_workers`` > 1 evaluates
    them concurrently with deterministic, ell-ordered assembly.
    """
    config.validate()
    interaction = preset_model(config.model, **config.params_dict)
    ells = sorted(config.b_range)
    shared = None
    if config.mode == "fixed_chain":
        shared = gibbs_state(interaction, Interval(1, config.chain_length), config.beta)

    def evaluate(ell: int) -> dict[str, float]:
        part = partition_for(config, ell)
        ens = shared if shared is not None else gibbs_state(interaction, part.interval, config.beta)
        return {q: float(EVALUATORS[q](ens, part, config, interaction)) for q in config.quantities}

    workers = _max_workers(max_workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, ells))
    else:
        results = [evaluate(ell) for ell in ells]
    by_quantity = {q: [] for q in config.quantities}
    for ell, values in zip(ells, results):
        for q, v in values.items():
            by_quantity[q].append((ell, v))
    return [_make_series(q, by_quantity[q]) for q in config.quantities]


def uniform_clustering_scan(config: SweepConfig, max_workers: int | None = None) -> DecaySeries:
    """Empirical clustering bound: at each ell, the maximum correlation over
    every placement of the tripartition with |B| = ell on the fixed chain."""
    config.validate()
    if config.mode != "fixed_chain":
        raise ConfigInvalid("the clustering scan is defined on a fixed chain")
    interaction = preset_model(config.model, **config.params_dict)
    n = config.chain_length
    ensemble = gibbs_state(interaction, Interval(1, n), config.beta)

    def worst_placement(ell: int) -> float:
        best = 0.0
        for a_len in range(1, n - ell):
            part = Partition(ensemble.interval, a_len, ell, n - ell - a_len)
            res = covariance_correlation(
                ensemble, part.a_sites, part.c_sites, seed=config.seed
            )
            best = max(best, res.value)
        return best

    ells = sorted(config.b_range)
    workers = _max_workers(max_workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(worst_placement, ells))
    else:
        values = [worst_placement(ell) for ell in ells]
    return _make_series("uniform_corr", list(zip(ells, values)))


def dpi_gap_scan(config: SweepConfig) -> DecaySeries:
    """Gap of the data-processing inequality for the BS-entropy under tracing
    out A, reported per shielding size with no decay asserted."""
    config.validate()
    interaction = preset_model(config.model, **config.params_dict)
    shared = None
    if config.mode == "fixed_chain":
        shared = gibbs_state(interaction, Interval(1, config.chain_length), config.beta)
    samples = []
    for ell in sorted(config.b_range):
        part = partition_for(config, ell)
        ens = shared if shared is not None else gibbs_state(interaction, part.interval, config.beta)
        samples.append((ell, dpi_gap(ens, part)))
    return _make_series("dpi_gap", samples)
