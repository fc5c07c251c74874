import logging
import math

import numpy as np
import pytest

from gibbslab import (
    ConfigInvalid,
    DimensionOverflow,
    FLOOR,
    SweepConfig,
    TooFewSamples,
    dpi_gap_scan,
    fit_exponential,
    partition_for,
    run_sweep,
    superexponential_signature,
    uniform_clustering_scan,
)
from gibbslab.experiments import KNOWN_QUANTITIES


def small_config(**overrides):
    base = dict(
        model="tfim",
        chain_length=6,
        a_size=1,
        c_size=1,
        b_range=(1, 2, 3),
        quantities=("mi",),
        beta=1.0,
        seed=0,
        model_params=(("g", 1.0),),
    )
    base.update(overrides)
    return SweepConfig(**base)


# -- fitting ---------------------------------------------------------------


def test_fit_recovers_exact_exponential():
    samples = [(l, math.exp(-2.0 * l)) for l in range(1, 9)]
    rate, intercept, r2 = fit_exponential(samples)
    assert rate == pytest.approx(-2.0, abs=1e-9)
    assert intercept == pytest.approx(0.0, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_constant_series_convention():
    rate, intercept, r2 = fit_exponential([(l, 0.25) for l in range(1, 6)])
    assert rate == 0.0
    assert intercept == pytest.approx(math.log(0.25))
    assert r2 == 0.0


def test_fit_factorial_tail_is_poor_and_flagged():
    samples = [(l, 1.0 / math.factorial(l)) for l in range(1, 9)]
    _, _, r2 = fit_exponential(samples)
    assert r2 < 0.99
    assert superexponential_signature(samples)


def test_fit_needs_three_samples_above_floor():
    with pytest.raises(TooFewSamples):
        fit_exponential([(1, 0.5), (2, 0.1)])
    with pytest.raises(TooFewSamples):
        fit_exponential([(1, 0.5), (2, 0.1), (3, 1e-15)])


def test_superexp_flag_quiet_on_exponential_data():
    samples = [(l, math.exp(-1.3 * l)) for l in range(1, 8)]
    assert not superexponential_signature(samples)


# -- configuration -----------------------------------------------------------


def test_config_validation_errors():
    with pytest.raises(ConfigInvalid):
        small_config(b_range=()).validate()
    with pytest.raises(ConfigInvalid):
        small_config(b_range=(0, 1)).validate()
    with pytest.raises(ConfigInvalid):
        small_config(b_range=(1, 1)).validate()
    with pytest.raises(ConfigInvalid):
        small_config(quantities=("nope",)).validate()
    with pytest.raises(ConfigInvalid):
        small_config(chain_length=4, b_range=(3,)).validate()
    with pytest.raises(ConfigInvalid):
        small_config(beta=-1.0).validate()
    with pytest.raises(ConfigInvalid):
        small_config(mode="sideways").validate()
    with pytest.raises(DimensionOverflow):
        small_config(chain_length=20, b_range=(1,)).validate()


def test_partition_padding_splits_evenly():
    cfg = small_config(chain_length=9, a_size=1, c_size=1, b_range=(2,))
    part = partition_for(cfg, 2)
    # 5 leftover sites: left block gets the odd one
    assert (part.a_size, part.b_size, part.c_size) == (4, 2, 3)
    assert part.interval.size == 9


def test_partition_grow_chain_mode():
    cfg = small_config(mode="grow_chain", b_range=(4,))
    part = partition_for(cfg, 4)
    assert (part.a_size, part.b_size, part.c_size) == (1, 4, 1)
    assert part.interval.size == 6


# -- sweeps ----------------------------------------------------------------------


def test_zero_interaction_sweep_is_all_zero():
    cfg = small_config(model="zero", model_params=(), quantities=("mi", "corr", "cmi"))
    for series in run_sweep(cfg):
        assert all(v < 1e-12 for _, v in series.samples)
        assert series.floor_truncated == len(series.samples)
        assert series.fit_rate is None and series.r_squared is None


def test_sweep_is_deterministic():
    cfg = small_config(quantities=("mi", "corr", "recovery_dist"))
    first = run_sweep(cfg)
    second = run_sweep(cfg)
    for a, b in zip(first, second):
        assert a == b


def test_sweep_chain_ordering_holds_pointwise():
    cfg = small_config(
        chain_length=8,
        b_range=(1, 2, 3, 4),
        quantities=("corr", "trace_dist_product", "mi", "bs_mi", "grmi_q", "mi_norm_bound"),
    )
    by_name = {s.quantity: dict(s.samples) for s in run_sweep(cfg)}
    for ell in (1, 2, 3, 4):
        chain = [
            0.5 * by_name["corr"][ell] ** 2,
            0.5 * by_name["trace_dist_product"][ell] ** 2,
            by_name["mi"][ell],
            by_name["bs_mi"][ell],
            by_name["grmi_q"][ell],
            by_name["mi_norm_bound"][ell],
        ]
        assert all(b >= a - 1e-9 for a, b in zip(chain, chain[1:]))


def test_sweep_supports_every_quantity():
    cfg = small_config(quantities=KNOWN_QUANTITIES, b_range=(1, 2))
    series = run_sweep(cfg)
    assert sorted(s.quantity for s in series) == sorted(KNOWN_QUANTITIES)
    for s in series:
        assert all(np.isfinite(v) for _, v in s.samples)


def test_sweep_respects_worker_count():
    cfg = small_config(quantities=("mi", "recovery_dist"))
    assert run_sweep(cfg, max_workers=2) == run_sweep(cfg, max_workers=1)


def test_nonmonotone_series_logged_as_finding(caplog):
    from gibbslab.experiments import _make_series

    with caplog.at_level(logging.WARNING, logger="gibbslab.experiments"):
        _make_series("synthetic", [(1, 1e-3), (2, 5e-4), (3, 2e-3)])
    assert any("non-monotone" in rec.message for rec in caplog.records)


def test_monotone_sweep_logs_nothing(caplog):
    cfg = small_config(quantities=("mi",), b_range=(1, 2, 3, 4), chain_length=8)
    with caplog.at_level(logging.WARNING, logger="gibbslab.experiments"):
        run_sweep(cfg)
    assert not caplog.records


# -- scans -----------------------------------------------------------------------


def test_uniform_clustering_zero_interaction():
    cfg = small_config(model="zero", model_params=(), quantities=("corr",))
    scan = uniform_clustering_scan(cfg)
    assert all(v < 1e-12 for _, v in scan.samples)


def test_uniform_clustering_dominates_single_placement():
    cfg = small_config(chain_length=7, b_range=(1, 2, 3), quantities=("corr",))
    scan = uniform_clustering_scan(cfg)
    (corr_series,) = run_sweep(cfg)
    single = dict(corr_series.samples)
    for ell, worst in scan.samples:
        assert worst >= single[ell] - 1e-9


def test_uniform_clustering_requires_fixed_chain():
    with pytest.raises(ConfigInvalid):
        uniform_clustering_scan(small_config(mode="grow_chain"))


def test_dpi_gap_scan_nonnegative_and_zero_for_free_model():
    cfg = small_config(model="zero", model_params=())
    assert all(abs(v) < 1e-10 for _, v in dpi_gap_scan(cfg).samples)
    cfg2 = small_config(chain_length=7, b_range=(1, 2, 3))
    assert all(v >= -1e-9 for _, v in dpi_gap_scan(cfg2).samples)
