"""Self-contained invariant suite behind the ``verify`` CLI command.

Each check re-derives a structural identity from scratch on freshly sampled
instances, so a regression anywhere in the algebra shows up as a named
failure here.  ``fast`` keeps every instance at six sites or fewer and runs
in well under a minute; ``full`` repeats the suite at larger sizes and with
many more random draws.
"""

from __future__ import annotations

import numpy as np

from . import divergences, expansionals, experiments, hamiltonians, operators, recovery
from .hamiltonians import preset_model
from .operators import Interval, Operator


def _random_operator(rng, sites, d=2, hermitian=False):
    dim = d ** len(sites)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    if hermitian:
        m = (m + m.conj().T) / 2.0
    return Operator(sites, m, d)


def _random_gibbs(rng, n, model_pool=("tfim", "heisenberg", "random_nn"), beta_range=(0.4, 1.6)):
    name = model_pool[rng.integers(len(model_pool))]
    params = {}
    if name == "tfim":
        params["g"] = float(rng.uniform(0.4, 1.6))
    elif name == "random_nn":
        params["seed"] = int(rng.integers(10_000))
    beta = float(rng.uniform(*beta_range))
    interaction = preset_model(name, **params)
    return hamiltonians.gibbs_state(interaction, Interval(1, n), beta)


def _taylor_exp(m: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential, independent of the eigenbasis
    route used by the library."""
    norm = np.linalg.norm(m, np.inf)
    k = max(0, int(np.ceil(np.log2(max(norm, 1e-30)))) + 4)
    small = m / (2 ** k)
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, 24):
        term = term @ small / j
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


# -- individual checks (return (ok, detail)) -----------------------------------


def check_embed_trace_roundtrip(scale):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(6 * scale):
        op = _random_operator(rng, (1, 2))
        big = operators.embed(op, (1, 2, 3, 4))
        back = operators.partial_trace(big, (3, 4))
        worst = max(worst, operators.operator_norm(back - 4.0 * op))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def check_conditional_expectation(scale):
    rng = np.random.default_rng(12)
    ok, worst = True, 0.0
    for _ in range(20 * scale):
        op = _random_operator(rng, (1, 2, 3))
        proj = operators.conditional_expectation(op, (1,))
        twice = operators.conditional_expectation(operators.embed(proj, op.support), (1,))
        worst = max(worst, operators.operator_norm(twice - proj))
        ok &= operators.operator_norm(proj) <= operators.operator_norm(op) + 1e-12
    return ok and worst < 1e-10, f"idempotency deviation {worst:.2e}"


def check_russo_dye(scale):
    rng = np.random.default_rng(13)
    inter = preset_model("tfim", g=1.0)
    rho = hamiltonians.gibbs_state(inter, Interval(1, 2)).state
    ok = True
    for _ in range(10 * scale):
        q = _random_operator(rng, (1, 2, 3, 4))
        mapped = operators.partial_trace(
            operators.compose(operators.embed(rho, q.support), q), (1, 2)
        )
        ok &= operators.operator_norm(mapped) <= operators.operator_norm(q) + 1e-9
    return ok, "contractivity of the weighted partial trace"


def check_matrix_exp_reference(scale):
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(4 * scale):
        h = _random_operator(rng, (1, 2, 3, 4), hermitian=True)
        ours = operators.matrix_function(h, "exp").matrix
        ref = _taylor_exp(h.matrix.astype(complex))
        worst = max(worst, float(np.max(np.abs(ours - ref))) / np.linalg.norm(ref, 2))
    return worst < 1e-9, f"relative deviation {worst:.2e}"


def check_norm_inequalities(scale):
    rng = np.random.default_rng(15)
    ok = True
    for _ in range(10 * scale):
        a = _random_operator(rng, (1, 2))
        b = _random_operator(rng, (1, 2))
        for norm in (operators.operator_norm, operators.trace_norm, operators.hs_norm):
            ok &= norm(a + b) <= norm(a) + norm(b) + 1e-9
        ok &= operators.operator_norm(a @ b) <= (
            operators.operator_norm(a) * operators.operator_norm(b) + 1e-9
        )
        ok &= operators.operator_norm(a) <= operators.trace_norm(a) + 1e-12
    return ok, "triangle and submultiplicativity on random pairs"


def check_gibbs_invariants(scale):
    inter = preset_model("tfim", g=1.2)
    energies = []
    ok = True
    for beta in (0.5, 1.0, 2.0):
        ens = hamiltonians.gibbs_state(inter, Interval(1, 5), beta)
        comm = ens.state @ ens.hamiltonian - ens.hamiltonian @ ens.state
        ok &= operators.operator_norm(comm) < 1e-10
        ok &= abs(ens.state.trace() - 1.0) < 1e-12
        energies.append(np.real((ens.state @ ens.hamiltonian).trace()))
    ok &= energies[0] > energies[1] > energies[2]
    return ok, f"energies at beta=0.5,1,2: {[f'{e:.4f}' for e in energies]}"


def check_divergence_chain(scale):
    rng = np.random.default_rng(16)
    slack = 1e-9
    worst_margin = np.inf
    for _ in range(10 * scale):
        n = int(rng.integers(4, 7))
        ens = _random_gibbs(rng, n)
        a_sites, c_sites = (1,), (n,)
        corr = recovery.covariance_correlation(ens, a_sites, c_sites, seed=3).value
        tdist = divergences.trace_distance_to_product(ens, a_sites, c_sites)
        mi = divergences.mutual_information(ens, a_sites, c_sites)
        bs = divergences.bs_mutual_information(ens, a_sites, c_sites)
        gr = divergences.geometric_renyi_mi(ens, a_sites, c_sites, q=2.0)
        bound = divergences.mi_upper_bound_norm(ens, a_sites, c_sites)
        chain = [0.5 * corr ** 2, 0.5 * tdist ** 2, mi, bs, gr, bound]
        margins = [b - a for a, b in zip(chain, chain[1:])]
        worst_margin = min(worst_margin, min(margins))
        if min(margins) < -slack:
            return False, f"chain ordering violated by {min(margins):.2e}"
    return True, f"worst margin {worst_margin:.2e}"


def check_bs_umegaki_equality(scale):
    rng = np.random.default_rng(17)
    for _ in range(5 * scale):
        p = rng.dirichlet(np.ones(4)) + 1e-3
        q = rng.dirichlet(np.ones(4)) + 1e-3
        rho = Operator((1, 2), np.diag(p / p.sum()))
        sigma = Operator((1, 2), np.diag(q / q.sum()))
        if abs(divergences.bs_entropy(rho, sigma) - divergences.umegaki(rho, sigma)) > 1e-10:
            return False, "commuting pair split beyond 1e-10"
    sx = hamiltonians.SX
    sz = hamiltonians.SZ
    rho = Operator((1,), (np.eye(2) + 0.5 * sx) / 2.0)
    sigma = Operator((1,), (np.eye(2) + 0.5 * sz) / 2.0)
    gap = divergences.bs_entropy(rho, sigma) - divergences.umegaki(rho, sigma)
    return gap > 1e-6, f"non-commuting gap {gap:.2e}"


def check_renyi_monotone(scale):
    rng = np.random.default_rng(18)
    ens = _random_gibbs(rng, 4)
    vals = [divergences.geometric_renyi_mi(ens, (1,), (4,), q=q) for q in (1.01, 1.1, 1.5, 2.0)]
    bs = divergences.bs_mutual_information(ens, (1,), (4,))
    monotone = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    return monotone and vals[0] >= bs - 1e-9, f"values {['%.3e' % v for v in vals]}"


def check_theta_xi(scale):
    inter = preset_model("tfim", g=0.9)
    x, y = Interval(-1, 0), Interval(1, 2)
    theta = expansionals.expansional(inter, x, y, s=-0.5)
    h_xy = hamiltonians.build_hamiltonian(inter, Interval(-1, 2))
    h_split = operators.embed(hamiltonians.build_hamiltonian(inter, x), h_xy.support) + operators.embed(
        hamiltonians.build_hamiltonian(inter, y), h_xy.support
    )
    direct = operators.compose(
        operators.matrix_function(h_xy, "cexp", 0.5),
        operators.matrix_function(h_split, "cexp", -0.5),
    )
    dev = operators.operator_norm(theta.value - direct)
    xi_dev = operators.operator_norm(theta.dagger() - direct.dagger())
    return dev < 1e-10 and xi_dev < 1e-10, f"deviation {dev:.2e}"


def check_tail_telescoping(scale):
    inter = preset_model("tfim", g=1.0)
    tail = expansionals.tail_decomposition(inter, Interval(-2, 0), Interval(1, 3))
    return tail.partial_sum_errors[-1] < 1e-9, (
        f"final reconstruction error {tail.partial_sum_errors[-1]:.2e}"
    )


def check_step1(scale):
    rng = np.random.default_rng(19)
    worst = 0.0
    for _ in range(3 * scale):
        n = 6 if scale == 1 else int(rng.integers(6, 9))
        # identity conditioning degrades like exp(2 beta ||H||); stay in the
        # regime where double precision leaves an order of magnitude margin
        ens = _random_gibbs(rng, n, beta_range=(0.4, 1.2))
        part = recovery.Partition(ens.interval, 2, n - 4, 2)
        worst = max(worst, recovery.step1_factorization(ens, part).residual)
    return worst < 1e-9, f"max relative residual {worst:.2e}"


def check_classical_recovery(scale):
    inter = preset_model("ising_zz")
    ens = hamiltonians.gibbs_state(inter, Interval(1, 6), 1.0)
    dist = recovery.recovery_distance(ens, recovery.Partition(ens.interval, 2, 2, 2))
    return dist < 1e-10, f"classical chain distance {dist:.2e}"


def check_schmidt(scale):
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(10 * scale):
        q = _random_operator(rng, (1, 2))
        dec = recovery.operator_schmidt(q, 2)
        rebuilt = sum(
            (
                np.sqrt(c) * np.kron(l.matrix, r.matrix)
                for c, l, r in zip(dec.coefficients, dec.left_factors, dec.right_factors)
            ),
            np.zeros_like(q.matrix),
        )
        worst = max(worst, float(np.max(np.abs(rebuilt - q.matrix))))
        if abs(dec.coefficients.sum() - operators.hs_norm(q) ** 2) > 1e-10:
            return False, "coefficient sum rule violated"
    return worst < 1e-10, f"max reconstruction deviation {worst:.2e}"


def check_corr_duality(scale):
    bell = np.zeros((4, 4))
    bell[0, 0] = bell[0, 3] = bell[3, 0] = bell[3, 3] = 0.5
    res = recovery.covariance_correlation(Operator((1, 2), bell), (1,), (2,), seed=5)
    ok = abs(res.value - 1.0) < 1e-8 and res.value <= res.trace_norm_bound + 1e-9
    return ok, f"Bell value {res.value:.10f}, dual bound {res.trace_norm_bound:.4f}"


def check_fit(scale):
    ells = range(1, 9)
    rate, _, r2 = experiments.fit_exponential([(l, np.exp(-2.0 * l)) for l in ells])
    return abs(rate + 2.0) < 1e-9 and abs(r2 - 1.0) < 1e-12, f"rate {rate:.12f}, r2 {r2:.6f}"


def check_sweep_determinism(scale):
    config = experiments.SweepConfig(
        model="tfim",
        chain_length=6,
        a_size=1,
        c_size=1,
        b_range=(1, 2, 3),
        quantities=("mi", "corr"),
        seed=7,
        model_params=(("g", 1.0),),
    )
    first = experiments.run_sweep(config)
    second = experiments.run_sweep(config)
    same = all(a.samples == b.samples for a, b in zip(first, second))
    return same, "two sweeps produced identical samples"


def check_translation_invariance(scale):
    worst = 0.0
    for name, params in (("tfim", {"g": 1.0}), ("ising_zz", {}), ("random_nn", {"seed": 3})):
        inter = preset_model(name, **params)
        ens = hamiltonians.gibbs_state(inter, Interval(1, 10), 1.0)
        for site in range(4, 7):
            left = hamiltonians.reduced_state(ens, {site}).matrix
            right = hamiltonians.reduced_state(ens, {site + 1}).matrix
            # identify the two local spaces positionally before comparing
            worst = max(worst, float(np.sum(np.abs(np.linalg.eigvalsh(left - right)))))
    return worst < 0.05, f"max adjacent bulk deviation {worst:.4f}"


def check_gamma_ladder(scale):
    inter = preset_model("tfim", g=1.0)
    probe = Operator((0, 1), np.kron(hamiltonians.SZ, hamiltonians.SZ))
    norms = []
    for m in (2, 3, 4, 5):
        h = hamiltonians.build_hamiltonian(inter, Interval(-m, m))
        evolved = expansionals.complex_time_evolution(h, probe, 1j * 0.5)
        norms.append(operators.operator_norm(evolved))
    spread = max(norms) / min(norms)
    return spread < 1.5 and abs(norms[-1] - norms[-2]) < abs(norms[1] - norms[0]) + 1e-12, (
        f"norms across growing chains: {['%.5f' % v for v in norms]}"
    )


_FAST_CHECKS = [
    ("embed_trace_roundtrip", check_embed_trace_roundtrip),
    ("conditional_expectation", check_conditional_expectation),
    ("russo_dye_contractivity", check_russo_dye),
    ("matrix_exp_reference", check_matrix_exp_reference),
    ("norm_inequalities", check_norm_inequalities),
    ("gibbs_invariants", check_gibbs_invariants),
    ("divergence_chain", check_divergence_chain),
    ("bs_umegaki_equality", check_bs_umegaki_equality),
    ("renyi_monotone", check_renyi_monotone),
    ("theta_xi_identities", check_theta_xi),
    ("tail_telescoping", check_tail_telescoping),
    ("step1_exactness", check_step1),
    ("classical_recovery", check_classical_recovery),
    ("schmidt_decomposition", check_schmidt),
    ("corr_duality", check_corr_duality),
    ("exponential_fit", check_fit),
    ("sweep_determinism", check_sweep_determinism),
]

_FULL_ONLY_CHECKS = [
    ("translation_invariance", check_translation_invariance),
    ("gamma_ladder", check_gamma_ladder),
]


def run_suite(level: str = "fast", stream=None) -> int:
    """Run all invariants at the given level, print one line per check and
    return 0 iff everything passed."""
    import sys

    stream = stream or sys.stdout
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    scale = 1 if level == "fast" else 5
    checks = list(_FAST_CHECKS) + (_FULL_ONLY_CHECKS if level == "full" else [])
    first_failure = None
    for name, fn in checks:
        try:
            ok, detail = fn(scale)
        except Exception as exc:  # a crash counts as a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)
        if not ok and first_failure is None:
            first_failure = name
    if first_failure is not None:
        print(f"FIRST FAILURE: {first_failure}", file=stream)
        return 1
    print(f"all {len(checks)} invariants passed at level {level}", file=stream)
    return 0
