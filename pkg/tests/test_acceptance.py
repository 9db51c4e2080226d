"""Acceptance battery: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``);
the per-criterion summary is printed at the end of the session.
"""

import math
import sys
import time

import numpy as np
import pytest

from hamcert.certify_dynamics import (
    CertificationConfig,
    Decision,
    bonami_margin,
    certify,
    certify_amplified,
    spectral_condition_fraction,
)
from hamcert.dense_linalg import eig_hermitian, exp_i_hermitian, operator_norm
from hamcert.dynamics import (
    EvolutionOracle,
    NoiseModel,
    analytic_trotter_steps,
    identity_probability_curve,
    identity_probability_dense,
    identity_probability_spectral,
    separated_pair_fraction,
    trotter_error,
    trotter_steps,
)
from hamcert.gibbs import (
    SHADOW_CONSTANT,
    NetIndex,
    certify_gibbs,
    concentration_rate,
    gibbs_state,
    learn_gibbs,
    pinsker_bounds,
    trace_distance,
)
from hamcert.gibbs.learning import net_expectations
from hamcert.harness import ExperimentConfig, emit_csv, run
from hamcert.pauli_algebra import (
    LocalHamiltonian,
    enumerate_local_paulis,
    pauli_dense,
    pauli_expectations,
    random_local_hamiltonian,
    to_dense,
)

pytestmark = pytest.mark.acceptance


def frobenius(h: LocalHamiltonian) -> float:
    return math.sqrt(sum(v * v for v in h.coeffs.values()))


def random_instance(rng, n_max: int, k_max: int, nonzero: bool = True) -> LocalHamiltonian:
    """Random k-local difference Hamiltonian with random sparsity and coefficient scale."""
    while True:
        k = int(rng.integers(1, k_max + 1))
        n = int(rng.integers(k, n_max + 1))
        h = random_local_hamiltonian(n, k, coeff_bound=10 ** rng.uniform(-2, 1),
                                     sparsity=rng.uniform(0.05, 1.0), seed=rng)
        if not (nonzero and h.is_zero):
            return h


@pytest.fixture(scope="module")
def instance_set():
    """Shared instance set for the separated-pair and Bonami criteria: k in {1, 2}, n <= 6."""
    rng = np.random.default_rng(20261017)
    out = []
    for i in range(1000):
        k = 1 + i % 2
        n = int(rng.integers(k, 7))
        h = random_local_hamiltonian(n, k, coeff_bound=10 ** rng.uniform(-2, 1),
                                     sparsity=rng.uniform(0.05, 1.0), seed=rng)
        if h.is_zero:
            h = LocalHamiltonian(n, k, {enumerate_local_paulis(n, k)[0]: 1.0})
        out.append(h)
    return out


def test_criterion_01_two_path_identity_probability(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        dh = random_instance(rng, 4, 2, nonzero=False)
        t = rng.uniform(0, 10)
        spec = eig_hermitian(to_dense(dh))
        cos_sum = identity_probability_spectral(spec.eigenvalues, t)
        trace_path = identity_probability_dense(exp_i_hermitian(spec, t))
        worst = max(worst, abs(cos_sum - trace_path))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 60
    assert criterion(1, ok, f"max |cos-sum - |Tr U|^2/4^n| = {worst:.2e} (tol 1e-9), {elapsed:.1f}s")


def test_criterion_02_separated_pair_lower_bound(criterion, instance_set):
    start = time.perf_counter()
    violations, worst = 0, math.inf
    for dh in instance_set:
        lam = eig_hermitian(to_dense(dh), vectors=False).eigenvalues
        margin = separated_pair_fraction(lam, frobenius(dh)) - 1 / (3 * 9**dh.k)
        worst = min(worst, margin)
        violations += margin < 0
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 120
    assert criterion(2, ok, f"{violations} violations / {len(instance_set)}, worst margin {worst:.4f}, "
                            f"{elapsed:.1f}s")


def test_criterion_03_bonami(criterion, instance_set):
    violations, worst = 0, math.inf
    for dh in instance_set:
        margin = bonami_margin(to_dense(dh), dh.k)
        worst = min(worst, margin)
        violations += margin < -1e-9
    assert criterion(3, violations == 0,
                     f"{violations} violations / {len(instance_set)}, worst relative margin {worst:.4f}")


def test_criterion_04_spectral_condition(criterion):
    rng = np.random.default_rng(4)
    fractions = []
    for _ in range(50):
        dh = random_instance(rng, 4, 2)
        eps = frobenius(dh) * rng.uniform(0.25, 1.0)
        lam = eig_hermitian(to_dense(dh), vectors=False).eigenvalues
        frac, _ = spectral_condition_fraction(lam, eps, 10_000, rng)
        fractions.append(frac)
    worst = min(fractions)
    assert criterion(4, worst >= 1 / 3 - 0.03,
                     f"min Pr_t[I(t) <= 1 - Lambda/4] = {worst:.4f} over 50 far instances (need >= 0.3033)")


def test_criterion_05_frobenius_lower_bound(criterion):
    rng = np.random.default_rng(5)
    violations, worst = 0, math.inf
    for _ in range(10_000):
        dh = random_instance(rng, 3, 2, nonzero=False)
        t = rng.uniform(0, 10)
        lam = eig_hermitian(to_dense(dh), vectors=False).eigenvalues
        value = identity_probability_spectral(lam, t)
        margin = value - (1 - t**2 * frobenius(dh) ** 2)
        worst = min(worst, margin)
        violations += margin < -1e-12
    assert criterion(5, violations == 0, f"{violations} violations / 10000, worst margin {worst:.2e}")


def test_criterion_06_trotter(criterion):
    rng = np.random.default_rng(6)
    misses, slopes, worst_ratio = 0, [], 0.0
    for _ in range(100):
        k = int(rng.integers(1, 3))
        n = int(rng.integers(k, 4))
        h = random_local_hamiltonian(n, k, seed=rng)
        h0 = random_local_hamiltonian(n, k, seed=rng)
        c_op = max(1.0, operator_norm(to_dense(h)), operator_norm(to_dense(h0)))
        t = rng.uniform(0, 4.0)
        eps_trott = 1 / (384 * 9**k)
        steps = trotter_steps(c_op, t, eps_trott)
        err = trotter_error(h, h0, t, steps)
        worst_ratio = max(worst_ratio, err / eps_trott)
        misses += err > eps_trott
        # Error scaling in the asymptotic regime c t / l <= 1/4, doubling l three times.
        base = max(1, math.ceil(4 * c_op * t))
        ls = [base * 2**j for j in range(4)]
        errs = [trotter_error(h, h0, t, l) for l in ls]
        if min(errs) > 1e-13:
            slopes.append(np.polyfit(np.log(ls), np.log(errs), 1)[0])
    lo, hi = min(slopes), max(slopes)
    ok = misses == 0 and -2.4 <= lo and hi <= -1.6 and len(slopes) >= 90
    assert criterion(6, ok, f"{misses} pairs above eps_Trott (max err/eps_Trott = {worst_ratio:.3f}); "
                            f"fitted exponents in [{lo:.3f}, {hi:.3f}] over {len(slopes)} pairs")


def _rates(cases, cfg_kwargs, runs=100):
    out = {}
    for name, (h0, h, expected) in cases.items():
        c_op = max(1.0, operator_norm(to_dense(h)), operator_norm(to_dense(h0)))
        cfg = CertificationConfig(c_op=c_op, **cfg_kwargs)
        hits = sum(certify(h0, EvolutionOracle(h), cfg, seed=s).decision is expected for s in range(runs))
        out[name] = hits / runs
    return out


def test_criterion_07_algorithm_one_end_to_end(criterion):
    start = time.perf_counter()
    n, k, eps = 2, 1, 0.5
    h0 = random_local_hamiltonian(n, k, coeff_bound=0.2, seed=70)
    close_dir = LocalHamiltonian(n, k, {"XI": 0.6, "IZ": 0.8})
    cases = {
        "a_equal": (h0, h0, Decision.CLOSE),
        "b_far": (h0, h0 + LocalHamiltonian(n, k, {"XI": eps}), Decision.FAR),
        "c_close_radius": (h0, h0 + close_dir * (eps / (8 * 3**k)), Decision.CLOSE),
    }
    assert frobenius(cases["c_close_radius"][1] - h0) == pytest.approx(eps / 24)
    clean = _rates(cases, {"eps": eps, "k": k, "n": n})
    spam = NoiseModel(1 / (288 * 9**k), "adversarial-shift")
    noisy = _rates(cases, {"eps": eps, "k": k, "n": n, "noise": spam})
    elapsed = time.perf_counter() - start
    ok = all(r >= 0.85 for r in clean.values())
    ok &= all(clean[c] - noisy[c] <= 0.05 for c in cases)
    ok &= elapsed < 600
    detail = ", ".join(f"{c}: {clean[c]:.2f} -> {noisy[c]:.2f} with SPAM" for c in cases)
    assert criterion(7, ok, f"{detail}; {elapsed:.1f}s")


def test_criterion_08_evolution_time_scaling(criterion):
    n, k, delta = 2, 1, 0.1
    h = random_local_hamiltonian(n, k, coeff_bound=0.2, seed=80)
    epsilons = [0.5, 0.25, 0.125, 0.0625]
    means = []
    for eps in epsilons:
        cfg = CertificationConfig(eps=eps, k=k, n=n)
        totals = [certify_amplified(h, EvolutionOracle(h), cfg, delta, seed=s).ledger["total_evolution_time"]
                  for s in range(20)]
        means.append(float(np.mean(totals)))
    slope = np.polyfit(np.log(epsilons), np.log(means), 1)[0]
    ok = -1.15 <= slope <= -0.85
    assert criterion(8, ok, f"fitted exponent {slope:.4f} (need [-1.15, -0.85]); "
                            f"mean times {', '.join(f'{m:.3g}' for m in means)}")


def test_criterion_09_pinsker_bounds(criterion):
    rng = np.random.default_rng(9)
    violations = 0
    for i in range(200):
        k = int(rng.integers(1, 3))
        n = int(rng.integers(k, 4))
        beta = (0.1, 1.0, 5.0)[i % 3]
        h = random_local_hamiltonian(n, k, seed=rng)
        h0 = random_local_hamiltonian(n, k, seed=rng)
        b = pinsker_bounds(gibbs_state(h, beta), gibbs_state(h0, beta))
        violations += any(bound < b.trace_distance - 1e-12 for bound in b[1:])
    z = LocalHamiltonian(1, 1, {"Z": 1.0})
    spot = abs(trace_distance(gibbs_state(z, 1.0), np.eye(2) / 2) - math.tanh(1.0))
    ok = violations == 0 and spot <= 1e-9
    assert criterion(9, ok, f"{violations} pairs with a bound below the trace distance / 200; "
                            f"|tr(Gibbs(Z,1), I/2) - tanh 1| = {spot:.1e}")


def test_criterion_10_net_covering(criterion):
    rng = np.random.default_rng(10)
    paulis = np.stack([pauli_dense(p) for p in enumerate_local_paulis(1, 1)])
    violations, worst, sizes = 0, 0.0, set()
    for i in range(100):
        beta, eps_net = ((0.01, 0.5), (0.05, 1.0), (0.1, 1.0), (0.5, 20.0))[i % 4]
        idx = NetIndex(1, 1, beta, eps_net)
        sizes.add(idx.size)
        h = random_local_hamiltonian(1, 1, seed=rng)
        rho = gibbs_state(h, beta).rho
        # Exhaustive scan: every net member's Gibbs state, rebuilt from its Pauli expectations.
        best = math.inf
        for _, coeffs in idx.coefficient_blocks():
            r = net_expectations(idx, coeffs)
            taus = (np.eye(2) + np.tensordot(r, paulis, axes=1)) / 2
            dists = np.abs(np.linalg.eigvalsh(taus - rho)).sum(axis=1)
            best = min(best, float(dists.min()))
        worst = max(worst, best / eps_net)
        violations += best > eps_net
    assert criterion(10, violations == 0, f"{violations} violations / 100; worst min-distance/eps_net "
                                          f"{worst:.4f}; net sizes {sorted(sizes)}")


def test_criterion_11_shadow_concentration(criterion):
    rho = gibbs_state(random_local_hamiltonian(3, 2, seed=11), 1.0)
    rate = concentration_rate(rho, 2, 0.2, 0.1, 200, seed=2026)
    assert criterion(11, rate >= 0.9, f"{rate:.3f} of 200 runs within 0.2 on all weight<=2 Paulis "
                                      f"(constant {SHADOW_CONSTANT})")


def test_criterion_12_learning(criterion):
    start = time.perf_counter()
    n, k, beta, eps, delta, eps_net = 1, 1, 1.0, 0.2, 0.1, 50.0
    planted = LocalHamiltonian(1, 1, {"Z": 0.5})
    off_net = LocalHamiltonian(1, 1, {"X": 0.37})
    net = NetIndex(n, k, beta, eps_net)
    exact = learn_gibbs(gibbs_state(planted, beta), n, k, beta, eps, delta, eps_net=eps_net, exact=True)
    recovered, good_planted, good_off = 0, 0, 0
    for s in range(100):
        rho = gibbs_state(planted, beta)
        res = learn_gibbs(rho, n, k, beta, eps, delta, eps_net=eps_net, seed=s)
        hit = res.hamiltonian == exact.hamiltonian
        recovered += hit
        good_planted += hit and trace_distance(rho, res.state) <= 5 * eps
        rho = gibbs_state(off_net, beta)
        res = learn_gibbs(rho, n, k, beta, eps, delta, eps_net=eps_net, seed=1000 + s)
        good_off += trace_distance(rho, res.state) <= 5 * eps
    elapsed = time.perf_counter() - start
    ok = good_planted >= 90 and good_off >= 90 and elapsed < 300 and net.size <= 10**4
    ok &= exact.hamiltonian.coefficient_vector().tolist() == [0.0, 0.0, 0.5]
    assert criterion(12, ok, f"planted recovered {recovered}/100 (within 5 eps: {good_planted}); "
                             f"off-net within 5 eps {good_off}/100; net {net.size} members; {elapsed:.1f}s")


def test_criterion_13_gibbs_certification(criterion):
    beta, eps, delta = 1.0, 0.7, 0.1
    assert 2 * eps <= 2 * math.tanh(1.0)
    h_equal = random_local_hamiltonian(2, 1, seed=13)
    rho = gibbs_state(h_equal, beta)
    closes = sum(certify_gibbs(rho, rho, 2, 1, beta, eps, delta, seed=s).decision is Decision.CLOSE
                 for s in range(100))
    z = LocalHamiltonian(1, 1, {"Z": 1.0})
    rz, rmz = gibbs_state(z, beta), gibbs_state(-z, beta)
    fars = sum(certify_gibbs(rz, rmz, 1, 1, beta, eps, delta, seed=s).far for s in range(100))
    # Exact-expectation dry run: the decision is the bare threshold test.
    dry_ok = True
    rng = np.random.default_rng(13)
    for _ in range(50):
        a = gibbs_state(random_local_hamiltonian(2, 1, seed=rng), beta)
        b = gibbs_state(random_local_hamiltonian(2, 1, seed=rng), beta)
        v = certify_gibbs(a, b, 2, 1, beta, eps, delta, exact=True)
        gap = np.abs(pauli_expectations(a.rho - b.rho, enumerate_local_paulis(2, 1))).max()
        dry_ok &= v.far == bool(gap >= v.threshold)
        dry_ok &= v == certify_gibbs(a, b, 2, 1, beta, eps, delta, exact=True)
    ok = closes >= 95 and fars >= 95 and dry_ok
    assert criterion(13, ok, f"equal states CLOSE {closes}/100; Z vs -Z FAR {fars}/100; "
                             f"exact dry run consistent: {dry_ok}")


def test_criterion_14_determinism(criterion):
    configs = [
        ExperimentConfig("certify-dynamics", seed=5, trials=4,
                         params={"n": 2, "h": "XI 0.5; IZ 0.1", "h0": "IZ 0.1", "eps": 0.5, "delta": 0.1}),
        ExperimentConfig("learn-gibbs", seed=5, trials=3, params={"h": "X 0.37", "eps": 0.2, "eps_net": 50.0}),
        ExperimentConfig("certify-gibbs", seed=5, trials=3, params={"h": "Z 1", "h0": "Z -1", "eps": 0.7}),
        ExperimentConfig("verify-invariants", seed=5, params={"n": 3, "k": 2, "samples": 60}),
    ]
    identical = 0
    for cfg in configs:
        first = run(cfg)
        second = run(cfg)
        parallel = run(ExperimentConfig(cfg.command, cfg.seed, cfg.trials, 2, None, cfg.params))
        identical += (first.records_json() == second.records_json() == parallel.records_json()
                      and emit_csv(first) == emit_csv(second) == emit_csv(parallel))
    assert criterion(14, identical == len(configs),
                     f"{identical}/{len(configs)} batteries byte-identical across reruns and 1 vs 2 workers")


def test_analytic_steps_match_protocol():
    # The protocol sizes Trotter steps analytically; keep that in sync with trotter_steps.
    assert trotter_steps(1.0, 2.0, 1e-3) == analytic_trotter_steps(1.0, 2.0, 1e-3)
    assert identity_probability_curve(np.zeros(2), [0.0, 1.0]).tolist() == [1.0, 1.0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
