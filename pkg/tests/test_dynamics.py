import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamcert.dense_linalg import eig_hermitian, exp_i_hermitian, operator_norm
from hamcert.dynamics import (
    EvolutionOracle,
    Ledger,
    NoiseModel,
    analytic_trotter_steps,
    estimate_identity_probability,
    frobenius_lower_bound_check,
    hoeffding_shots,
    identity_probability_curve,
    identity_probability_dense,
    identity_probability_spectral,
    separated_pair_fraction,
    trotter_error,
    trotter_steps,
    trotter_unitary,
)
from hamcert.pauli_algebra import LocalHamiltonian, random_local_hamiltonian, to_dense

X1 = LocalHamiltonian(1, 1, {"X": 1.0})
ZERO2 = LocalHamiltonian(2, 2)


def test_identity_probability_zero_hamiltonian():
    for t in (0.0, 0.3, 7.0):
        assert identity_probability_spectral(ZERO2, t) == pytest.approx(1.0)


def test_identity_probability_single_qubit_closed_form():
    eps = 0.5
    h = LocalHamiltonian(1, 1, {"X": eps})
    for t in np.linspace(0, 10, 21):
        assert identity_probability_spectral(h, t) == pytest.approx(math.cos(eps * t) ** 2, abs=1e-12)
    assert identity_probability_spectral(h, math.pi / (2 * eps)) == pytest.approx(0.0, abs=1e-12)


def test_identity_probability_two_paths():
    h = random_local_hamiltonian(2, 2, seed=11)
    spec = eig_hermitian(to_dense(h))
    u = exp_i_hermitian(spec, 0.7)
    assert identity_probability_spectral(spec, 0.7) == pytest.approx(identity_probability_dense(u), abs=1e-12)


def test_identity_probability_curve_matches_pointwise():
    h = random_local_hamiltonian(3, 2, seed=12)
    lam = eig_hermitian(to_dense(h)).eigenvalues
    ts = np.linspace(0, 5, 17)
    curve = identity_probability_curve(lam, ts)
    assert curve == pytest.approx([identity_probability_spectral(lam, t) for t in ts], abs=1e-12)


def test_identity_probability_rejects_negative_time():
    with pytest.raises(ValueError):
        identity_probability_spectral(X1, -1.0)


def test_separated_pair_fraction_examples():
    assert separated_pair_fraction(ZERO2, 0.1) == 0.0
    assert separated_pair_fraction(X1, 1.0) == 0.5
    # The boundary counts: gaps of exactly eps are separated.
    assert separated_pair_fraction(X1, 2.0) == 0.5


def test_separated_pair_fraction_brute_force():
    rng = np.random.default_rng(0)
    lam = rng.normal(size=8)
    eps = 0.6
    count = sum(abs(a - b) >= eps for a in lam for b in lam)
    assert separated_pair_fraction(lam, eps) == count / 64


def test_separated_pair_bound_three_qubits():
    h = random_local_hamiltonian(3, 2, seed=4)
    fro = math.sqrt(sum(v * v for v in h.coeffs.values()))
    assert separated_pair_fraction(h, fro) >= 1 / (3 * 81)


def test_frobenius_lower_bound_examples():
    assert frobenius_lower_bound_check(ZERO2, 2.0) == pytest.approx((1.0, 1.0))
    value, bound = frobenius_lower_bound_check(X1, 0.1)
    assert value == pytest.approx(math.cos(0.1) ** 2)
    assert bound == pytest.approx(0.99)
    assert value > bound


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 10))
def test_frobenius_lower_bound_property(seed, t):
    h = random_local_hamiltonian(2, 2, coeff_bound=2.0, sparsity=0.5, seed=seed)
    value, bound = frobenius_lower_bound_check(h, t)
    assert value >= bound - 1e-12


def test_trotter_trivial_cases():
    h = random_local_hamiltonian(2, 2, seed=1)
    for steps in (1, 3):
        assert np.allclose(trotter_unitary(h, h, 1.3, steps), np.eye(4))
    h0 = random_local_hamiltonian(2, 2, seed=2)
    assert np.allclose(trotter_unitary(h, h0, 0.0, 5), np.eye(4))
    assert trotter_steps(1.0, 0.0, 1e-3) == 1
    assert trotter_steps(2.0, 1.0, 1e-3, h, h, exact_check=True) == 1


def test_trotter_product_unitary_and_oracle_error_decay():
    h = random_local_hamiltonian(2, 2, seed=3)
    h0 = random_local_hamiltonian(2, 2, seed=4)
    v = trotter_unitary(h, h0, 1.0, 4)
    assert np.max(np.abs(v @ v.conj().T - np.eye(4))) < 1e-8
    errs = [trotter_error(h, h0, 1.0, l) for l in (4, 8, 16, 32)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.5 < r < 4.5 for r in ratios)


def test_trotter_steps_meet_accuracy():
    h = random_local_hamiltonian(2, 2, seed=5)
    h0 = random_local_hamiltonian(2, 2, seed=6)
    c_op = max(operator_norm(to_dense(h)), operator_norm(to_dense(h0)))
    l = trotter_steps(c_op, 2.0, 1e-3)
    assert l == analytic_trotter_steps(c_op, 2.0, 1e-3)
    assert trotter_error(h, h0, 2.0, l) <= 1e-3
    searched = trotter_steps(c_op, 2.0, 1e-3, h, h0, exact_check=True)
    assert trotter_error(h, h0, 2.0, searched) <= 1e-3
    assert searched <= 2 * l


def test_trotter_steps_validation():
    with pytest.raises(ValueError):
        trotter_steps(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        trotter_steps(1.0, 1.0, 1e-3, exact_check=True)


def test_trotter_steps_detects_bad_operator_norm_bound():
    h = LocalHamiltonian(2, 2, {"XX": 3.0, "YI": 2.0})
    h0 = LocalHamiltonian(2, 2, {"ZZ": -3.0, "IX": 2.0})
    with pytest.raises(RuntimeError):
        trotter_steps(1e-4, 2.0, 1e-6, h, h0, exact_check=True)


def test_ledger_charges_and_snapshot():
    led = Ledger()
    assert led.snapshot()["time_resolution"] is None
    led.charge(0.5, 4, experiments=2)
    led.charge(0.25, 2)
    assert led.total_evolution_time == pytest.approx(2.5)
    assert led.query_count == 6
    assert led.experiment_count == 2
    assert led.time_resolution == 0.25
    other = Ledger()
    other.charge(1.0, 1)
    led.merge(other)
    assert led.query_count == 7
    with pytest.raises(ValueError):
        led.charge(-1.0, 1)


def test_oracle_query_accounting():
    oracle = EvolutionOracle(X1)
    u = oracle.evolution(0.3)
    assert np.allclose(u, exp_i_hermitian(to_dense(X1), 0.3))
    assert oracle.ledger.total_evolution_time == pytest.approx(0.3)
    assert oracle.ledger.query_count == 1

    program = oracle.trotterized_difference(LocalHamiltonian(1, 1), 1.2, 3)
    estimate_identity_probability(program, 10, seed=0)
    led = oracle.ledger
    # 10 experiments, each 2l = 6 queries of t/2l = 0.2.
    assert led.experiment_count == 10
    assert led.query_count == 1 + 60
    assert led.total_evolution_time == pytest.approx(0.3 + 10 * 1.2)
    assert led.reference_evolution_time == pytest.approx(10 * 1.2)


def test_oracle_dimension_mismatch():
    with pytest.raises(ValueError):
        EvolutionOracle(X1).trotterized_difference(ZERO2, 1.0, 1)


def test_estimator_examples():
    assert estimate_identity_probability(np.eye(2), 50, seed=1) == 1.0
    u = exp_i_hermitian(to_dense(X1), math.pi / 2)
    assert estimate_identity_probability(u, 1000, seed=1) == 0.0
    with pytest.raises(ValueError):
        estimate_identity_probability(np.eye(2), 0)


def test_estimator_hoeffding_accuracy():
    p = math.cos(0.3) ** 2
    u = exp_i_hermitian(to_dense(X1), 0.3)
    hits = sum(abs(estimate_identity_probability(u, 10**5, seed=s) - p) <= 0.01 for s in range(100))
    assert hits >= 99


def test_noise_model_bounds():
    rng = np.random.default_rng(0)
    noise = NoiseModel(0.05, "random-shift")
    shifts = [noise.perturb(0.5, rng) - 0.5 for _ in range(1000)]
    assert max(abs(s) for s in shifts) <= 0.05
    adv = NoiseModel(0.05, "adversarial-shift")
    assert adv.perturb(0.8, rng, target=0.9) == pytest.approx(0.85)
    assert adv.perturb(0.95, rng, target=0.9) == pytest.approx(0.9)
    assert adv.perturb(0.99, rng, target=0.5) == pytest.approx(0.94)
    assert NoiseModel(0.5, "random-shift").perturb(0.9, np.random.default_rng(1)) <= 1.0
    with pytest.raises(ValueError):
        NoiseModel(-0.1)
    with pytest.raises(ValueError):
        NoiseModel(0.1, "gaussian")


def test_hoeffding_shots():
    assert hoeffding_shots(0.1, 0.05) == math.ceil(math.log(40) / 0.02)
    with pytest.raises(ValueError):
        hoeffding_shots(0.0, 0.1)
