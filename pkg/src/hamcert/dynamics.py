"""Time-evolution access: Bell-sampling identity probability, eigenvalue-gap
statistics, symmetric Trotter products and a shot-level estimator with SPAM noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dense_linalg import Spectrum, eig_hermitian, exp_i_hermitian, num_qubits, operator_norm
from .pauli_algebra import LocalHamiltonian, to_dense


def _dense(h) -> np.ndarray:
    return to_dense(h) if isinstance(h, LocalHamiltonian) else np.asarray(h, dtype=complex)


def _eigenvalues(spec) -> np.ndarray:
    if isinstance(spec, Spectrum):
        return spec.eigenvalues
    if isinstance(spec, LocalHamiltonian):
        return eig_hermitian(to_dense(spec), vectors=False).eigenvalues
    arr = np.asarray(spec)
    if arr.ndim == 2:
        return eig_hermitian(arr, vectors=False).eigenvalues
    return np.sort(arr.astype(float))


# -- identity probability ------------------------------------------------------


def identity_probability_spectral(spec, t: float) -> float:
    """Probability of the all-identity Bell outcome for ``exp(-i t dH)``.

    Evaluated as the double cosine sum over eigenvalue pairs, divided by 4^n.
    ``spec`` is a Spectrum, an eigenvalue array, a dense matrix or a
    LocalHamiltonian.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam = _eigenvalues(spec)
    d = len(lam)
    gaps = lam[:, None] - lam[None, :]
    return float(np.cos(gaps * t).sum() / d**2)


def identity_probability_curve(spec, ts) -> np.ndarray:
    """Vectorized ``I(t)`` over many times via ``|sum_s exp(-i lambda_s t)|^2 / 4^n``."""
    lam = _eigenvalues(spec)
    ts = np.asarray(ts, dtype=float)
    amp = np.exp(-1j * np.multiply.outer(ts, lam)).mean(axis=-1)
    return np.abs(amp) ** 2


def identity_probability_dense(u: np.ndarray) -> float:
    """``|Tr U|^2 / 4^n``: squared identity Pauli coefficient of a unitary."""
    u = np.asarray(u)
    return float(abs(np.trace(u) / u.shape[0]) ** 2)


def separated_pair_fraction(spec, eps: float) -> float:
    """Fraction of ordered eigenvalue pairs ``(r, s)`` with ``|lambda_r - lambda_s| >= eps``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    lam = _eigenvalues(spec)
    gaps = np.abs(lam[:, None] - lam[None, :])
    return float(np.count_nonzero(gaps >= eps) / len(lam) ** 2)


def frobenius_lower_bound_check(spec, t: float) -> tuple[float, float]:
    """``(I(t), 1 - t^2 ||dH||_F^2)``; the first entry never falls below the second."""
    lam = _eigenvalues(spec)
    return identity_probability_spectral(lam, t), 1.0 - t**2 * float(np.mean(lam**2))


# -- Trotterization -------------------------------------------------------------


def trotter_unitary(h, h0, t: float, steps: int) -> np.ndarray:
    """``(e^{-itH/2l} e^{itH0/l} e^{-itH/2l})^l`` for ``l = steps``."""
    if steps < 1:
        raise ValueError("number of Trotter steps must be >= 1")
    return _trotter_product(eig_hermitian(_dense(h)), eig_hermitian(_dense(h0)), t, steps)


def _trotter_product(h_spec: Spectrum, h0_spec: Spectrum, t: float, steps: int) -> np.ndarray:
    half = exp_i_hermitian(h_spec, t / (2 * steps))
    mid = exp_i_hermitian(h0_spec, -t / steps)
    return np.linalg.matrix_power(half @ mid @ half, steps)


def trotter_error(h, h0, t: float, steps: int) -> float:
    """Operator-norm distance between ``exp(-it(H - H0))`` and the Trotter product."""
    exact = exp_i_hermitian(_dense(h) - _dense(h0), t)
    return operator_norm(exact - trotter_unitary(h, h0, t, steps))


def analytic_trotter_steps(c_op: float, t: float, eps_trott: float, constant: float = 1.0) -> int:
    if eps_trott <= 0:
        raise ValueError("eps_trott must be positive")
    return max(1, math.ceil(constant * math.sqrt((c_op * t) ** 3 / eps_trott)))


def trotter_steps(
    c_op: float,
    t: float,
    eps_trott: float,
    h=None,
    h0=None,
    exact_check: bool = False,
    constant: float = 1.0,
) -> int:
    """Number of symmetric Trotter steps for accuracy ``eps_trott`` at time t.

    Without ``exact_check`` this is ``ceil(constant * sqrt((c_op t)^3 / eps_trott))``.
    With it, l is found by doubling from 1 until the measured operator-norm
    error is at most ``eps_trott``; the analytic count is verified as well.
    """
    analytic = analytic_trotter_steps(c_op, t, eps_trott, constant)
    if not exact_check:
        return analytic
    if h is None or h0 is None:
        raise ValueError("exact_check needs both Hamiltonians")
    if trotter_error(h, h0, t, analytic) > eps_trott:
        raise RuntimeError(
            f"analytic step count {analytic} misses eps_trott={eps_trott}; is c_op={c_op} "
            "really an operator-norm bound?"
        )
    steps = 1
    while trotter_error(h, h0, t, steps) > eps_trott:
        steps *= 2
    return steps


# -- access model --------------------------------------------------------------


@dataclass
class Ledger:
    """Resource accounting for queries to the unknown evolution.

    ``total_evolution_time`` and ``query_count`` count queries to the unknown H;
    the ``reference_*`` fields count the applications of the known H0 evolution.
    """

    total_evolution_time: float = 0.0
    query_count: int = 0
    experiment_count: int = 0
    reference_evolution_time: float = 0.0
    reference_query_count: int = 0
    time_resolution: float = math.inf

    def charge(self, time_per_query: float, queries: int, experiments: int = 0,
               reference_time: float = 0.0, reference_queries: int = 0) -> None:
        if time_per_query < 0 or queries < 0 or experiments < 0:
            raise ValueError("ledger charges must be nonnegative")
        if queries and time_per_query > 0:
            self.total_evolution_time += time_per_query * queries
            self.query_count += queries
            self.time_resolution = min(self.time_resolution, time_per_query)
        self.experiment_count += experiments
        self.reference_evolution_time += reference_time
        self.reference_query_count += reference_queries

    def merge(self, other: "Ledger") -> None:
        self.total_evolution_time += other.total_evolution_time
        self.query_count += other.query_count
        self.experiment_count += other.experiment_count
        self.reference_evolution_time += other.reference_evolution_time
        self.reference_query_count += other.reference_query_count
        self.time_resolution = min(self.time_resolution, other.time_resolution)

    def snapshot(self) -> dict:
        out = asdict(self)
        if math.isinf(out["time_resolution"]):
            out["time_resolution"] = None
        return out


NOISE_MODES = ("none", "random-shift", "adversarial-shift")


@dataclass(frozen=True)
class NoiseModel:
    """SPAM error as a bounded shift of the identity-outcome probability.

    ``random-shift`` draws the shift uniformly from ``[-spam_budget, spam_budget]``
    for each estimate; ``adversarial-shift`` moves the probability by the full
    budget towards a caller-supplied decision threshold.
    """

    spam_budget: float = 0.0
    mode: str = "none"

    def __post_init__(self):
        if self.spam_budget < 0:
            raise ValueError("spam_budget must be nonnegative")
        if self.mode not in NOISE_MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}; choose from {NOISE_MODES}")

    def perturb(self, p: float, rng: np.random.Generator, target: float = 0.5) -> float:
        if self.mode == "none" or self.spam_budget == 0:
            shift = 0.0
        elif self.mode == "random-shift":
            shift = rng.uniform(-self.spam_budget, self.spam_budget)
        else:
            shift = self.spam_budget * (1.0 if p < target else -1.0)
        return min(1.0, max(0.0, p + shift))


@dataclass
class EvolutionProgram:
    """One experiment's unitary built from oracle queries, plus its per-experiment cost."""

    unitary: np.ndarray
    time: float
    steps: int
    ledger: Ledger | None = None

    def charge(self, experiments: int) -> None:
        if self.ledger is None or experiments == 0:
            return
        # 2l queries to H of duration t/2l, and l known-H0 evolutions of duration t/l.
        self.ledger.charge(
            self.time / (2 * self.steps),
            2 * self.steps * experiments,
            experiments=experiments,
            reference_time=self.time * experiments,
            reference_queries=self.steps * experiments if self.time > 0 else 0,
        )


class EvolutionOracle:
    """Query access to ``exp(-itH)`` for a Hamiltonian H hidden from the caller."""

    def __init__(self, hamiltonian: LocalHamiltonian, ledger: Ledger | None = None):
        self._hamiltonian = hamiltonian
        self._dense = to_dense(hamiltonian)
        self._spectrum = eig_hermitian(self._dense)
        self.ledger = ledger if ledger is not None else Ledger()

    @property
    def n(self) -> int:
        return self._hamiltonian.n

    def evolution(self, t: float) -> np.ndarray:
        """A single query of duration t."""
        if t < 0:
            raise ValueError("evolution time must be nonnegative")
        self.ledger.charge(t, 1)
        return exp_i_hermitian(self._spectrum, t)

    def trotterized_difference(self, h0: LocalHamiltonian, t: float, steps: int) -> EvolutionProgram:
        """Trotter product approximating ``exp(-it(H - H0))``; charged per experiment."""
        if h0.n != self.n:
            raise ValueError(f"H0 acts on {h0.n} qubits but the oracle on {self.n}")
        if steps < 1:
            raise ValueError("number of Trotter steps must be >= 1")
        v = _trotter_product(self._spectrum, eig_hermitian(to_dense(h0)), t, steps)
        return EvolutionProgram(v, t, steps, self.ledger)


def hoeffding_shots(accuracy: float, failure: float) -> int:
    """Shots so a Bernoulli mean is within ``accuracy`` with probability ``1 - failure``."""
    if accuracy <= 0 or not 0 < failure < 1:
        raise ValueError("need accuracy > 0 and failure in (0, 1)")
    return math.ceil(math.log(2.0 / failure) / (2.0 * accuracy**2))


def estimate_identity_probability(
    program: EvolutionProgram | np.ndarray,
    shots: int,
    noise: NoiseModel | None = None,
    seed=None,
    target: float = 0.5,
) -> float:
    """Empirical frequency of the identity outcome over ``shots`` experiments.

    The exact probability ``|Tr V / 2^n|^2`` is shifted by the noise model,
    clamped to [0, 1], and ``shots`` Bernoulli draws are taken. Each shot is one
    experiment with one use of the program's unitary.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(program, EvolutionProgram):
        u = program.unitary
        program.charge(shots)
    else:
        u = np.asarray(program)
        num_qubits(u)
    p = min(1.0, max(0.0, identity_probability_dense(u)))
    if noise is not None:
        p = noise.perturb(p, rng, target)
    return rng.binomial(shots, p) / shots
