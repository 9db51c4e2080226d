"""Tolerant certification of k-local Hamiltonians from time-evolution access,
majority-vote amplification, and a batch checker for the supporting inequalities.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .dense_linalg import (
    eig_hermitian,
    exp_i_hermitian,
    frobenius_normalized,
    schatten_p_normalized,
)
from .dynamics import (
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
)
from .pauli_algebra import LocalHamiltonian, random_local_hamiltonian, to_dense


class Decision(str, enum.Enum):
    CLOSE = "CLOSE"
    FAR = "FAR"


@dataclass(frozen=True)
class CertificationConfig:
    """Parameters of one certification run; thresholds are derived on access."""

    eps: float
    k: int
    n: int
    repetitions: int = 8
    c_op: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int | None = None
    trotter_constant: float = 1.0
    failure_budget: float = 0.05

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.k < 1 or self.n < self.k:
            raise ValueError("need 1 <= k <= n")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.c_op < 1:
            raise ValueError("c_op must be >= 1")

    @property
    def eps_trott(self) -> float:
        return 1.0 / (384 * 9**self.k)

    @property
    def estimate_accuracy(self) -> float:
        return 1.0 / (192 * 9**self.k)

    @property
    def threshold(self) -> float:
        return 1.0 - 7.0 / (96 * 9**self.k)

    @property
    def close_radius(self) -> float:
        return self.eps / (8 * 3**self.k)

    @property
    def per_estimate_failure(self) -> float:
        # Each estimate fails with probability <= 0.05/N so a union bound over N works.
        return self.failure_budget / self.repetitions

    @property
    def shots(self) -> int:
        return hoeffding_shots(self.estimate_accuracy, self.per_estimate_failure)

    @property
    def max_time(self) -> float:
        return 2.0 / self.eps


@dataclass(frozen=True)
class IterationRecord:
    t: float
    steps: int
    shots: int
    estimate: float
    exact: float


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    transcript: tuple[IterationRecord, ...]
    ledger: dict
    votes: tuple[Decision, ...] = ()

    @property
    def far(self) -> bool:
        return self.decision is Decision.FAR


def _streams(seed, count: int) -> list[np.random.Generator]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def certify(h0: LocalHamiltonian, oracle: EvolutionOracle, cfg: CertificationConfig, seed=None) -> Verdict:
    """Decide whether the oracle's Hamiltonian is close to ``h0`` or eps-far from it.

    Each of ``cfg.repetitions`` rounds samples t uniformly in ``[0, 2/eps]``,
    Trotterizes ``exp(-it(H - H0))`` and estimates its identity-outcome
    probability; FAR is returned on the first estimate at or below
    ``1 - 7/(96 9^k)``. Times and shot noise use separate random streams, so
    the sampled times depend only on the seed.
    """
    if h0.n != cfg.n or oracle.n != cfg.n:
        raise ValueError(f"dimension mismatch: config n={cfg.n}, H0 n={h0.n}, oracle n={oracle.n}")
    time_rng, shot_rng = _streams(cfg.seed if seed is None else seed, 2)
    shots = cfg.shots
    records = []
    decision = Decision.CLOSE
    for _ in range(cfg.repetitions):
        t = time_rng.uniform(0.0, cfg.max_time)
        steps = analytic_trotter_steps(cfg.c_op, t, cfg.eps_trott, cfg.trotter_constant)
        program = oracle.trotterized_difference(h0, t, steps)
        exact = identity_probability_dense(program.unitary)
        estimate = estimate_identity_probability(program, shots, cfg.noise, shot_rng, target=cfg.threshold)
        records.append(IterationRecord(t, steps, shots, estimate, exact))
        if estimate <= cfg.threshold:
            decision = Decision.FAR
            break
    return Verdict(decision, tuple(records), oracle.ledger.snapshot())


def majority_runs(delta: float, per_run_success: float = 0.9) -> int:
    """Smallest odd number of runs whose majority errs with probability <= delta."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    m = 1
    while binom.sf((m - 1) // 2, m, 1 - per_run_success) > delta:
        m += 2
    return m


def certify_amplified(
    h0: LocalHamiltonian,
    oracle: EvolutionOracle,
    cfg: CertificationConfig,
    delta: float,
    seed=None,
) -> Verdict:
    """Majority vote over independent ``certify`` runs; the oracle ledger accumulates."""
    runs = majority_runs(delta)
    base = cfg.seed if seed is None else seed
    ss = base if isinstance(base, np.random.SeedSequence) else np.random.SeedSequence(base)
    verdicts = [certify(h0, oracle, cfg, child) for child in ss.spawn(runs)]
    far_votes = sum(v.far for v in verdicts)
    decision = Decision.FAR if 2 * far_votes > runs else Decision.CLOSE
    transcript = tuple(r for v in verdicts for r in v.transcript)
    return Verdict(decision, transcript, oracle.ledger.snapshot(), tuple(v.decision for v in verdicts))


# -- supporting inequalities ----------------------------------------------------


def moments_of_gaps(eigenvalues: np.ndarray) -> tuple[float, float]:
    """``E[F^2]`` and ``E[F^4]`` for ``F = lambda_r - lambda_s`` over uniform pairs."""
    gaps = eigenvalues[:, None] - eigenvalues[None, :]
    sq = gaps**2
    return float(sq.mean()), float((sq**2).mean())


def paley_zygmund_margin(eigenvalues: np.ndarray, theta: float = 0.5) -> float:
    """``Pr[Z > theta E Z] - (1-theta)^2 (E Z)^2 / E[Z^2]`` with ``Z = F^2``, exhaustively."""
    gaps = eigenvalues[:, None] - eigenvalues[None, :]
    z = gaps**2
    ez, ez2 = z.mean(), (z**2).mean()
    if ez2 == 0:
        return 0.0
    return float(np.mean(z > theta * ez) - (1 - theta) ** 2 * ez**2 / ez2)


def bonami_margin(h_dense: np.ndarray, k: int, p: float = 4.0) -> float:
    """Relative slack in ``||H||_p <= (p-1)^{k/2} ||H||_2`` (raised to the p-th power)."""
    lhs = schatten_p_normalized(h_dense, p) ** p
    rhs = ((p - 1) ** (k / 2) * schatten_p_normalized(h_dense, 2)) ** p
    return (rhs - lhs) / max(rhs, 1e-300) if rhs > 0 else -lhs


def spectral_condition_fraction(eigenvalues, eps: float, draws: int, rng) -> tuple[float, float]:
    """Fraction of ``t ~ U[0, 2/eps]`` with ``I(t) <= 1 - Lambda(dH, eps)/4``, and that Lambda."""
    lam = separated_pair_fraction(eigenvalues, eps)
    ts = rng.uniform(0.0, 2.0 / eps, size=draws)
    return float(np.mean(identity_probability_curve(eigenvalues, ts) <= 1 - lam / 4)), lam


def far_detection_fraction(eigenvalues, eps: float, k: int, draws: int, rng) -> float:
    """Fraction of ``t ~ U[0, 2/eps]`` with ``I(t) <= 1 - 1/(12 9^k)``."""
    ts = rng.uniform(0.0, 2.0 / eps, size=draws)
    return float(np.mean(identity_probability_curve(eigenvalues, ts) <= 1 - 1 / (12 * 9**k)))


def close_floor_margin(eigenvalues, eps: float, k: int, ts) -> float:
    """Smallest ``I(t) - (1 - 1/(16 9^k))`` over the given times (all must lie in [0, 2/eps])."""
    curve = identity_probability_curve(eigenvalues, ts)
    return float(np.min(curve) - (1 - 1 / (16 * 9**k)))


@dataclass
class CheckResult:
    name: str
    count: int = 0
    violations: int = 0
    worst_margin: float = math.inf

    def record(self, margin: float, slack: float) -> None:
        self.count += 1
        self.worst_margin = min(self.worst_margin, margin)
        if margin < -slack:
            self.violations += 1

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "count": self.count,
            "violations": self.violations,
            "worst_margin": None if math.isinf(self.worst_margin) else self.worst_margin,
            "passed": self.passed,
        }


@dataclass
class LemmaReport:
    checks: dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    def as_dict(self) -> dict:
        return {"passed": self.passed, "violations": self.violations,
                "checks": [c.as_dict() for c in self.checks.values()]}


SUITE_CHECKS = (
    "two_path_identity_probability",
    "identity_probability_frobenius",
    "duhamel",
    "frobenius_lower_bound",
    "separated_pair_bound",
    "bonami",
    "paley_zygmund",
    "spectral_condition",
)

NUMERIC_SLACK = 1e-9


def check_instance(dh: LocalHamiltonian, t: float, eps: float, report: LemmaReport, rng,
                   t_draws: int = 4000, statistical_slack: float = 0.03) -> None:
    """Run every inequality on one difference Hamiltonian and accumulate into ``report``."""
    k = dh.k
    dense = to_dense(dh)
    spec = eig_hermitian(dense)
    lam = spec.eigenvalues
    fro = math.sqrt(spec.frobenius_sq())
    checks = report.checks

    u = exp_i_hermitian(spec, t)
    i_cos = identity_probability_spectral(lam, t)
    i_trace = identity_probability_dense(u)
    checks["two_path_identity_probability"].record(NUMERIC_SLACK - abs(i_cos - i_trace), 0.0)

    dist = frobenius_normalized(u - np.eye(len(lam)))
    re_tr = float(np.trace(u).real / len(lam))
    chain = min(i_trace - re_tr**2, re_tr**2 - (1 - dist**2))
    checks["identity_probability_frobenius"].record(chain, NUMERIC_SLACK)
    checks["duhamel"].record(t * fro - dist, NUMERIC_SLACK)

    value, bound = frobenius_lower_bound_check(lam, t)
    checks["frobenius_lower_bound"].record(value - bound, NUMERIC_SLACK)

    if fro > 0:
        checks["separated_pair_bound"].record(separated_pair_fraction(lam, fro) - 1 / (3 * 9**k), 0.0)
    else:
        checks["separated_pair_bound"].record(separated_pair_fraction(lam, 1.0), 0.0)
    checks["bonami"].record(bonami_margin(dense, k), NUMERIC_SLACK)
    checks["paley_zygmund"].record(paley_zygmund_margin(lam), NUMERIC_SLACK)

    frac, _ = spectral_condition_fraction(lam, eps, t_draws, rng)
    checks["spectral_condition"].record(frac - 1 / 3, statistical_slack)


def verify_lemma_suite(samples: int, n: int, k: int, seed=None, t_max: float = 10.0,
                       t_draws: int = 4000, statistical_slack: float = 0.03) -> LemmaReport:
    """Random-instance sweep over the inequalities behind the certification protocol.

    Instances are k-local difference Hamiltonians with random sparsity and
    coefficient scale; ``t`` is uniform in ``[0, t_max]`` and the spectral
    condition uses ``eps = u * ||dH||_F`` with ``u ~ U(0, 1]``. Deterministic
    checks allow ``1e-9`` slack; the spectral-condition frequency allows
    ``statistical_slack``.
    """
    rng = np.random.default_rng(seed)
    report = LemmaReport({name: CheckResult(name) for name in SUITE_CHECKS})
    for _ in range(samples):
        sparsity = rng.uniform(0.05, 1.0)
        scale = 10 ** rng.uniform(-2, 1)
        dh = random_local_hamiltonian(n, k, coeff_bound=scale, sparsity=sparsity, seed=rng)
        fro = math.sqrt(sum(v * v for v in dh.coeffs.values()))
        eps = fro * (1 - rng.random()) if fro > 0 else 1.0
        check_instance(dh, rng.uniform(0.0, t_max), eps, report, rng, t_draws, statistical_slack)
    return report
