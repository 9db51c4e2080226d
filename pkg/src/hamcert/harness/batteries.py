"""Seeded experiment batteries behind the CLI subcommands.

Every battery derives the RNG of trial ``i`` from ``SeedSequence(seed,
spawn_key=(i,))``, so per-trial records do not depend on the number of
worker processes or their scheduling. Wall-clock timings only ever go into
the aggregates, never into the records.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..certify_dynamics import (
    CertificationConfig,
    Decision,
    certify_amplified,
    majority_runs,
    verify_lemma_suite,
)
from ..dense_linalg import eig_hermitian, exp_i_hermitian, operator_norm
from ..dynamics import EvolutionOracle, NoiseModel
from ..gibbs import (
    DEFAULT_NET_CAP,
    certify_gibbs,
    gibbs_state,
    learn_gibbs,
    shadow_acquire,
    shadow_errors,
    trace_distance,
)
from ..pauli_algebra import (
    LocalHamiltonian,
    enumerate_local_paulis,
    format_hamiltonian,
    load_hamiltonian,
    parse_hamiltonian,
    random_local_hamiltonian,
    to_dense,
)
from .report import Check, Report, wilson_interval

COMMANDS = ("certify-dynamics", "learn-gibbs", "certify-gibbs", "verify-invariants", "bench")

# verify-invariants splits its samples into fixed-size chunks so the result
# does not depend on how many workers share them.
INVARIANT_CHUNK = 50


@dataclass
class ExperimentConfig:
    """Everything needed to rerun a battery; embedded verbatim in its report."""

    command: str
    seed: int = 0
    trials: int = 1
    jobs: int = 1
    out: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def as_dict(self) -> dict:
        params = {key: (format_hamiltonian(v) if isinstance(v, LocalHamiltonian) else v)
                  for key, v in self.params.items()}
        return {"command": self.command, "seed": self.seed, "trials": self.trials,
                "jobs": self.jobs, "out": self.out, "params": params}


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def _map(fn: Callable, args: list, jobs: int) -> list:
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
        return list(pool.map(fn, args))


_ZERO = (None, "", "0", "zero")


def hamiltonian_param(value, n: int | None = None, k: int | None = None) -> LocalHamiltonian:
    """A Hamiltonian given as an object, a file path or inline ``"XI 0.5; IZ -1"`` text."""
    if isinstance(value, LocalHamiltonian):
        return value
    if value in _ZERO:
        if n is None:
            raise ValueError("a zero Hamiltonian needs --n")
        return LocalHamiltonian(n, k or 1, {})
    text = str(value)
    if Path(text).is_file():
        return load_hamiltonian(text, n=n, k=k)
    return parse_hamiltonian(text.replace(";", "\n"), n=n, k=k)


def _pair(params: dict, a: str, b: str) -> tuple[LocalHamiltonian, LocalHamiltonian, int, int]:
    """Load two Hamiltonians (either may be omitted, meaning zero) on a common (n, k)."""
    n, k = params.get("n"), params.get("k")
    hs = [None if params.get(x) in _ZERO else hamiltonian_param(params.get(x), n, k) for x in (a, b)]
    given = [h for h in hs if h is not None]
    if n is None:
        if not given:
            raise ValueError("cannot infer n: pass --n or a Hamiltonian")
        n = given[0].n
    if k is None:
        k = max((h.k for h in given), default=1)
    first, second = (LocalHamiltonian(n, k, dict(h.coeffs) if h is not None else {}) for h in hs)
    return first, second, n, k


def _success_block(successes: int, graded: int, min_success: float, checks: list, aggregates: dict,
                   name: str = "success_rate") -> None:
    rate = successes / graded if graded else None
    lo, hi = wilson_interval(successes, graded)
    aggregates.update({"graded_trials": graded, "successes": successes, name: rate,
                       "wilson_95": [lo, hi]})
    if graded:
        checks.append(Check(name, rate >= min_success, rate, min_success,
                            f"{successes}/{graded} trials matched the promised answer"))


# -- certify-dynamics ----------------------------------------------------------


def _certify_dynamics_trial(args) -> dict:
    i, seed, h0, h, cfg, delta = args
    oracle = EvolutionOracle(h)
    v = certify_amplified(h0, oracle, cfg, delta, trial_seed(seed, i))
    led = v.ledger
    return {
        "trial": i,
        "decision": v.decision.value,
        "runs": len(v.votes),
        "far_votes": sum(d is Decision.FAR for d in v.votes),
        "iterations": len(v.transcript),
        "total_evolution_time": led["total_evolution_time"],
        "query_count": led["query_count"],
        "experiment_count": led["experiment_count"],
        "reference_evolution_time": led["reference_evolution_time"],
        "min_estimate": min(r.estimate for r in v.transcript),
        "times": [r.t for r in v.transcript],
        "steps": [r.steps for r in v.transcript],
        "estimates": [r.estimate for r in v.transcript],
    }


def run_certify_dynamics(config: ExperimentConfig) -> Report:
    p = config.params
    h0, h, n, k = _pair(p, "h0", "h")
    eps = float(p.get("eps", 0.5))
    delta = float(p.get("delta", 0.1))
    noise = NoiseModel(float(p.get("spam", 0.0)), p.get("spam_mode") or ("random-shift" if p.get("spam") else "none"))
    cfg = CertificationConfig(
        eps=eps, k=k, n=n,
        repetitions=int(p.get("repetitions", 8)),
        c_op=float(p.get("c_op", 1.0)),
        noise=noise,
        trotter_constant=float(p.get("trotter_constant", 1.0)),
    )
    min_success = float(p.get("min_success", 0.9))

    # Ground truth is visible to the simulator (never to the protocol).
    dh = h - h0
    fro = math.sqrt(sum(v * v for v in dh.coeffs.values()))
    if fro <= cfg.close_radius:
        expected = Decision.CLOSE
    elif fro >= eps:
        expected = Decision.FAR
    else:
        expected = None

    start = time.perf_counter()
    args = [(i, config.seed, h0, h, cfg, delta) for i in range(config.trials)]
    records = _map(_certify_dynamics_trial, args, config.jobs)
    wall = time.perf_counter() - start
    for r in records:
        r["expected"] = expected.value if expected else None
        r["success"] = None if expected is None else r["decision"] == expected.value

    checks: list[Check] = []
    op_norm = max(operator_norm(to_dense(h)), operator_norm(to_dense(h0)))
    checks.append(Check("c_op_bound", op_norm <= cfg.c_op + 1e-12, op_norm, cfg.c_op,
                        "operator norms of H and H0 must not exceed c_op (Trotter sizing precondition)"))
    total_times = [r["total_evolution_time"] for r in records]
    time_cap = max((r["experiment_count"] for r in records), default=0) * cfg.max_time
    ledger_ok = all(r["total_evolution_time"] <= r["experiment_count"] * cfg.max_time * (1 + 1e-12) for r in records)
    checks.append(Check("ledger_time_bound", ledger_ok, max(total_times, default=0.0), time_cap,
                        "evolution time <= experiments * 2/eps in every trial"))

    aggregates = {
        "true_frobenius_distance": fro,
        "close_radius": cfg.close_radius,
        "threshold": cfg.threshold,
        "shots_per_estimate": cfg.shots,
        "runs_per_trial": majority_runs(delta),
        "far_count": sum(r["decision"] == "FAR" for r in records),
        "close_count": sum(r["decision"] == "CLOSE" for r in records),
        "total_evolution_time_sum": float(sum(total_times)),
        "total_evolution_time_mean": float(np.mean(total_times)) if records else None,
        "query_count_sum": int(sum(r["query_count"] for r in records)),
        "experiment_count_sum": int(sum(r["experiment_count"] for r in records)),
        "wall_clock_s": wall,
    }
    graded = [r for r in records if r["success"] is not None]
    _success_block(sum(r["success"] for r in graded), len(graded), min_success, checks, aggregates)
    fields = ["trial", "decision", "expected", "success", "runs", "far_votes", "iterations",
              "total_evolution_time", "query_count", "experiment_count", "reference_evolution_time",
              "min_estimate", "times", "steps", "estimates"]
    return Report(config.command, _config_echo(config), fields, records, aggregates, checks)


# -- learn-gibbs -----------------------------------------------------------------


def _learn_trial(args) -> dict:
    i, seed, h, n, k, beta, eps, delta, opts = args
    rho = gibbs_state(h, beta)
    res = learn_gibbs(rho, n, k, beta, eps, delta, seed=trial_seed(seed, i), **opts)
    paulis = enumerate_local_paulis(n, k)
    errors = shadow_errors(res.shadow, rho)
    return {
        "trial": i,
        "net_index": res.index,
        "learned": [res.hamiltonian.coefficient(p) for p in paulis],
        "objective": res.objective,
        "copies": res.shadow.copies,
        "max_estimate_error": float(np.max(np.abs(errors))),
        "trace_distance": trace_distance(rho.rho, res.state.rho),
    }


def run_learn_gibbs(config: ExperimentConfig) -> Report:
    p = config.params
    n, k = p.get("n"), p.get("k")
    h = hamiltonian_param(p.get("h"), n, k)
    n, k = h.n, h.k
    beta, eps, delta = float(p.get("beta", 1.0)), float(p.get("eps", 0.2)), float(p.get("delta", 0.1))
    factor = float(p.get("guarantee_factor", 5.0))
    rescale = float(p.get("rescale", 1.0))
    opts = {"eps_net": p.get("eps_net"), "copies": p.get("copies_override"), "exact": bool(p.get("exact", False)),
            "cap": int(p.get("net_cap", DEFAULT_NET_CAP)), "rescale": rescale}
    start = time.perf_counter()
    args = [(i, config.seed, h, n, k, beta, eps, delta, opts) for i in range(config.trials)]
    records = _map(_learn_trial, args, config.jobs)
    wall = time.perf_counter() - start
    bound = factor * eps / rescale
    for r in records:
        r["within_guarantee"] = r["trace_distance"] <= bound
    checks: list[Check] = []
    aggregates = {
        "guarantee": bound,
        "paulis": [q.label for q in enumerate_local_paulis(n, k)],
        "true_coefficients": [float(x) for x in h.coefficient_vector()],
        "copies_total": int(sum(r["copies"] for r in records)),
        "max_trace_distance": max((r["trace_distance"] for r in records), default=None),
        "wall_clock_s": wall,
    }
    _success_block(sum(r["within_guarantee"] for r in records), len(records),
                   float(p.get("min_success", 0.9)), checks, aggregates)
    fields = ["trial", "net_index", "learned", "objective", "copies", "max_estimate_error",
              "trace_distance", "within_guarantee"]
    return Report(config.command, _config_echo(config), fields, records, aggregates, checks)


# -- certify-gibbs ---------------------------------------------------------------


def _certify_gibbs_trial(args) -> dict:
    i, seed, h, h0, n, k, beta, eps, delta, copies, exact = args
    rho, rho0 = gibbs_state(h, beta), gibbs_state(h0, beta)
    v = certify_gibbs(rho, rho0, n, k, beta, eps, delta, copies=copies, seed=trial_seed(seed, i), exact=exact)
    rec = {"trial": i, "decision": v.decision.value, "max_gap": v.max_gap, "threshold": v.threshold,
           "copies": v.copies, "witness": v.witness, "max_estimate_error": None}
    if v.shadow is not None and not exact:
        rec["max_estimate_error"] = float(max(np.max(np.abs(shadow_errors(v.shadow, rho))),
                                              np.max(np.abs(shadow_errors(v.reference_shadow, rho0)))))
    return rec


def run_certify_gibbs(config: ExperimentConfig) -> Report:
    p = config.params
    h, h0, n, k = _pair(p, "h", "h0")
    beta, eps, delta = float(p.get("beta", 1.0)), float(p.get("eps", 0.5)), float(p.get("delta", 0.1))
    exact = bool(p.get("exact", False))
    copies = p.get("copies_override")
    rho, rho0 = gibbs_state(h, beta), gibbs_state(h0, beta)
    td = trace_distance(rho.rho, rho0.rho)
    close_radius = eps**2 / (400 * beta * n**k) if beta > 0 else math.inf
    if td <= close_radius:
        expected = Decision.CLOSE
    elif td >= 2 * eps:
        expected = Decision.FAR
    else:
        expected = None
    start = time.perf_counter()
    args = [(i, config.seed, h, h0, n, k, beta, eps, delta, copies, exact) for i in range(config.trials)]
    records = _map(_certify_gibbs_trial, args, config.jobs)
    wall = time.perf_counter() - start
    for r in records:
        r["expected"] = expected.value if expected else None
        r["success"] = None if expected is None else r["decision"] == expected.value
    checks: list[Check] = []
    aggregates = {
        "true_trace_distance": td,
        "close_radius": close_radius,
        "far_radius": 2 * eps,
        "copies_per_state": records[0]["copies"] if records else None,
        "copies_total": int(2 * sum(r["copies"] for r in records)),
        "far_count": sum(r["decision"] == "FAR" for r in records),
        "close_count": sum(r["decision"] == "CLOSE" for r in records),
        "wall_clock_s": wall,
    }
    graded = [r for r in records if r["success"] is not None]
    _success_block(sum(r["success"] for r in graded), len(graded), float(p.get("min_success", 0.9)),
                   checks, aggregates)
    fields = ["trial", "decision", "expected", "success", "max_gap", "threshold", "copies", "witness",
              "max_estimate_error"]
    return Report(config.command, _config_echo(config), fields, records, aggregates, checks)


# -- verify-invariants -------------------------------------------------------------


def _invariant_chunk(args) -> dict:
    c, seed, size, n, k, t_max, t_draws = args
    return verify_lemma_suite(size, n, k, trial_seed(seed, c), t_max=t_max, t_draws=t_draws).as_dict()


def run_verify_invariants(config: ExperimentConfig) -> Report:
    p = config.params
    n, k = int(p.get("n", 3)), int(p.get("k", 2))
    samples = int(p.get("samples", 100))
    t_max, t_draws = float(p.get("t_max", 10.0)), int(p.get("t_draws", 4000))
    sizes = [min(INVARIANT_CHUNK, samples - s) for s in range(0, samples, INVARIANT_CHUNK)]
    start = time.perf_counter()
    args = [(c, config.seed, size, n, k, t_max, t_draws) for c, size in enumerate(sizes)]
    chunks = _map(_invariant_chunk, args, config.jobs)
    wall = time.perf_counter() - start

    merged: dict[str, dict] = {}
    for chunk in chunks:
        for res in chunk["checks"]:
            name = res["name"]
            m = merged.setdefault(name, {"check": name, "count": 0, "violations": 0, "worst_margin": math.inf})
            m["count"] += res["count"]
            m["violations"] += res["violations"]
            wm = res["worst_margin"]
            if wm is not None:
                m["worst_margin"] = min(m["worst_margin"], wm)
    records = []
    for m in merged.values():
        m["passed"] = m["violations"] == 0
        records.append(m)
    violations = sum(m["violations"] for m in records)
    checks = [Check("zero_violations", violations == 0, violations, 0,
                    f"{samples} random {k}-local instances on {n} qubits")]
    aggregates = {"samples": samples, "violations": violations, "wall_clock_s": wall}
    fields = ["check", "count", "violations", "worst_margin", "passed"]
    return Report(config.command, _config_echo(config), fields, records, aggregates, checks)


# -- bench --------------------------------------------------------------------------


def _timeit(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(config: ExperimentConfig) -> Report:
    """Time the core primitives; results are throughput numbers and carry no checks."""
    p = config.params
    qubits = p.get("qubits") or [2, 4, 6, 8]
    k = int(p.get("k", 2))
    repeat = int(p.get("repeat", 3))
    rng = np.random.default_rng(config.seed)
    timings = {}
    for n in qubits:
        h = random_local_hamiltonian(n, min(k, n), seed=rng)
        dense = to_dense(h)
        rho = gibbs_state(h, 1.0)
        timings[str(n)] = {
            "to_dense_s": _timeit(lambda: to_dense(h), repeat),
            "eigh_s": _timeit(lambda: eig_hermitian(dense), repeat),
            "expm_s": _timeit(lambda: exp_i_hermitian(dense, 1.0), repeat),
            "gibbs_s": _timeit(lambda: gibbs_state(h, 1.0), repeat),
            "shadow_1e4_s": _timeit(lambda: shadow_acquire(rho, 10_000, min(k, n), 0), repeat),
        }
    h1 = LocalHamiltonian(1, 1, {"X": 0.5})
    cfg = CertificationConfig(eps=0.5, k=1, n=1)
    timings["certify_n1"] = {"run_s": _timeit(
        lambda: certify_amplified(LocalHamiltonian(1, 1), EvolutionOracle(h1), cfg, 0.5, 0), repeat)}
    aggregates = {"timings": timings, "repeat": repeat}
    return Report(config.command, _config_echo(config), [], [], aggregates, [])


RUNNERS = {
    "certify-dynamics": run_certify_dynamics,
    "learn-gibbs": run_learn_gibbs,
    "certify-gibbs": run_certify_gibbs,
    "verify-invariants": run_verify_invariants,
    "bench": run_bench,
}


def _config_echo(config: ExperimentConfig) -> dict:
    return config.as_dict()


def run(config: ExperimentConfig) -> Report:
    """Execute the battery named by ``config.command``."""
    return RUNNERS[config.command](config)
