"""Classical shadows from random single-qubit Pauli measurements.

For a measured basis ``b`` and outcome bits ``x``, the snapshot estimate of
``Tr[P rho]`` is ``prod_{i in supp P} 3 (-1)^{x_i}`` when ``b_i = P_i`` on the
whole support of P, and 0 otherwise. Snapshots are aggregated by median of means.

Two samplers produce the same distribution: for small n the per-batch counts
of every (basis, outcome) pair are drawn from a multinomial, which costs
nothing per copy; for larger n each copy is sampled individually.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..dense_linalg import num_qubits
from ..pauli_algebra import PauliString, enumerate_local_paulis, pauli_expectations
from .state import GibbsState

# Multiplies 3^k k log(n/delta) / eps^2. Calibrated once with calibrate_shadow_constant
# at n=3, k=2, eps=0.2, delta=0.1 on the maximally mixed state, then rounded up.
SHADOW_CONSTANT = 2.0

COUNT_SAMPLER_MAX_QUBITS = 4

_HAD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
# Rotations taking the X, Y, Z eigenbases to the computational basis (+1 -> |0>).
_ROTATIONS = (_HAD, _HAD @ np.diag([1, -1j]), np.eye(2, dtype=complex))
_BASIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


@dataclass(frozen=True)
class ShadowEstimate:
    """Estimates of ``Tr[P rho] = 2^n rho_P`` for every P with weight <= k (identity is 1)."""

    n: int
    k: int
    estimates: Mapping[PauliString, float]
    copies: int
    batches: int

    def __getitem__(self, p: PauliString | str) -> float:
        key = p if isinstance(p, PauliString) else PauliString(p)
        try:
            return self.estimates[key]
        except KeyError:
            raise KeyError(f"no shadow estimate for {key}") from None

    def vector(self, paulis=None) -> np.ndarray:
        if paulis is None:
            paulis = enumerate_local_paulis(self.n, self.k)
        return np.array([self[p] for p in paulis])


def _matrix(rho) -> np.ndarray:
    return rho.rho if isinstance(rho, GibbsState) else np.asarray(rho, dtype=complex)


def shadow_copies(n: int, k: int, accuracy: float, delta: float, constant: float = SHADOW_CONSTANT) -> int:
    """Copies so that all weight-<=k estimates are ``accuracy``-close w.p. ``1 - delta``."""
    if accuracy <= 0 or not 0 < delta < 1:
        raise ValueError("need accuracy > 0 and delta in (0, 1)")
    return math.ceil(constant * 3**k * k * math.log(n / delta) / accuracy**2)


def num_batches(num_observables: int, delta: float) -> int:
    return math.ceil(2 * math.log(2 * num_observables / delta))


@lru_cache(maxsize=16)
def _settings(n: int) -> np.ndarray:
    return np.array(list(product(range(3), repeat=n)), dtype=np.int8).reshape(3**n, n)


@lru_cache(maxsize=16)
def _outcome_bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)


def _basis_unitary(setting) -> np.ndarray:
    u = np.ones((1, 1), dtype=complex)
    for b in setting:
        u = np.kron(u, _ROTATIONS[b])
    return u


def outcome_distribution(rho: np.ndarray, setting) -> np.ndarray:
    """Outcome probabilities when every qubit i is measured in basis ``setting[i]`` (0=X, 1=Y, 2=Z)."""
    u = _basis_unitary(setting)
    p = np.einsum("ij,jk,ik->i", u, rho, u.conj()).real
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def snapshot_values(bases: np.ndarray, outcomes: np.ndarray, paulis) -> np.ndarray:
    """Per-snapshot estimates, shape ``(len(bases), len(paulis))``.

    ``bases`` holds basis indices (0=X, 1=Y, 2=Z) and ``outcomes`` bits, both
    of shape ``(copies, n)``.
    """
    signs = 1 - 2 * outcomes.astype(np.int64)
    out = np.empty((len(bases), len(paulis)))
    for j, p in enumerate(paulis):
        supp = list(p.support)
        target = np.array([_BASIS_INDEX[p.label[i]] for i in supp])
        match = np.all(bases[:, supp] == target, axis=1)
        out[:, j] = np.where(match, 3.0 ** len(supp) * np.prod(signs[:, supp], axis=1), 0.0)
    return out


def shadow_snapshots(rho, copies: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Measure ``copies`` copies individually; returns ``(bases, outcome_bits)``."""
    rho = _matrix(rho)
    n = num_qubits(rho)
    rng = np.random.default_rng(seed)
    bases = rng.integers(0, 3, size=(copies, n), dtype=np.int8)
    outcomes = np.empty(copies, dtype=np.int64)
    uniq, inverse = np.unique(bases, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    for g, setting in enumerate(uniq):
        rows = np.flatnonzero(inverse == g)
        outcomes[rows] = rng.choice(2**n, size=len(rows), p=outcome_distribution(rho, setting))
    return bases, _outcome_bits(n)[outcomes]


def _batch_sizes(copies: int, batches: int) -> np.ndarray:
    base, extra = divmod(copies, batches)
    return np.array([base + (i < extra) for i in range(batches)])


def _batch_means_counts(rho, n, paulis, sizes, rng) -> np.ndarray:
    settings = _settings(n)
    probs = np.array([outcome_distribution(rho, s) for s in settings])  # (3^n, 2^n)
    joint = (probs / len(settings)).reshape(-1)
    joint /= joint.sum()
    bases = np.repeat(settings, 2**n, axis=0)
    bits = np.tile(_outcome_bits(n), (len(settings), 1))
    values = snapshot_values(bases, bits, paulis)  # (6^n, m)
    counts = np.array([rng.multinomial(size, joint) for size in sizes])
    return (counts @ values) / sizes[:, None]


def _batch_means_copies(rho, paulis, sizes, rng) -> np.ndarray:
    bases, bits = shadow_snapshots(rho, int(sizes.sum()), rng)
    values = snapshot_values(bases, bits, paulis)
    edges = np.concatenate([[0], np.cumsum(sizes)])
    return np.array([values[a:b].mean(axis=0) for a, b in zip(edges[:-1], edges[1:])])


def shadow_acquire(rho, copies: int, k: int, seed=None, delta: float = 0.1,
                   sampler: str = "auto") -> ShadowEstimate:
    """Median-of-means shadow estimates of every weight-<=k Pauli expectation.

    The number of batches is ``ceil(2 ln(2 |P| / delta))`` with ``|P|`` the
    count of non-identity k-local strings. ``sampler`` is ``"auto"``,
    ``"counts"`` or ``"copies"``.
    """
    rho = _matrix(rho)
    n = num_qubits(rho)
    paulis = enumerate_local_paulis(n, k)
    batches = num_batches(len(paulis), delta)
    if copies < batches:
        raise ValueError(f"{copies} copies cannot fill {batches} median-of-means batches")
    rng = np.random.default_rng(seed)
    sizes = _batch_sizes(copies, batches)
    if sampler == "auto":
        sampler = "counts" if n <= COUNT_SAMPLER_MAX_QUBITS else "copies"
    if sampler == "counts":
        means = _batch_means_counts(rho, n, paulis, sizes, rng)
    elif sampler == "copies":
        means = _batch_means_copies(rho, paulis, sizes, rng)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    est = np.median(means, axis=0)
    return _package(n, k, paulis, est, copies, batches)


def exact_shadow(rho, k: int) -> ShadowEstimate:
    """Noise-free stand-in: the true expectations, zero copies used."""
    rho = _matrix(rho)
    n = num_qubits(rho)
    paulis = enumerate_local_paulis(n, k)
    return _package(n, k, paulis, pauli_expectations(rho, paulis), 0, 0)


def _package(n, k, paulis, values, copies, batches) -> ShadowEstimate:
    est = {PauliString.identity(n): 1.0}
    est.update((p, float(v)) for p, v in zip(paulis, values))
    return ShadowEstimate(n, k, MappingProxyType(est), copies, batches)


def shadow_errors(shadow: ShadowEstimate, rho) -> np.ndarray:
    """Absolute estimate errors against the true expectations, in enumeration order."""
    paulis = enumerate_local_paulis(shadow.n, shadow.k)
    return np.abs(shadow.vector(paulis) - pauli_expectations(_matrix(rho), paulis))


def concentration_rate(rho, k: int, accuracy: float, delta: float, runs: int, seed=None,
                       constant: float = SHADOW_CONSTANT) -> float:
    """Fraction of seeded runs in which every estimate lies within ``accuracy``."""
    rho = _matrix(rho)
    n = num_qubits(rho)
    copies = shadow_copies(n, k, accuracy, delta, constant)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(runs)
    hits = sum(
        shadow_errors(shadow_acquire(rho, copies, k, c, delta), rho).max() <= accuracy for c in children
    )
    return hits / runs


def calibrate_shadow_constant(n: int = 3, k: int = 2, accuracy: float = 0.2, delta: float = 0.1,
                              runs: int = 200, seed=12345, rho=None, lo: float = 0.05,
                              hi: float = 20.0, tol: float = 0.05) -> float:
    """Smallest constant (to ``tol``) whose concentration rate reaches ``1 - delta``.

    The default state is maximally mixed, which maximizes every snapshot variance.
    """
    if rho is None:
        rho = np.eye(2**n, dtype=complex) / 2**n
    while concentration_rate(rho, k, accuracy, delta, runs, seed, hi) < 1 - delta:
        hi *= 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if concentration_rate(rho, k, accuracy, delta, runs, seed, mid) >= 1 - delta:
            hi = mid
        else:
            lo = mid
    return hi
