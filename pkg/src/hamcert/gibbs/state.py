"""Gibbs states, trace distance and the Pinsker-type trace-norm bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..dense_linalg import eig_hermitian, num_qubits, operator_norm
from ..pauli_algebra import (
    LocalHamiltonian,
    enumerate_local_paulis,
    pauli_expectations,
    to_dense,
)


@dataclass(frozen=True)
class GibbsState:
    rho: np.ndarray
    beta: float
    source: LocalHamiltonian | None = None

    @property
    def n(self) -> int:
        return num_qubits(self.rho)

    def check(self, tol: float = 1e-10) -> None:
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise ValueError("density matrix is not positive semidefinite")


def gibbs_state(h: LocalHamiltonian, beta: float) -> GibbsState:
    """``exp(-beta H) / Tr exp(-beta H)``, exponent shifted by its maximum to avoid overflow."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    spec = eig_hermitian(to_dense(h))
    logw = -beta * spec.eigenvalues
    w = np.exp(logw - logw.max())
    w /= w.sum()
    rho = (spec.eigenvectors * w) @ spec.eigenvectors.conj().T
    return GibbsState(0.5 * (rho + rho.conj().T), float(beta), h)


def _matrix(x) -> np.ndarray:
    return x.rho if isinstance(x, GibbsState) else np.asarray(x)


def trace_distance(rho, sigma) -> float:
    """Sum of singular values of ``rho - sigma`` (so the range is [0, 2])."""
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise ValueError("states have different dimensions")
    diff = a - b
    return float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


class PinskerBounds(NamedTuple):
    trace_distance: float
    relative_entropy_bound: float
    coefficient_bound: float
    expectation_bound: float


def pinsker_bounds(rho: GibbsState, rho0: GibbsState) -> PinskerBounds:
    """Exact trace distance and the three upper bounds in terms of the Hamiltonians.

    ``relative_entropy_bound``: ``sqrt(2 beta Tr[(rho - rho0)(H0 - H)])``;
    ``coefficient_bound``: ``200 beta n^k max_P |h_P - h0_P|``;
    ``expectation_bound``: ``sqrt(400 beta n^k max_P |Tr[P rho] - Tr[P rho0]|)``.
    The last one presumes ``|h_P|, |h0_P| <= 1``.
    """
    h, h0 = rho.source, rho0.source
    if h is None or h0 is None:
        raise ValueError("both states need their source Hamiltonians")
    if h.n != h0.n or rho.beta != rho0.beta:
        raise ValueError("states must share qubit count and beta")
    n, k, beta = h.n, max(h.k, h0.k), rho.beta
    lhs = trace_distance(rho, rho0)

    diff = rho.rho - rho0.rho
    overlap = float(np.vdot(diff, to_dense(h0) - to_dense(h)).real)
    bound0 = math.sqrt(2 * beta * max(overlap, 0.0))

    paulis = enumerate_local_paulis(n, k)
    coeff_gap = float(np.max(np.abs(h.coefficient_vector(paulis) - h0.coefficient_vector(paulis))))
    bound1 = 200 * beta * n**k * coeff_gap

    exp_gap = float(np.max(np.abs(pauli_expectations(diff, paulis))))
    bound2 = math.sqrt(400 * beta * n**k * exp_gap)
    return PinskerBounds(lhs, bound0, bound1, bound2)


def operator_norm_bound(rho: GibbsState, rho0: GibbsState) -> float:
    """``2 beta ||H - H0||_op``, the intermediate bound between the first two."""
    return 2 * rho.beta * operator_norm(to_dense(rho.source) - to_dense(rho0.source))
