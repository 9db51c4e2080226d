"""Gibbs-state learning by hypothesis selection over a covering net."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..pauli_algebra import LocalHamiltonian, pauli_dense
from .net import DEFAULT_NET_CAP, NetIndex, check_cap
from .shadows import ShadowEstimate, exact_shadow, shadow_acquire, shadow_copies
from .state import GibbsState, gibbs_state


def estimate_observable_gaps(shadow: ShadowEstimate, hi: LocalHamiltonian, hj: LocalHamiltonian) -> float:
    """Shadow estimate of ``Tr[(H_i - H_j) rho]``, i.e. ``sum_P (h_i - h_j)_P Tr[P rho]'``."""
    if hi.n != hj.n or hi.n != shadow.n:
        raise ValueError("Hamiltonians and shadow must share the qubit count")
    keys = set(hi.coeffs) | set(hj.coeffs)
    return float(sum((hi.coefficient(p) - hj.coefficient(p)) * shadow[p] for p in keys))


def net_expectations(idx: NetIndex, coefficients: np.ndarray) -> np.ndarray:
    """``Tr[P tau]`` for the Gibbs state tau of every coefficient row; shape (rows, #paulis)."""
    paulis = np.stack([pauli_dense(p) for p in idx.paulis])
    hams = np.tensordot(coefficients, paulis, axes=1)
    w, v = np.linalg.eigh(hams)
    logw = -idx.beta * w
    weights = np.exp(logw - logw.max(axis=1, keepdims=True))
    weights /= weights.sum(axis=1, keepdims=True)
    rhos = np.einsum("bij,bj,bkj->bik", v, weights, v.conj())
    return np.einsum("pij,bji->bp", paulis, rhos).real


def max_gap_deviation(estimates: np.ndarray, expectations: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``max_{i,j} |Delta'_{ij} - Tr[(H_i - H_j) tau]|`` for each row of ``expectations``.

    Pairs of net members range over the full product grid, so each Pauli
    coefficient difference can independently take any value in
    ``[min(grid) - max(grid), max(grid) - min(grid)]``. The maximum of the
    linear form is therefore the grid span times the L1 distance between the
    estimated and the candidate's expectation vectors.
    """
    span = float(grid.max() - grid.min())
    return span * np.abs(np.asarray(expectations) - np.asarray(estimates)).sum(axis=-1)


@dataclass(frozen=True)
class LearnResult:
    index: int
    hamiltonian: LocalHamiltonian
    state: GibbsState
    objective: float
    net: NetIndex
    shadow: ShadowEstimate


def select_from_net(shadow: ShadowEstimate, idx: NetIndex, cap: int = DEFAULT_NET_CAP,
                    block: int = 8192) -> tuple[int, float]:
    """Index minimizing the worst gap-observable disagreement; ties go to the lowest index."""
    check_cap(idx, cap)
    est = shadow.vector(idx.paulis)
    best, best_val = -1, math.inf
    for start, coeffs in idx.coefficient_blocks(block, cap):
        obj = max_gap_deviation(est, net_expectations(idx, coeffs), idx.grid)
        j = int(np.argmin(obj))
        if obj[j] < best_val:
            best, best_val = start + j, float(obj[j])
    return best, best_val


def learning_parameters(n: int, k: int, beta: float, eps: float) -> tuple[float, float, float]:
    """``(eps_net, observable accuracy, per-Pauli shadow accuracy)`` used by default."""
    b = max(beta, 1.0)
    eps_net = eps**2 / (100 * b * n**k)
    observable = eps**2 / b
    return eps_net, observable, observable / (200 * n**k)


def learn_gibbs(
    rho,
    n: int,
    k: int,
    beta: float,
    eps: float,
    delta: float,
    *,
    eps_net: float | None = None,
    copies: int | None = None,
    seed=None,
    exact: bool = False,
    cap: int = DEFAULT_NET_CAP,
    rescale: float = 1.0,
) -> LearnResult:
    """Learn a Gibbs state of a bounded k-local Hamiltonian from single-copy Pauli measurements.

    ``rho`` is only touched through shadow acquisition. By default the net
    resolution is ``eps^2 / (100 max(beta, 1) n^k)`` and shadows are sized so
    every gap observable is within ``eps^2 / max(beta, 1)``; ``eps_net`` and
    ``copies`` override these. With ``exact=True`` the true expectations stand
    in for the shadow estimates.

    The guarantee is a trace distance of at most ``5 eps``; ``rescale=5``
    runs the protocol at ``eps / 5`` to obtain plain ``eps`` instead.
    """
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    if rescale < 1:
        raise ValueError("rescale must be >= 1")
    eps = eps / rescale
    default_net, _, per_pauli = learning_parameters(n, k, beta, eps)
    idx = NetIndex(n, k, beta, eps_net if eps_net is not None else default_net)
    check_cap(idx, cap)
    if exact:
        shadow = exact_shadow(rho, k)
    else:
        if copies is None:
            copies = shadow_copies(n, k, per_pauli, delta)
        shadow = shadow_acquire(rho, copies, k, seed, delta)
    index, objective = select_from_net(shadow, idx, cap)
    h = idx.decode(index)
    return LearnResult(index, h, gibbs_state(h, beta), objective, idx, shadow)
