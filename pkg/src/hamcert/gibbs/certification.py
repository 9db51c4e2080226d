"""Gibbs-state certification by comparing local Pauli expectations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..certify_dynamics import Decision
from ..pauli_algebra import enumerate_local_paulis
from .shadows import ShadowEstimate, exact_shadow, shadow_acquire, shadow_copies


class InsufficientCopiesError(ValueError):
    pass


@dataclass(frozen=True)
class GibbsVerdict:
    decision: Decision
    max_gap: float
    threshold: float
    accuracy: float
    copies: int
    witness: str | None
    shadow: ShadowEstimate | None = None
    reference_shadow: ShadowEstimate | None = None

    @property
    def far(self) -> bool:
        return self.decision is Decision.FAR


def certification_parameters(n: int, k: int, beta: float, eps: float) -> tuple[float, float]:
    """``(per-Pauli accuracy, FAR threshold)`` = ``(eps^2/(800 beta n^k), 3 eps^2/(400 beta n^k))``."""
    scale = beta * n**k
    return eps**2 / (800 * scale), 3 * eps**2 / (400 * scale)


def certify_gibbs(
    rho,
    rho0,
    n: int,
    k: int,
    beta: float,
    eps: float,
    delta: float,
    *,
    copies: int | None = None,
    seed=None,
    exact: bool = False,
    assert_far_promise: bool = False,
) -> GibbsVerdict:
    """Decide ``||rho - rho0||_tr <= eps^2/(400 beta n^k)`` (CLOSE) versus ``>= 2 eps`` (FAR).

    Both states are accessed only through shadows, each with failure
    probability ``delta/2``. FAR is returned iff some weight-<=k Pauli has
    estimated expectations differing by at least ``3 eps^2 / (400 beta n^k)``.
    At ``beta = 0`` both states are maximally mixed and CLOSE is returned
    without measuring.
    """
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0:
        return GibbsVerdict(Decision.CLOSE, 0.0, math.inf, math.inf, 0, None)
    close_radius = eps**2 / (400 * beta * n**k)
    if assert_far_promise and close_radius >= 2 * eps:
        raise ValueError(
            f"close radius {close_radius:.3g} >= 2 eps: for these parameters the far case cannot occur"
        )
    accuracy, threshold = certification_parameters(n, k, beta, eps)
    if not (accuracy > 0 and math.isfinite(accuracy)):
        raise ValueError("eps too small relative to beta n^k: thresholds underflow")

    paulis = enumerate_local_paulis(n, k)
    if exact:
        sh, sh0 = exact_shadow(rho, k), exact_shadow(rho0, k)
        used = 0
    else:
        required = shadow_copies(n, k, accuracy, delta / 2)
        if copies is None:
            copies = required
        elif copies < required:
            raise InsufficientCopiesError(f"{copies} copies per state is below the required {required}")
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        s1, s2 = ss.spawn(2)
        sh = shadow_acquire(rho, copies, k, s1, delta / 2)
        sh0 = shadow_acquire(rho0, copies, k, s2, delta / 2)
        used = copies
    gaps = np.abs(sh.vector(paulis) - sh0.vector(paulis))
    j = int(np.argmax(gaps))
    far = bool(gaps[j] >= threshold)
    return GibbsVerdict(
        Decision.FAR if far else Decision.CLOSE,
        float(gaps[j]),
        threshold,
        accuracy,
        used,
        paulis[j].label if far else None,
        sh,
        sh0,
    )
