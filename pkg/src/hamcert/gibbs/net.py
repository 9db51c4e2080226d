"""Covering nets of k-local Hamiltonians with coefficients on a grid ``eta Z ∩ [-1, 1]``.

Net members are indexed in mixed radix: the first Pauli string (in the
lexicographic enumeration order) is the most significant digit, and digit j
stands for the grid value ``(j - m) * eta`` with ``m = floor(1 / eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from ..pauli_algebra import LocalHamiltonian, PauliString, enumerate_local_paulis

DEFAULT_NET_CAP = 10**7


class NetTooLargeError(RuntimeError):
    def __init__(self, size: int, cap: int):
        super().__init__(
            f"net too large: {size} members exceeds the cap of {cap}; "
            "coarsen the net (larger eps_net) or raise the cap"
        )
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class NetIndex:
    n: int
    k: int
    beta: float
    eps_net: float

    def __post_init__(self):
        if self.eps_net <= 0:
            raise ValueError("eps_net must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    @property
    def eta(self) -> float:
        if self.beta == 0:
            return math.inf
        return self.eps_net / (200 * self.beta * self.n**self.k)

    @property
    def half_width(self) -> int:
        """Largest m with ``m * eta <= 1``."""
        if math.isinf(self.eta):
            return 0
        return int(math.floor(1.0 / self.eta + 1e-9))

    @cached_property
    def grid(self) -> np.ndarray:
        m = self.half_width
        if m == 0:
            return np.zeros(1)
        return np.arange(-m, m + 1) * self.eta

    @property
    def radix(self) -> int:
        return 2 * self.half_width + 1

    @cached_property
    def paulis(self) -> tuple[PauliString, ...]:
        return enumerate_local_paulis(self.n, self.k)

    @property
    def size(self) -> int:
        return self.radix ** len(self.paulis)

    def digits(self, index: int) -> list[int]:
        if not 0 <= index < self.size:
            raise IndexError(f"net index {index} out of range [0, {self.size})")
        out = []
        for _ in self.paulis:
            index, d = divmod(index, self.radix)
            out.append(d)
        return out[::-1]

    def decode(self, index: int) -> LocalHamiltonian:
        values = self.grid[self.digits(index)]
        return LocalHamiltonian.from_vector(self.n, self.k, values, self.paulis, bounded=True)

    def encode(self, h: LocalHamiltonian) -> int:
        if h.n != self.n or h.k > self.k:
            raise ValueError("Hamiltonian does not match the net's (n, k)")
        index = 0
        for v in h.coefficient_vector(self.paulis):
            d = self._digit_of(v)
            if abs(self.grid[d] - v) > 1e-9 * max(1.0, abs(v)):
                raise ValueError(f"coefficient {v} is not on the net grid")
            index = index * self.radix + d
        return index

    def _digit_of(self, value: float) -> int:
        if self.half_width == 0:
            return 0
        return int(np.clip(np.rint(value / self.eta), -self.half_width, self.half_width)) + self.half_width

    def round(self, h: LocalHamiltonian) -> LocalHamiltonian:
        """Net member whose coefficients are the grid points nearest to h's."""
        values = [self.grid[self._digit_of(v)] for v in h.coefficient_vector(self.paulis)]
        return LocalHamiltonian.from_vector(self.n, self.k, values, self.paulis, bounded=True)

    def coefficient_blocks(self, block: int = 8192, cap: int = DEFAULT_NET_CAP) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(first_index, coefficients)`` with coefficients of shape (rows, #paulis)."""
        check_cap(self, cap)
        shape = (self.radix,) * len(self.paulis)
        for start in range(0, self.size, block):
            idx = np.arange(start, min(start + block, self.size))
            digits = np.stack(np.unravel_index(idx, shape), axis=1) if shape else np.zeros((len(idx), 0), int)
            yield start, self.grid[digits]


def check_cap(idx: NetIndex, cap: int = DEFAULT_NET_CAP) -> None:
    if idx.size > cap:
        raise NetTooLargeError(idx.size, cap)


def net_iter(idx: NetIndex, cap: int = DEFAULT_NET_CAP) -> Iterator[LocalHamiltonian]:
    """Every net member once, in index order. Raises before iterating if the net exceeds ``cap``."""
    check_cap(idx, cap)

    def members():
        for _, rows in idx.coefficient_blocks(cap=cap):
            for values in rows:
                yield LocalHamiltonian.from_vector(idx.n, idx.k, values, idx.paulis, bounded=True)

    return members()
