"""Pauli strings, k-local Hamiltonians and conversions to dense matrices.

Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
computational-basis index. Pauli strings are ordered lexicographically with
``I < X < Y < Z`` (which coincides with the ASCII order of the labels).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from itertools import combinations, product
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

PAULI_LABELS = "IXYZ"

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, order=True)
class PauliString:
    """An n-site word over ``{I, X, Y, Z}``."""

    label: str

    def __post_init__(self):
        if not self.label or any(c not in PAULI_LABELS for c in self.label):
            raise ValueError(f"invalid Pauli word {self.label!r}")

    @property
    def n(self) -> int:
        return len(self.label)

    @property
    def sites(self) -> tuple[str, ...]:
        return tuple(self.label)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.label)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.label) if c != "I")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    def __str__(self) -> str:
        return self.label


def _as_pauli(p: PauliString | str) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(p)


def local_pauli_count(n: int, k: int) -> int:
    """Number of Pauli strings with weight between 1 and k."""
    return sum(3**l * math.comb(n, l) for l in range(1, k + 1))


def enumerate_local_paulis(n: int, k: int) -> tuple[PauliString, ...]:
    """All Pauli strings of weight 1..k on n qubits, sorted lexicographically."""
    if not 1 <= k <= n:
        raise ValueError(f"locality must satisfy 1 <= k <= n, got k={k}, n={n}")
    return _enumerate(n, k)


@lru_cache(maxsize=64)
def _enumerate(n: int, k: int) -> tuple[PauliString, ...]:
    labels = []
    for w in range(1, k + 1):
        for supp in combinations(range(n), w):
            for letters in product("XYZ", repeat=w):
                word = ["I"] * n
                for site, c in zip(supp, letters):
                    word[site] = c
                labels.append("".join(word))
    labels.sort()
    return tuple(PauliString(s) for s in labels)


@lru_cache(maxsize=4096)
def _pauli_dense_cached(label: str) -> np.ndarray:
    mat = reduce(np.kron, (_SINGLE[c] for c in label))
    mat.setflags(write=False)
    return mat


def pauli_dense(p: PauliString | str) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli string (read-only array)."""
    return _pauli_dense_cached(_as_pauli(p).label)


@dataclass(frozen=True)
class LocalHamiltonian:
    """Traceless k-local Hamiltonian stored as a sparse Pauli-coefficient map.

    Keys may be given as strings; absent strings have coefficient exactly 0.
    With ``bounded=True`` every coefficient must satisfy ``|h_P| <= 1``.
    """

    n: int
    k: int
    coeffs: Mapping[PauliString, float] = field(default_factory=dict)
    bounded: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"locality must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")
        clean = {}
        for key, value in self.coeffs.items():
            p = _as_pauli(key)
            value = float(value)
            if p.n != self.n:
                raise ValueError(f"{p} acts on {p.n} qubits, expected {self.n}")
            if p.weight == 0:
                if value != 0.0:
                    raise ValueError("identity coefficient must be zero (traceless convention)")
                continue
            if p.weight > self.k:
                raise ValueError(f"{p} has weight {p.weight} > k={self.k}")
            if not math.isfinite(value):
                raise ValueError(f"non-finite coefficient for {p}")
            if self.bounded and abs(value) > 1.0:
                raise ValueError(f"|h_{p}| = {abs(value)} exceeds 1")
            if value != 0.0:
                clean[p] = value
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    def __reduce__(self):
        return (LocalHamiltonian, (self.n, self.k, dict(self.coeffs), self.bounded))

    def coefficient(self, p: PauliString | str) -> float:
        return self.coeffs.get(_as_pauli(p), 0.0)

    def coefficient_vector(self, paulis: Iterable[PauliString] | None = None) -> np.ndarray:
        """Coefficients in the order of ``paulis`` (default: all k-local strings)."""
        if paulis is None:
            paulis = enumerate_local_paulis(self.n, self.k)
        return np.array([self.coefficient(p) for p in paulis], dtype=float)

    @classmethod
    def from_vector(cls, n: int, k: int, values, paulis=None, bounded: bool = False):
        if paulis is None:
            paulis = enumerate_local_paulis(n, k)
        return cls(n, k, dict(zip(paulis, (float(v) for v in values))), bounded=bounded)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def _combine(self, other: "LocalHamiltonian", sign: float) -> "LocalHamiltonian":
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        out = dict(self.coeffs)
        for p, v in other.coeffs.items():
            out[p] = out.get(p, 0.0) + sign * v
        return LocalHamiltonian(self.n, max(self.k, other.k), out)

    def __add__(self, other: "LocalHamiltonian") -> "LocalHamiltonian":
        return self._combine(other, 1.0)

    def __sub__(self, other: "LocalHamiltonian") -> "LocalHamiltonian":
        return self._combine(other, -1.0)

    def __mul__(self, scalar: float) -> "LocalHamiltonian":
        return LocalHamiltonian(self.n, self.k, {p: scalar * v for p, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "LocalHamiltonian":
        return self * -1.0


def to_dense(h: LocalHamiltonian) -> np.ndarray:
    """Dense matrix ``sum_P h_P P``."""
    dim = 2**h.n
    out = np.zeros((dim, dim), dtype=complex)
    for p, v in h.coeffs.items():
        out += v * pauli_dense(p)
    return out


def pauli_coefficient(a: np.ndarray, p: PauliString | str) -> complex:
    """Normalized overlap ``Tr[P A] / 2^n``."""
    p = _as_pauli(p)
    a = np.asarray(a)
    dim = 2**p.n
    if a.shape != (dim, dim):
        raise ValueError(f"operator of shape {a.shape} does not match {p.n}-qubit Pauli {p}")
    # Tr[PA] = sum_ij P_ij A_ji and P is Hermitian, so this is sum(conj(P) * A).
    return complex(np.vdot(pauli_dense(p), a)) / dim


def pauli_expectations(a: np.ndarray, paulis: Iterable[PauliString]) -> np.ndarray:
    """``Tr[P A]`` for every P (unnormalized, i.e. ``2^n a_P``); real part only."""
    a = np.asarray(a)
    return np.array([np.vdot(pauli_dense(p), a).real for p in paulis])


def from_dense(a: np.ndarray, k: int, atol: float = 1e-12) -> LocalHamiltonian:
    """Project a Hermitian matrix onto its traceless k-local part."""
    a = np.asarray(a)
    n = int(round(math.log2(a.shape[0])))
    coeffs = {}
    for p in enumerate_local_paulis(n, k):
        c = pauli_coefficient(a, p).real
        if abs(c) > atol:
            coeffs[p] = c
    return LocalHamiltonian(n, k, coeffs)


def random_local_hamiltonian(
    n: int,
    k: int,
    coeff_bound: float = 1.0,
    sparsity: float = 1.0,
    seed=None,
) -> LocalHamiltonian:
    """Random k-local Hamiltonian with uniform-box coefficients.

    Each k-local Pauli string is kept with probability ``sparsity`` and gets a
    coefficient drawn uniformly from ``[-coeff_bound, coeff_bound]``. ``seed``
    may be anything ``numpy.random.default_rng`` accepts, including a Generator.
    """
    if coeff_bound <= 0:
        raise ValueError("coeff_bound must be positive")
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError("sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    paulis = enumerate_local_paulis(n, k)
    keep = rng.random(len(paulis)) < sparsity
    values = rng.uniform(-coeff_bound, coeff_bound, size=len(paulis))
    coeffs = {p: float(v) for p, v, m in zip(paulis, values, keep) if m}
    return LocalHamiltonian(n, k, coeffs, bounded=coeff_bound <= 1.0)


# -- text serialization ------------------------------------------------------

_LINE = re.compile(r"^([IXYZ]+)\s+(\S+)$")


def format_hamiltonian(h: LocalHamiltonian) -> str:
    lines = [f"# n={h.n} k={h.k}"]
    lines += [f"{p.label} {v!r}" for p, v in h.coeffs.items()]
    return "\n".join(lines) + "\n"


def parse_hamiltonian(text: str, n: int | None = None, k: int | None = None) -> LocalHamiltonian:
    """Parse ``<pauli-word> <coefficient>`` lines; ``#`` starts a comment.

    Repeated words are summed. ``n`` and ``k`` default to the word length and
    the largest weight present; a ``# n=.. k=..`` header also sets them.
    """
    coeffs: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        header = re.match(r"^\s*#\s*n=(\d+)\s+k=(\d+)", raw)
        if header:
            n = n if n is not None else int(header.group(1))
            k = k if k is not None else int(header.group(2))
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        word, value = m.group(1), float(m.group(2))
        if n is None:
            n = len(word)
        if len(word) != n:
            raise ValueError(f"line {lineno}: word {word} has length {len(word)}, expected {n}")
        coeffs[word] = coeffs.get(word, 0.0) + value
    if n is None:
        raise ValueError("empty Hamiltonian file: qubit count unknown")
    if k is None:
        k = max((PauliString(w).weight for w in coeffs), default=1)
        k = max(k, 1)
    return LocalHamiltonian(n, k, coeffs)


def load_hamiltonian(path: str | Path, n: int | None = None, k: int | None = None) -> LocalHamiltonian:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"), n=n, k=k)


def save_hamiltonian(h: LocalHamiltonian, path: str | Path) -> None:
    Path(path).write_text(format_hamiltonian(h), encoding="utf-8")
