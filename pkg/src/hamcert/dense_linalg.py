"""Dense Hermitian spectral routines and the norms used throughout the package.

Operators are plain complex numpy arrays of shape ``(2^n, 2^n)``. Norms with a
``normalized`` flavour divide traces by the dimension ``2^n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 10
HERMITIAN_RTOL = 1e-9


class DimensionError(ValueError):
    pass


def num_qubits(a: np.ndarray) -> int:
    """Validate a dense operator and return its qubit count."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two")
    n = dim.bit_length() - 1
    if n > MAX_QUBITS:
        raise DimensionError(
            f"{n} qubits exceeds the dense cap of {MAX_QUBITS} (a 2^n x 2^n matrix needs 16*4^n bytes)"
        )
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return n


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a: np.ndarray) -> None:
    scale = float(np.max(np.abs(a)))
    if hermiticity_defect(a) > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ValueError("operator is not Hermitian within tolerance")


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and, optionally, the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply_function(self, f) -> np.ndarray:
        """``V f(diag(lambda)) V^dagger`` for an elementwise function f."""
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ v.conj().T

    def frobenius_sq(self) -> float:
        """Squared normalized Frobenius norm, ``mean(lambda^2)``."""
        return float(np.mean(self.eigenvalues**2))


def eig_hermitian(a: np.ndarray, vectors: bool = True) -> Spectrum:
    a = np.asarray(a, dtype=complex)
    num_qubits(a)
    check_hermitian(a)
    herm = 0.5 * (a + a.conj().T)
    if vectors:
        w, v = np.linalg.eigh(herm)
        return Spectrum(w, v)
    return Spectrum(np.linalg.eigvalsh(herm))


def exp_i_hermitian(h: np.ndarray | Spectrum, scale: float) -> np.ndarray:
    """``exp(-i * scale * H)`` through the eigendecomposition of H."""
    spec = h if isinstance(h, Spectrum) else eig_hermitian(h)
    return spec.apply_function(lambda lam: np.exp(-1j * scale * lam))


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(a), compute_uv=False)


def schatten_p_normalized(a: np.ndarray, p: float) -> float:
    """``(sum_i sigma_i^p / 2^n)^(1/p)``; p=2 is the normalized Frobenius norm."""
    if p < 1:
        raise ValueError(f"Schatten index must be >= 1, got {p}")
    a = np.asarray(a)
    s = singular_values(a)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float((np.sum(s**p) / a.shape[0]) ** (1.0 / p))


def frobenius_normalized(a: np.ndarray) -> float:
    """``sqrt(Tr[A^dagger A] / 2^n)`` computed from the entries."""
    a = np.asarray(a)
    return float(np.sqrt(np.vdot(a, a).real / a.shape[0]))


def operator_norm(a: np.ndarray) -> float:
    return float(singular_values(a)[0])


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(singular_values(a)))
