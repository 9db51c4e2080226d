"""Certify and learn k-local Hamiltonians from simulated dynamics and Gibbs states."""

from .certify_dynamics import (
    CertificationConfig,
    Decision,
    Verdict,
    certify,
    certify_amplified,
    verify_lemma_suite,
)
from .dynamics import EvolutionOracle, Ledger, NoiseModel
from .pauli_algebra import LocalHamiltonian, PauliString, enumerate_local_paulis, to_dense

__version__ = "0.1.0"

__all__ = [
    "CertificationConfig",
    "Decision",
    "EvolutionOracle",
    "Ledger",
    "LocalHamiltonian",
    "NoiseModel",
    "PauliString",
    "Verdict",
    "certify",
    "certify_amplified",
    "enumerate_local_paulis",
    "to_dense",
    "verify_lemma_suite",
]
