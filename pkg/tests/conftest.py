"""Shared test fixtures and the particle-level brute-force oracle.

The oracle represents N qubits on the full 2^N space (bit = 1 means the
excited mode, so the Dicke label k counts set bits) and is the only place a
2^N representation exists.  It stays below N = 5.
"""

from __future__ import annotations

import numpy as np
import pytest

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, 1j], [-1j, 0.0]], dtype=complex)   # (down, up) order
PAULI_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
PAULIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def symmetric_embedding(n_atoms: int) -> np.ndarray:
    """Isometry B with B[s, k]: full-space basis state s -> Dicke label k."""
    dim = 2**n_atoms
    out = np.zeros((dim, n_atoms + 1))
    for s in range(dim):
        out[s, bin(s).count("1")] = 1.0
    return out / np.sqrt(out.sum(axis=0, keepdims=True))


def collective_operator(n_atoms: int, axis: str) -> np.ndarray:
    """Sum of single-qubit Paulis on the full 2^N space."""
    dim = 2**n_atoms
    total = np.zeros((dim, dim), dtype=complex)
    for site in range(n_atoms):
        op = np.array([[1.0]])
        for j in range(n_atoms):
            factor = PAULIS[axis] if j == site else np.eye(2)
            op = np.kron(op, factor)
        total += op
    return total


def product_state(n_atoms: int, single: np.ndarray) -> np.ndarray:
    """Tensor power of one qubit state given as (down, up) amplitudes."""
    out = np.array([1.0], dtype=complex)
    for _ in range(n_atoms):
        out = np.kron(out, single)
    return out


def qubit_at(theta: float, phi: float) -> np.ndarray:
    """(down, up) amplitudes of one qubit pointing along (theta, phi)."""
    return np.array([np.sin(theta / 2) * np.exp(0.5j * phi),
                     np.cos(theta / 2) * np.exp(-0.5j * phi)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_state(n_atoms: int, rng) -> np.ndarray:
    vec = rng.normal(size=n_atoms + 1) + 1j * rng.normal(size=n_atoms + 1)
    return vec / np.linalg.norm(vec)
