"""The σ_x product eigenbasis, where the spin Hamiltonian is diagonal.

Bit ``b`` of a basis index encodes the σ_x eigenvalue ``s = 1 - 2b`` of one
qubit; qubit 1 is the most significant bit.
"""

from __future__ import annotations

import numpy as np


def walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Apply the normalized M-fold Hadamard transform with radix-2 butterflies.

    The transform is its own inverse. Returns a new array.
    """
    out = np.array(vec, dtype=complex).reshape(-1)
    n = out.size
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    h = 1
    while h < n:
        blocks = out.reshape(-1, 2, h)
        a = blocks[:, 0, :].copy()
        b = blocks[:, 1, :]
        blocks[:, 0, :] += b
        blocks[:, 1, :] = a - b
        h *= 2
    out /= np.sqrt(n)
    return out


def qubit_mask(qubits, num_qubits: int) -> int:
    """Bit mask for 1-based qubit labels."""
    mask = 0
    for q in qubits:
        mask |= 1 << (num_qubits - q)
    return mask


def _parity(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x) & 1


def spin_energies(num_qubits: int, masks, omega0: float, omega: float) -> np.ndarray:
    """Diagonal of ``Σ ω0 (1 - σ_x^i) + Σ ω (1 - S_j)`` in the x basis.

    Each flipped qubit costs ``2 ω0``; each group with odd parity of flipped
    qubits costs ``2 ω``.
    """
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    energies = 2.0 * omega0 * np.bitwise_count(idx).astype(float)
    for m in masks:
        energies += 2.0 * omega * _parity(idx & m)
    return energies
