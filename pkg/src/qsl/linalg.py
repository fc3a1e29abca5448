"""Dense linear algebra for small Hilbert spaces.

States are stored as flat complex vectors over the tensor-product basis, with
the first subsystem as the most significant digit. ħ = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .errors import NotPSDError, ShapeError, ValidationError

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class QuantumState:
    """Normalized pure state over a labeled tensor-product basis.

    Args:
        dims: Per-subsystem dimensions.
        amplitudes: Complex amplitudes, length ``prod(dims)``.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeError(f"dims must be positive integers, got {self.dims}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != prod(dims):
            raise ShapeError(
                f"expected {prod(dims)} amplitudes for dims {dims}, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, dims, amplitudes) -> QuantumState:
        """Build a state after rescaling ``amplitudes`` to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(tuple(dims), amps / norm)

    @classmethod
    def basis(cls, dims, index: int) -> QuantumState:
        dims = tuple(dims)
        amps = np.zeros(prod(dims), dtype=complex)
        amps[index] = 1.0
        return cls(dims, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def with_amplitudes(self, amplitudes: np.ndarray) -> QuantumState:
        return QuantumState(self.dims, amplitudes)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=1e-12):
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m)[0] < -1e-10:
            raise NotPSDError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_state(cls, state: QuantumState) -> DensityMatrix:
        v = state.amplitudes
        return cls(np.outer(v, v.conj()))


def _check_same_dims(a: QuantumState, b: QuantumState):
    if a.dims != b.dims:
        raise ShapeError(f"dimension mismatch: {a.dims} vs {b.dims}")


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """Return ⟨a|b⟩, conjugating ``a``."""
    _check_same_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def survival_probability(a: QuantumState, b: QuantumState) -> float:
    """Squared overlap |⟨a|b⟩|², clamped to [0, 1]."""
    amp = inner_product(a, b)
    p = amp.real * amp.real + amp.imag * amp.imag
    return min(max(p, 0.0), 1.0)


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        ``(eigenvalues, eigenvectors)`` with real eigenvalues in ascending
        order and eigenvectors as the columns of a unitary matrix, so that
        ``m == V @ diag(λ) @ V†``.

    Raises:
        ValidationError: if ``m`` deviates from Hermitian by more than 1e-10.
    """
    m = _as_square(m)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError("matrix is not Hermitian")
    # eigh reads only one triangle; symmetrize so both contribute
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-1e-8, 0)`` are treated as zero. Eigenvalues below the
    floating-point noise floor of the decomposition are also zeroed, because
    their square roots would otherwise be amplified to ~1e-8.
    """
    vals, vecs = hermitian_eig(m)
    if vals.size and vals[0] < -PSD_TOL:
        raise NotPSDError(f"matrix has eigenvalue {vals[0]!r} < -{PSD_TOL}")
    scale = np.max(np.abs(vals), initial=0.0)
    floor = 10.0 * vals.size * np.finfo(float).eps * scale
    vals = np.where(vals > floor, vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(ρ) σ sqrt(ρ)))²``, clamped to [0, 1]."""
    if rho.dim != sigma.dim:
        raise ShapeError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    root = matrix_sqrt_psd(rho.entries)
    inner = root @ sigma.entries @ root
    inner = 0.5 * (inner + inner.conj().T)
    tr = np.trace(matrix_sqrt_psd(inner)).real
    return min(max(tr * tr, 0.0), 1.0)
