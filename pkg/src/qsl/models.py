"""Model Hamiltonians, interaction topologies and initial states.

Two model families are covered:

* ``LadderModel``: M non-interacting parties with N equally spaced levels
  ``n ω0`` each.
* ``SpinModel``: M qubits with free terms ``ω0 (1 - σ_x^i)`` and K-body
  couplings ``ω (1 - S_j)``, ``S_j`` the product of σ_x over group j.

Both Hamiltonians have zero ground energy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import prod, sqrt
from typing import Sequence

import numpy as np

from .errors import InvalidParametersError, ResourceError, ShapeError
from .linalg import QuantumState
from .xbasis import qubit_mask, spin_energies, walsh_hadamard

MAX_DIM = 2**16


def _check_budget(dim: int):
    if dim > MAX_DIM:
        raise ResourceError(f"Hilbert space dimension {dim} exceeds budget {MAX_DIM}")


@dataclass(frozen=True)
class InteractionTopology:
    """Groups of qubits coupled by K-body σ_x products.

    Qubit labels are 1-based. ``polygon`` marks topologies produced by
    :func:`build_polygon_topology`, for which the group-count formula is
    also validated.
    """

    num_qubits: int
    order: int
    groups: tuple[tuple[int, ...], ...]
    polygon: bool = False

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(int(q) for q in g) for g in self.groups))

    @property
    def Q(self) -> int:
        return len(self.groups)

    @property
    def masks(self) -> list[int]:
        return [qubit_mask(g, self.num_qubits) for g in self.groups]

    def to_dict(self) -> dict:
        return {"M": self.num_qubits, "K": self.order, "groups": [list(g) for g in self.groups]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, polygon: bool = False) -> InteractionTopology:
        return cls(int(data["M"]), int(data["K"]), tuple(tuple(g) for g in data["groups"]), polygon)

    @classmethod
    def from_json(cls, text: str) -> InteractionTopology:
        return cls.from_dict(json.loads(text))


def polygon_sides(num_qubits: int, order: int) -> int:
    """Number of polygon sides ``L = M/(K-1)``."""
    return num_qubits // (order - 1)


def build_polygon_topology(M: int, K: int) -> InteractionTopology:
    """Arrange M qubits on a polygon with L sides of K-1 qubits each.

    Qubit 1 is a vertex and vertices repeat every K-1 labels. Each side group
    holds the K qubits from one vertex to the next, inclusive. The non-vertex
    qubits, in ascending order, are cut into chunks of K to form the
    ``L(K-2)/K`` interior groups, so every qubit lands in exactly two groups.
    """
    if K < 2:
        raise InvalidParametersError(f"interaction order K={K} must be >= 2")
    if M < 1:
        raise InvalidParametersError(f"qubit count M={M} must be >= 1")
    if M % (K - 1):
        raise InvalidParametersError(f"K-1={K - 1} must divide M={M}")
    L = M // (K - 1)
    if (L * (K - 2)) % K:
        raise InvalidParametersError(f"K={K} must divide L(K-2)={L * (K - 2)} (L={L})")

    vertices = [1 + j * (K - 1) for j in range(L)]
    sides = [tuple((v - 1 + s) % M + 1 for s in range(K)) for v in vertices]
    vertex_set = set(vertices)
    inner = [q for q in range(1, M + 1) if q not in vertex_set]
    interior = [tuple(inner[i:i + K]) for i in range(0, len(inner), K)]
    groups = tuple(sides + interior)

    for g in groups:
        if len(set(g)) != K:
            raise InvalidParametersError(f"group {g} repeats a qubit (M={M}, K={K})")
    if len({frozenset(g) for g in groups}) != len(groups):
        raise InvalidParametersError(f"M={M}, K={K} produces duplicate groups")
    return InteractionTopology(M, K, groups, polygon=True)


def valid_polygon_params(max_qubits: int) -> list[tuple[int, int]]:
    """All ``(M, K)`` with M <= max_qubits accepted by build_polygon_topology."""
    out = []
    for M in range(1, max_qubits + 1):
        for K in range(2, M + 2):
            try:
                build_polygon_topology(M, K)
            except InvalidParametersError:
                continue
            out.append((M, K))
    return out


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TopologyReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {c.name: {"pass": c.passed, "detail": c.detail} for c in self.checks}


def _connected(num_groups: int, members: dict[int, list[int]]) -> bool:
    parent = list(range(num_groups))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for gs in members.values():
        for g in gs[1:]:
            parent[find(g)] = find(gs[0])
    return len({find(g) for g in range(num_groups)}) == 1


def validate_topology(t: InteractionTopology) -> TopologyReport:
    """Check the symmetry requirements of an interaction topology.

    Failures are reported, never raised.
    """
    M, K = t.num_qubits, t.order
    checks = []

    bad = [g for g in t.groups if len(g) != K or len(set(g)) != K or not all(1 <= q <= M for q in g)]
    checks.append(Check("groups-well-formed", not bad,
                        f"malformed groups: {bad}" if bad else f"{t.Q} groups of {K} distinct qubits"))

    members: dict[int, list[int]] = {q: [] for q in range(1, M + 1)}
    for j, g in enumerate(t.groups):
        for q in g:
            if q in members:
                members[q].append(j)
    wrong = {q: len(gs) for q, gs in members.items() if len(gs) != 2}
    checks.append(Check("coverage-exactly-2", not wrong,
                        f"qubit coverage counts {wrong}" if wrong else "every qubit in 2 groups"))

    product = 0
    for m in (qubit_mask([q for q in g if 1 <= q <= M], M) for g in t.groups):
        product ^= m
    checks.append(Check("even-cover", product == 0,
                        "S_1...S_Q = 1" if product == 0 else f"uncancelled mask {product:#b}"))

    connected = t.Q > 0 and _connected(t.Q, {q: gs for q, gs in members.items() if gs})
    checks.append(Check("connectivity", connected,
                        "incidence structure connected" if connected else "incidence structure disconnected"))

    distinct = len({frozenset(g) for g in t.groups}) == t.Q
    checks.append(Check("distinct-groups", distinct, "" if distinct else "repeated group"))

    if t.polygon:
        ok = K >= 2 and M % (K - 1) == 0
        if ok:
            L = M // (K - 1)
            expected = L + L * (K - 2) / K
            ok = t.Q == expected
            detail = f"Q={t.Q}, L + L(K-2)/K = {expected:g}"
        else:
            detail = "K-1 does not divide M"
        checks.append(Check("q-formula", ok, detail))
    return TopologyReport(tuple(checks))


@dataclass(frozen=True)
class SpinModel:
    """Qubit ring with free σ_x rotations at ω0 and K-body couplings at ω."""

    topology: InteractionTopology
    omega0: float
    omega: float

    def __post_init__(self):
        if self.omega0 < 0 or self.omega < 0:
            raise InvalidParametersError("frequencies must be non-negative")
        if self.omega0 == 0 and self.omega == 0:
            raise InvalidParametersError("omega0 and omega cannot both be zero")

    @classmethod
    def free(cls, num_qubits: int, omega0: float) -> SpinModel:
        """Non-interacting qubits (no coupling groups)."""
        return cls(InteractionTopology(num_qubits, 2, ()), omega0, 0.0)

    @property
    def num_qubits(self) -> int:
        return self.topology.num_qubits

    @property
    def max_frequency(self) -> float:
        return max(self.omega0, self.omega)

    def diagonal_energies(self) -> np.ndarray:
        """Energies of the σ_x product eigenbasis, in index order."""
        return spin_energies(self.num_qubits, self.topology.masks, self.omega0, self.omega)


@dataclass(frozen=True)
class LadderModel:
    """M non-interacting parties, each with levels ``n ω0`` for n < N."""

    num_parties: int
    num_levels: int
    omega0: float = 1.0

    def __post_init__(self):
        if self.num_parties < 1:
            raise InvalidParametersError(f"M={self.num_parties} must be >= 1")
        if self.num_levels < 2:
            raise InvalidParametersError(f"N={self.num_levels} must be >= 2")
        if self.omega0 < 0:
            raise InvalidParametersError("omega0 must be non-negative")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.num_levels,) * self.num_parties

    @property
    def dim(self) -> int:
        return self.num_levels**self.num_parties

    @property
    def max_frequency(self) -> float:
        """Largest Bohr frequency of the joint Hamiltonian."""
        return (self.num_levels - 1) * self.num_parties * self.omega0

    def level_sums(self, parties: Sequence[int] | None = None) -> np.ndarray:
        """``Σ n_i`` over the chosen 0-based parties, for every basis index."""
        key = None if parties is None else tuple(sorted(set(parties)))
        return _level_sums(self.num_levels, self.num_parties, key)


@lru_cache(maxsize=32)
def _level_sums(N: int, M: int, parties: tuple[int, ...] | None) -> np.ndarray:
    digits = np.indices((N,) * M).reshape(M, -1)
    if parties is not None:
        digits = digits[list(parties)]
    out = digits.sum(axis=0)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EnergyStats:
    ground_energy: float
    mean_energy: float
    spread: float

    def __post_init__(self):
        if self.spread < 0:
            raise InvalidParametersError(f"spread {self.spread} is negative")
        if self.mean_energy < self.ground_energy:
            raise InvalidParametersError("mean energy lies below ground energy")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.ground_energy, self.mean_energy, self.spread)


def all_zero_state(M: int) -> QuantumState:
    """``|0⟩^{⊗M}`` over M qubits."""
    if M < 1:
        raise InvalidParametersError(f"M={M} must be >= 1")
    _check_budget(2**M)
    return QuantumState.basis((2,) * M, 0)


def plus_state(M: int) -> QuantumState:
    """``|+⟩^{⊗M}``, the zero-energy ground state of every spin model."""
    _check_budget(2**M)
    return QuantumState((2,) * M, np.full(2**M, 2.0 ** (-M / 2), dtype=complex))


def product_state(factors: Sequence[QuantumState]) -> QuantumState:
    """Tensor product of ``factors`` in order."""
    if not factors:
        raise InvalidParametersError("product_state needs at least one factor")
    dims = tuple(d for f in factors for d in f.dims)
    _check_budget(prod(dims))
    amps = factors[0].amplitudes
    for f in factors[1:]:
        amps = np.kron(amps, f.amplitudes)
    return QuantumState.normalized(dims, amps)


def entangled_state(model: LadderModel) -> QuantumState:
    """Equal superposition of the collective levels ``|n⟩^{⊗M}``."""
    _check_budget(model.dim)
    N, M = model.num_levels, model.num_parties
    # index of (n, n, ..., n) in base N
    stride = sum(N**k for k in range(M))
    amps = np.zeros(model.dim, dtype=complex)
    amps[np.arange(N) * stride] = 1.0 / sqrt(N)
    return QuantumState(model.dims, amps)


def entangled_energy_stats(model: LadderModel) -> EnergyStats:
    """Closed-form statistics of :func:`entangled_state` without building it.

    Each party carries ``ω0 (N-1)/2`` and spread ``ω0 √(N²-1) / (2√3)``; the
    parties are perfectly correlated, so both add linearly.
    """
    N, M, w = model.num_levels, model.num_parties, model.omega0
    return EnergyStats(0.0, M * w * (N - 1) / 2.0, M * w * sqrt(N * N - 1.0) / (2.0 * sqrt(3.0)))


def _stats_from_diagonal(probs: np.ndarray, energies: np.ndarray, ground: float) -> EnergyStats:
    mean = float(np.dot(probs, energies))
    var = float(np.dot(probs, (energies - mean) ** 2))
    return EnergyStats(ground, max(mean, ground), sqrt(max(var, 0.0)))


def energy_stats_spin(state: QuantumState, model: SpinModel) -> EnergyStats:
    """Exact mean energy and spread of ``state`` under the spin Hamiltonian."""
    M = model.num_qubits
    if state.dims != (2,) * M:
        raise ShapeError(f"expected {M} qubits, got dims {state.dims}")
    coeffs = walsh_hadamard(state.amplitudes)
    probs = coeffs.real**2 + coeffs.imag**2
    return _stats_from_diagonal(probs, model.diagonal_energies(), 0.0)


def energy_stats_ladder(
    state: QuantumState, model: LadderModel, parties: Sequence[int] | None = None
) -> EnergyStats:
    """Exact mean energy and spread under the ladder Hamiltonian.

    Args:
        state: State over ``model.dims``.
        model: The ladder model.
        parties: 0-based party indices whose free terms are included. ``None``
            means the full Hamiltonian; a single party gives that subsystem's
            own energy and spread.
    """
    if state.dims != model.dims:
        raise ShapeError(f"expected dims {model.dims}, got {state.dims}")
    amps = state.amplitudes
    probs = amps.real**2 + amps.imag**2
    energies = model.omega0 * model.level_sums(parties).astype(float)
    return _stats_from_diagonal(probs, energies, 0.0)


def separable_energy_composition(subsystems) -> tuple[float, float, float, float]:
    """Combine per-subsystem ``(energy, spread)`` pairs of a product state.

    Energies add linearly, spreads in quadrature.

    Returns:
        ``(E, ΔE, max energy, max spread)``.
    """
    pairs = [(float(e), float(d)) for e, d in subsystems]
    if not pairs:
        raise InvalidParametersError("need at least one subsystem")
    if any(e < 0 or d < 0 for e, d in pairs):
        raise InvalidParametersError("subsystem energies and spreads must be non-negative")
    energies = [e for e, _ in pairs]
    spreads = [d for _, d in pairs]
    return (
        sum(energies),
        sqrt(sum(d * d for d in spreads)),
        max(energies),
        max(spreads),
    )
