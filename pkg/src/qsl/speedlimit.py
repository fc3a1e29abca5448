"""Closed-form speed-limit bounds and model predictions (ħ = 1).

The bound on the time to reach survival probability ε is the larger of a
mean-energy branch ``α(ε) π / 2(E - E0)`` and a spread branch
``β(ε) π / 2ΔE``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
import math
from math import acos, inf, pi, sqrt

from .errors import DomainError, NoOrthogonalityError, StationaryStateError
from .models import EnergyStats, LadderModel, build_polygon_topology

# branches this close are a tie, reported as the spread branch
TIE_RTOL = 1e-12


class Branch(str, Enum):
    MEAN_ENERGY = "mean-energy"
    SPREAD = "spread"


@dataclass(frozen=True)
class SpeedLimitReport:
    """Bound time with the branch values that produced it.

    ``alpha_used`` comes from the β² surrogate, not an exact α.
    """

    bound_time: float
    dominant_branch: Branch
    epsilon: float
    alpha_used: float
    beta_used: float
    mean_energy_branch: float
    spread_branch: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dominant_branch"] = self.dominant_branch.value
        return d


def _check_epsilon(epsilon: float):
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon={epsilon} outside [0, 1]")


def beta(epsilon: float) -> float:
    """Spread-branch coefficient ``2 arccos(sqrt(ε)) / π``."""
    _check_epsilon(epsilon)
    return 2.0 * acos(sqrt(epsilon)) / pi


def alpha_approx(epsilon: float) -> float:
    """Mean-energy-branch coefficient, approximated by ``β(ε)²``.

    No closed form for the exact coefficient is available; the square of the
    spread coefficient tracks it closely and is exact at ε = 0 and ε = 1.
    """
    return beta(epsilon) ** 2


def _branch(coeff: float, resource: float) -> float:
    return coeff * pi / (2.0 * resource) if resource > 0 else inf


def qsl_time(stats: EnergyStats, epsilon: float = 0.0) -> SpeedLimitReport:
    """Lower bound on the time for the survival probability to reach ``epsilon``.

    Raises:
        StationaryStateError: if the state has neither energy above ground
            nor spread.
        DomainError: if ``epsilon`` is outside ``[0, 1)``.
    """
    _check_epsilon(epsilon)
    if epsilon == 1.0:
        raise DomainError("epsilon=1 is reached at t=0; no bound to compute")
    excess = stats.mean_energy - stats.ground_energy
    if excess <= 0 and stats.spread <= 0:
        raise StationaryStateError("state has E = E0 and zero spread; it never evolves")
    a, b = alpha_approx(epsilon), beta(epsilon)
    mean_branch = _branch(a, excess)
    spread_branch = _branch(b, stats.spread)
    if mean_branch > spread_branch and not math.isclose(mean_branch, spread_branch, rel_tol=TIE_RTOL):
        return SpeedLimitReport(mean_branch, Branch.MEAN_ENERGY, epsilon, a, b, mean_branch, spread_branch)
    return SpeedLimitReport(spread_branch, Branch.SPREAD, epsilon, a, b, mean_branch, spread_branch)


def separable_bound(subsystems) -> float:
    """Orthogonalization bound for product states, set by the fastest subsystem.

    Args:
        subsystems: ``(energy, spread)`` pairs, one per subsystem.
    """
    pairs = [(float(e), float(d)) for e, d in subsystems]
    if not pairs or all(e <= 0 and d <= 0 for e, d in pairs):
        raise StationaryStateError("no subsystem has energy or spread")
    e_max = max(e for e, _ in pairs)
    d_max = max(d for _, d in pairs)
    return max(_branch(1.0, e_max), _branch(1.0, d_max))


def _check_ladder(model: LadderModel):
    if model.omega0 <= 0:
        raise DomainError(f"omega0={model.omega0} must be positive")


def entangled_qsl_time(model: LadderModel) -> float:
    """ε = 0 bound for the collective-level superposition: ``√3 π / (M √(N²-1) ω0)``."""
    _check_ladder(model)
    N, M = model.num_levels, model.num_parties
    return sqrt(3.0) * pi / (M * sqrt(N * N - 1.0) * model.omega0)


def predicted_orthogonality_time_entangled(model: LadderModel) -> float:
    """First zero of the collective-level survival probability, ``2π / (N M ω0)``."""
    _check_ladder(model)
    return 2.0 * pi / (model.num_levels * model.num_parties * model.omega0)


def predicted_ratio_entangled(N: int) -> float:
    """``T_perp / T_0 = 2 √(N²-1) / (√3 N)``, independent of the party count."""
    if N < 2:
        raise DomainError(f"N={N} must be >= 2")
    return 2.0 * sqrt(N * N - 1.0) / (sqrt(3.0) * N)


def ising_qsl_strong(omega: float, Q: int) -> float:
    """Strong-coupling (ω ≫ ω0) limit of the bound from the all-zero state."""
    if omega <= 0:
        raise DomainError(f"omega={omega} must be positive")
    if Q < 1:
        raise DomainError(f"Q={Q} must be >= 1")
    return pi / (2.0 * omega * sqrt(Q))


def predicted_ratio_ising(M: int, K: int) -> float:
    """``T_perp / T_0 = √(M / 2K)`` for polygon topologies with twice-odd Q.

    Raises:
        NoOrthogonalityError: if Q is odd or a multiple of four.
    """
    Q = build_polygon_topology(M, K).Q
    if Q % 2 or (Q // 2) % 2 == 0:
        raise NoOrthogonalityError(f"Q={Q} is not twice an odd number; P(t) never vanishes")
    return sqrt(M / (2.0 * K))
