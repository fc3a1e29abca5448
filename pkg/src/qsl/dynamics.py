"""Exact time evolution, closed-form survival curves and the min-time solver.

Every term of the spin Hamiltonian commutes with every other, so its
propagator factorizes into one rotation ``cos θ + i X sin θ`` per qubit and
per coupling group, with X a σ_x string. Each rotation pairs amplitude ``k``
with its bit-flip partner ``k ^ mask``. The x-basis oracle evolves the same
state by diagonal phases instead and shares no code with the rotation path
beyond the bit-mask convention.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import NumericError, ShapeError
from .linalg import QuantumState
from .models import LadderModel, SpinModel
from .xbasis import walsh_hadamard

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_EPS = float(np.finfo(float).eps)


def _check_spin_state(state: QuantumState, model: SpinModel):
    M = model.num_qubits
    if state.dims != (2,) * M:
        raise ShapeError(f"expected {M} qubits, got dims {state.dims}")


def _rotate(psi: np.ndarray, partners: np.ndarray, theta: float) -> np.ndarray:
    # e^{-iθ} (cos θ + i X sin θ) with X the bit flip encoded by ``partners``
    c, s = math.cos(theta), math.sin(theta)
    return complex(c, -s) * (c * psi + 1j * s * psi[partners])


def evolve_spin(state: QuantumState, model: SpinModel, t: float) -> QuantumState:
    """Propagate a qubit state for time ``t`` with the factorized propagator."""
    _check_spin_state(state, model)
    M = model.num_qubits
    idx = np.arange(state.dim)
    psi = state.amplitudes.copy()
    if model.omega0:
        for q in range(M):
            psi = _rotate(psi, idx ^ (1 << q), model.omega0 * t)
    if model.omega:
        for mask in model.topology.masks:
            psi = _rotate(psi, idx ^ mask, model.omega * t)
    return state.with_amplitudes(psi)


def evolve_spin_oracle(state: QuantumState, model: SpinModel, t: float) -> QuantumState:
    """Propagate by diagonal phases in the σ_x product eigenbasis.

    Independent check on :func:`evolve_spin`.
    """
    _check_spin_state(state, model)
    coeffs = walsh_hadamard(state.amplitudes)
    coeffs *= np.exp(-1j * model.diagonal_energies() * t)
    return state.with_amplitudes(walsh_hadamard(coeffs))


def evolve_ladder(state: QuantumState, model: LadderModel, t: float) -> QuantumState:
    """Free evolution of the ladder model, diagonal in the level basis."""
    if state.dims != model.dims:
        raise ShapeError(f"expected dims {model.dims}, got {state.dims}")
    phases = np.exp(-1j * model.omega0 * t * model.level_sums())
    return state.with_amplitudes(state.amplitudes * phases)


def survival_entangled_closed_form(model: LadderModel, t: float) -> float:
    """Survival probability of the collective-level superposition.

    Evaluates the geometric sum ``|(1/N) Σ_n exp(-i n M ω0 t)|²`` in its
    Fejér form ``sin²(N x / 2) / (N² sin²(x / 2))`` with ``x = M ω0 t``.
    """
    N = model.num_levels
    x = model.num_parties * model.omega0 * t
    r = math.remainder(x, 2.0 * math.pi)
    if abs(r) < 1e-8:
        return 1.0
    num = math.sin(N * r / 2.0)
    den = N * math.sin(r / 2.0)
    return min(max((num / den) ** 2, 0.0), 1.0)


def _i_power(Q: int) -> complex:
    return (1, 1j, -1, -1j)[Q % 4]


def survival_ising_strong_closed_form(Q: int, omega: float, t: float) -> float:
    """``|cos^Q(ωt) + i^Q sin^Q(ωt)|²`` for a connected topology at ω0 = 0."""
    c, s = math.cos(omega * t), math.sin(omega * t)
    amp = c**Q + _i_power(Q) * s**Q
    return min(max(abs(amp) ** 2, 0.0), 1.0)


class Orthogonality(str, Enum):
    NEVER_ZERO_ODD = "NeverZero_Odd"
    NEVER_ZERO_TWICE_EVEN = "NeverZero_TwiceEven"
    ZERO_TWICE_ODD = "Zero_TwiceOdd"


def orthogonality_classification(Q: int) -> Orthogonality:
    """Whether the strong-coupling survival curve reaches zero, by parity of Q."""
    if Q < 1:
        raise ValueError(f"Q={Q} must be >= 1")
    if Q % 2:
        return Orthogonality.NEVER_ZERO_ODD
    if (Q // 2) % 2 == 0:
        return Orthogonality.NEVER_ZERO_TWICE_EVEN
    return Orthogonality.ZERO_TWICE_ODD


@dataclass(frozen=True)
class SurvivalCurve:
    """Sampled survival probability."""

    times: np.ndarray
    values: np.ndarray
    descriptor: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.clip(np.asarray(self.values, dtype=float), 0.0, 1.0)
        if times.shape != values.shape or times.ndim != 1:
            raise ShapeError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly ascending")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, source: Callable[[float], float], times, descriptor: str = "") -> SurvivalCurve:
        times = np.asarray(times, dtype=float)
        return cls(times, np.array([source(t) for t in times]), descriptor)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,P\n")
        for t, p in zip(self.times, self.values):
            buf.write(f"{t:.16e},{p:.16e}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, descriptor: str = "") -> SurvivalCurve:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t", "P"]:
            raise ValueError("survival CSV must start with header 't,P'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        return cls(data[:, 0], data[:, 1], descriptor)


def spin_survival(state: QuantumState, model: SpinModel, evolve=evolve_spin) -> Callable[[float], float]:
    """``t -> |⟨ψ|ψ(t)⟩|²`` for a spin model."""
    ref = state.amplitudes

    def p(t: float) -> float:
        amp = np.vdot(ref, evolve(state, model, t).amplitudes)
        return float(amp.real**2 + amp.imag**2)

    return p


def ladder_survival(state: QuantumState, model: LadderModel) -> Callable[[float], float]:
    """``t -> |⟨ψ|ψ(t)⟩|²`` for a ladder model."""
    ref = state.amplitudes

    def p(t: float) -> float:
        amp = np.vdot(ref, evolve_ladder(state, model, t).amplitudes)
        return float(amp.real**2 + amp.imag**2)

    return p


class Status(str, Enum):
    REACHED = "Reached"
    NOT_REACHED = "NotReached"


@dataclass(frozen=True)
class MinTimeResult:
    """Outcome of a minimum-time search.

    ``time`` is the first detected time when reached; otherwise the time of
    the smallest value seen, with ``achieved_value`` that value.
    """

    status: Status
    time: float
    achieved_value: float
    horizon: float
    refinement_tolerance: float

    @property
    def reached(self) -> bool:
        return self.status is Status.REACHED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "time": self.time,
            "achieved_value": self.achieved_value,
            "horizon": self.horizon,
            "refinement_tolerance": self.refinement_tolerance,
        }


@dataclass(frozen=True)
class SolverSettings:
    horizon: float
    grid_step: float
    time_tol: float
    value_tol: float = 1e-9

    @classmethod
    def default(cls, max_frequency: float, **overrides) -> SolverSettings:
        """512 samples per fastest period, eight periods, time_tol = 1e-10 horizon."""
        period = 2.0 * math.pi / max_frequency
        overrides = {k: v for k, v in overrides.items() if v is not None}
        horizon = overrides.pop("horizon", 8.0 * period)
        grid_step = overrides.pop("grid_step", period / 512.0)
        time_tol = overrides.pop("time_tol", 1e-10 * horizon)
        return cls(horizon, grid_step, time_tol, **overrides)


def _evaluate(source, t: float) -> float:
    p = float(source(t))
    if not math.isfinite(p):
        raise NumericError(f"survival probability is not finite at t={t!r}")
    return p


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    # f(lo) > 0 >= f(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _brent_minimize(f, a: float, x: float, b: float, fx: float, tol: float, max_iter: int = 200):
    """Brent's parabolic-interpolation minimizer on the bracket ``a < x < b``.

    Falls back to golden-section steps when the parabola is unreliable, and
    stops once the minimizer is pinned to within ``tol`` (absolute).
    """
    w = v = x
    fw = fv = fx
    d = e = 0.0
    for _ in range(max_iter):
        xm = 0.5 * (a + b)
        tol1 = 0.5 * tol + 4.0 * _EPS * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                if (x + d) - a < tol2 or b - (x + d) < tol2:
                    d = math.copysign(tol1, xm - x)
                golden = False
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def min_time_to_survival(
    curve_source: Callable[[float], float],
    epsilon: float,
    horizon: float,
    grid_step: float,
    value_tol: float = 1e-9,
    time_tol: float | None = None,
) -> MinTimeResult:
    """Find the first time at which the survival probability reaches ``epsilon``.

    The grid ``t_k = k * grid_step`` on ``(0, horizon]`` is scanned in order.
    For ``epsilon > 0`` the first downward crossing of ``epsilon`` is refined by
    bisection. For ``epsilon == 0`` the probability only touches zero, so each
    grid local minimum is refined with Brent's method until one falls below
    ``value_tol``.

    Args:
        curve_source: Pure function ``t -> P(t)``.
        epsilon: Target survival probability in ``[0, 1)``.
        horizon: Last time examined.
        grid_step: Scan spacing.
        value_tol: Largest refined minimum still counted as zero (ε = 0).
        time_tol: Absolute refinement tolerance; defaults to ``1e-10 * horizon``.
    """
    if horizon <= 0 or grid_step <= 0:
        raise ValueError("horizon and grid_step must be positive")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon} outside [0, 1)")
    if time_tol is None:
        time_tol = 1e-10 * horizon
    n = max(1, int(math.floor(horizon / grid_step + 1e-9)))
    times = [k * grid_step for k in range(n + 1)]

    def f(t):
        return _evaluate(curve_source, t)

    def result(status, t, value):
        return MinTimeResult(status, t, value, horizon, time_tol)

    best_t, best_p = 0.0, f(0.0)
    if epsilon > 0:
        if best_p <= epsilon:
            return result(Status.REACHED, 0.0, best_p)
        prev_t = 0.0
        for t in times[1:]:
            p = f(t)
            if p < best_p:
                best_t, best_p = t, p
            if p <= epsilon:
                root = _bisect(lambda s: f(s) - epsilon, prev_t, t, time_tol)
                return result(Status.REACHED, root, f(root))
            prev_t = t
        return result(Status.NOT_REACHED, best_t, best_p)

    values = [best_p, f(times[1])]
    for k in range(1, n + 1):
        t, p = times[k], values[k]
        if p < best_p:
            best_t, best_p = t, p
        if k < n:
            values.append(f(times[k + 1]))
            is_min = p < values[k - 1] and p <= values[k + 1]
        else:
            is_min = p < values[k - 1]
        if not is_min:
            continue
        if k < n:
            tm, pm = _brent_minimize(f, times[k - 1], t, times[k + 1], p, time_tol)
        else:
            tm, pm = t, p
        if pm < best_p:
            best_t, best_p = tm, pm
        if pm < value_tol:
            return result(Status.REACHED, tm, pm)
    return result(Status.NOT_REACHED, best_t, best_p)
