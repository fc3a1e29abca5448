"""Exit criteria for the package, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import random_density, random_state, strong_curve_min
from qsl import cli
from qsl.dynamics import (
    Orthogonality,
    SolverSettings,
    evolve_spin,
    evolve_spin_oracle,
    ladder_survival,
    min_time_to_survival,
    orthogonality_classification,
    spin_survival,
    survival_entangled_closed_form,
)
from qsl.linalg import DensityMatrix, QuantumState, fidelity, survival_probability
from qsl.models import (
    LadderModel,
    SpinModel,
    all_zero_state,
    build_polygon_topology,
    energy_stats_ladder,
    energy_stats_spin,
    entangled_state,
    separable_energy_composition,
    valid_polygon_params,
)
from qsl.speedlimit import (
    EnergyStats,
    alpha_approx,
    beta,
    entangled_qsl_time,
    predicted_orthogonality_time_entangled,
    predicted_ratio_entangled,
    predicted_ratio_ising,
    qsl_time,
    separable_bound,
)

ASYMPTOTE = 2 / math.sqrt(3)


def record(number, title, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}  {detail}".rstrip())
    return ok


def solve(source, model, eps=0.0):
    s = SolverSettings.default(model.max_frequency)
    res = min_time_to_survival(source, eps, s.horizon, s.grid_step, s.value_tol, s.time_tol)
    return res, s


def test_01_entangled_two_level_saturation():
    start = time.perf_counter()
    errors = []
    for M in (1, 2, 3, 4):
        model = LadderModel(M, 2, 1.0)
        state = entangled_state(model)
        res, _ = solve(ladder_survival(state, model), model)
        t0 = qsl_time(energy_stats_ladder(state, model), 0).bound_time
        errors.append(abs(res.time - t0) / t0 if res.reached else math.inf)
    elapsed = time.perf_counter() - start
    ok = max(errors) <= 1e-6 and elapsed < 1.0
    record(1, "N=2 entangled state saturates the bound", ok,
           f"max rel err {max(errors):.2e} (tol 1e-6), {elapsed:.2f}s (< 1s)")
    assert ok


@pytest.fixture(scope="module")
def fig2_runs():
    """Measured orthogonalization times on both paths of the N sweep."""
    start = time.perf_counter()
    runs = []
    for M in (2, 3):
        for N in range(2, 65):
            model = LadderModel(M, N, 1.0)
            res, s = solve(lambda t, m=model: survival_entangled_closed_form(m, t), model)
            runs.append(("closed-form", M, N, res, s, entangled_qsl_time(model)))
        for N in range(2, 9):
            model = LadderModel(M, N, 1.0)
            state = entangled_state(model)
            res, s = solve(ladder_survival(state, model), model)
            runs.append(("simulation", M, N, res, s, qsl_time(energy_stats_ladder(state, model), 0).bound_time))
    return runs, time.perf_counter() - start


def test_02_fig2_ratio(fig2_runs):
    runs, elapsed = fig2_runs
    ratios = {}
    worst = 0.0
    below = True
    for path, M, N, res, _, t0 in runs:
        assert res.reached, (path, M, N)
        ratio = res.time / t0
        ratios[(path, M, N)] = ratio
        worst = max(worst, abs(ratio - predicted_ratio_entangled(N)))
        below &= ratio <= ASYMPTOTE
    m_spread = max(abs(ratios[(p, 2, N)] - ratios[(p, 3, N)]) for p, M, N, *_ in runs if M == 2)
    ok = worst <= 1e-6 and below and m_spread <= 1e-9 and elapsed < 5.0
    record(2, "ratio T_perp/T0 vs N (both paths)", ok,
           f"max |ratio-closed| {worst:.2e} (tol 1e-6), all <= 2/sqrt3: {below}, "
           f"M-spread {m_spread:.2e} (tol 1e-9), {elapsed:.2f}s (< 5s)")
    assert ok


def test_03_first_zero_formula(fig2_runs):
    runs, _ = fig2_runs
    worst = 0.0
    ok = True
    for _, M, N, res, s, _ in runs:
        err = abs(res.time - predicted_orthogonality_time_entangled(LadderModel(M, N, 1.0)))
        worst = max(worst, err / s.time_tol)
        ok &= err <= s.time_tol
    record(3, "first zero at 2pi/(N M omega0)", ok, f"max err / time_tol = {worst:.3f}")
    assert ok


def test_04_ising_ratio():
    start = time.perf_counter()
    details, ok = [], True
    for M, K in ((6, 2), (12, 4)):
        topology = build_polygon_topology(M, K)
        assert topology.Q == 6
        model = SpinModel(topology, 1e-3, 1.0)
        state = all_zero_state(M)
        res, _ = solve(spin_survival(state, model), model)
        t0 = qsl_time(energy_stats_spin(state, model), 0).bound_time
        ratio_err = abs(res.time / t0 - math.sqrt(M / (2 * K))) / math.sqrt(M / (2 * K))
        time_err = abs(res.time - math.pi / 4) / (math.pi / 4)
        assert predicted_ratio_ising(M, K) == pytest.approx(math.sqrt(M / (2 * K)))
        ok &= res.reached and ratio_err <= 0.01 and time_err <= 0.01
        details.append(f"(M={M},K={K}) ratio err {ratio_err:.1e}, T_perp err {time_err:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30.0
    record(4, "Ising ratio sqrt(M/2K) at omega/omega0=1e3", ok,
           "; ".join(details) + f" (tol 1%), {elapsed:.2f}s (< 30s)")
    assert ok


def test_05_parity_rule():
    ok = True
    lines = []
    for M, K in valid_polygon_params(12):
        model = SpinModel(build_polygon_topology(M, K), 0.0, 1.0)
        Q = model.topology.Q
        res, s = solve(spin_survival(all_zero_state(M), model), model)
        if orthogonality_classification(Q) is Orthogonality.ZERO_TWICE_ODD:
            good = res.reached and res.achieved_value < 1e-9 and abs(res.time - math.pi / 4) <= s.time_tol
        else:
            _, brute = strong_curve_min(Q)
            good = not res.reached and abs(res.achieved_value - brute) <= 1e-9
        ok &= good
        lines.append(f"{M}/{K}/Q={Q}:{'ok' if good else 'BAD'}")
    record(5, "parity rule at omega0=0, all polygons M<=12", ok, " ".join(lines))
    assert ok


def test_06_separable_gap():
    ratios_ok = True
    details = []
    for M in (1, 2, 4, 9):
        results, checks = cli.run_separable_demo({**cli.DEFAULTS["separable-demo"], "M": M})
        ratios_ok &= abs(results["ratio"] - math.sqrt(M)) <= 1e-6
        details.append(f"M={M}:{results['ratio']:.9f}")

    def composed(sub):
        E, dE, _, _ = separable_energy_composition(sub)
        return qsl_time(EnergyStats(0, E, dE), 0).bound_time

    rng = np.random.default_rng(6)
    inequality = all(
        separable_bound(sub) >= composed(sub)
        for sub in ([tuple(p) for p in rng.random((int(rng.integers(1, 9)), 2)) * 5] for _ in range(1000))
    )
    equality = True
    for _ in range(100):
        n = int(rng.integers(2, 9))
        e, d = rng.random(2) * 5 + 0.1
        all_energy = [(e, d)] + [(0.0, 0.0)] * (n - 1)
        all_spread = [(e, min(e, d))] + [(x, 0.0) for x in rng.random(n - 1) * 5]
        equality &= separable_bound(all_energy) == composed(all_energy)
        equality &= separable_bound(all_spread) == composed(all_spread)
    ok = ratios_ok and inequality and equality
    record(6, "separable gap sqrt(M) and bound inequality", ok,
           f"{' '.join(details)} (tol 1e-6); inequality x1000: {inequality}; equality cases exact: {equality}")
    assert ok


def test_07_oracle_equivalence():
    rng = np.random.default_rng(7)
    params = valid_polygon_params(12)
    spin_worst = 0.0
    for _ in range(100):
        M, K = params[rng.integers(len(params))]
        model = SpinModel(build_polygon_topology(M, K), *(rng.random(2) * 3 + 0.01))
        state = QuantumState((2,) * M, random_state(rng, 2**M))
        t = rng.random() * 10
        p1 = survival_probability(state, evolve_spin(state, model, t))
        p2 = survival_probability(state, evolve_spin_oracle(state, model, t))
        spin_worst = max(spin_worst, abs(p1 - p2))
    ladder_worst = 0.0
    for N in range(2, 9):
        for M in range(1, 5):
            model = LadderModel(M, N, 1.0)
            sim = ladder_survival(entangled_state(model), model)
            for t in rng.random(16) * 4 * math.pi:
                ladder_worst = max(ladder_worst, abs(sim(t) - survival_entangled_closed_form(model, t)))
    ok = spin_worst <= 1e-10 and ladder_worst <= 1e-10
    record(7, "oracle equivalence", ok, f"spin {spin_worst:.1e}, ladder {ladder_worst:.1e} (tol 1e-10)")
    assert ok


def test_08_energy_bookkeeping():
    spin_worst = 0.0
    for M, K in valid_polygon_params(12):
        topology = build_polygon_topology(M, K)
        for w0, w in ((1.0, 1.0), (1e-3, 1.0), (0.4, 2.5)):
            stats = energy_stats_spin(all_zero_state(M), SpinModel(topology, w0, w))
            expected = (0.0, w0 * M + w * topology.Q, math.sqrt(w0**2 * M + w**2 * topology.Q))
            spin_worst = max(spin_worst, max(abs(a - b) for a, b in zip(stats.as_tuple(), expected)))
    ladder_worst = 0.0
    for N in range(2, 9):
        for M in range(1, 5):
            model = LadderModel(M, N, 1.0)
            state = entangled_state(model)
            per_e, per_d = (N - 1) / 2, math.sqrt(N * N - 1) / (2 * math.sqrt(3))
            for i in range(M):
                party = energy_stats_ladder(state, model, parties=[i])
                ladder_worst = max(ladder_worst, abs(party.mean_energy - per_e), abs(party.spread - per_d))
            total = energy_stats_ladder(state, model)
            ladder_worst = max(ladder_worst, abs(total.mean_energy - M * per_e), abs(total.spread - M * per_d))
    ok = spin_worst <= 1e-10 and ladder_worst <= 1e-10
    record(8, "energy statistics", ok, f"spin {spin_worst:.1e}, ladder {ladder_worst:.1e} (tol 1e-10)")
    assert ok


def test_09_fidelity():
    rng = np.random.default_rng(9)
    worst_self = worst_sym = worst_pure = 0.0
    for dim in range(1, 9):
        for _ in range(10):
            rho = DensityMatrix(random_density(rng, dim, rank=int(rng.integers(1, dim + 1))))
            sigma = DensityMatrix(random_density(rng, dim, rank=int(rng.integers(1, dim + 1))))
            worst_self = max(worst_self, abs(fidelity(rho, rho) - 1))
            worst_sym = max(worst_sym, abs(fidelity(rho, sigma) - fidelity(sigma, rho)))
            psi = QuantumState((dim,), random_state(rng, dim))
            phi = QuantumState((dim,), random_state(rng, dim))
            f = fidelity(DensityMatrix.from_state(psi), DensityMatrix.from_state(phi))
            worst_pure = max(worst_pure, abs(f - survival_probability(psi, phi)))
    qubit = abs(fidelity(DensityMatrix(np.eye(2) / 2), DensityMatrix(np.diag([1.0, 0.0]))) - 0.5)
    ok = max(worst_self, worst_sym, worst_pure) <= 1e-9 and qubit <= 1e-10
    record(9, "Uhlmann fidelity", ok,
           f"self {worst_self:.1e}, sym {worst_sym:.1e}, pure {worst_pure:.1e} (tol 1e-9); qubit {qubit:.1e} (tol 1e-10)")
    assert ok


def test_10_beta_golden():
    eps = np.finfo(float).eps
    values = (beta(0.0), beta(1.0), beta(0.5), alpha_approx(0.0))
    ok = (abs(values[0] - 1) <= eps and abs(values[1]) <= eps and abs(values[2] - 0.5) <= eps
          and abs(values[3] - 1) <= eps)
    record(10, "beta/alpha golden values", ok, f"beta(0,1,0.5)={values[:3]}, alpha(0)={values[3]}")
    assert ok
