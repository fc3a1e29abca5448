"""``qsl`` command-line harness.

All quantities use ħ = 1: frequencies are angular frequencies in inverse time
units and energies are in units of ħ × (unit frequency).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import dynamics as dyn
from .errors import QSLError
from .models import (
    MAX_DIM,
    EnergyStats,
    LadderModel,
    SpinModel,
    all_zero_state,
    build_polygon_topology,
    energy_stats_ladder,
    energy_stats_spin,
    entangled_energy_stats,
    entangled_state,
    validate_topology,
)
from .speedlimit import (
    entangled_qsl_time,
    ising_qsl_strong,
    predicted_orthogonality_time_entangled,
    predicted_ratio_entangled,
    predicted_ratio_ising,
    qsl_time,
    separable_bound,
)

UNITS = "Units: hbar = 1; omega0/omega are angular frequencies, energies are multiples of hbar*omega."

SWEEP_COLUMNS = ("N", "M", "path", "T_perp_measured", "T0", "ratio", "ratio_closed_form")

# ratio of omega to omega0 from which strong-coupling predictions are checked
STRONG_REGIME = 1e3

DEFAULTS = {
    "bound": {"E": None, "dE": None, "E0": 0.0, "eps": 0.0, "format": "json"},
    "entangled-sweep": {"N_max": 64, "M": 2, "omega0": 1.0, "eps": 0.0, "format": "csv"},
    "ising": {"M": 6, "K": 2, "omega0": None, "omega": 1.0, "eps": 0.0, "format": "json"},
    "separable-demo": {"M": 4, "omega0": 1.0, "eps": 0.0, "format": "json"},
    "topology": {"M": 6, "K": 3, "format": "json"},
}
SOLVER_KEYS = ("horizon", "grid_step", "time_tol", "value_tol")


def check(name, passed, measured=None, expected=None, tolerance=None) -> dict:
    return {"name": name, "pass": bool(passed), "measured": measured,
            "expected": expected, "tolerance": tolerance}


def _close(measured, expected, tol, relative=False) -> bool:
    if measured is None or expected is None:
        return False
    scale = abs(expected) if relative else 1.0
    return abs(measured - expected) <= tol * scale


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _threads() -> int:
    n = int(os.environ.get("QSL_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def _solver(cfg: dict, max_frequency: float) -> dyn.SolverSettings:
    return dyn.SolverSettings.default(max_frequency, **{k: cfg.get(k) for k in SOLVER_KEYS})


def _solve(source, eps, settings: dyn.SolverSettings) -> dyn.MinTimeResult:
    return dyn.min_time_to_survival(source, eps, settings.horizon, settings.grid_step,
                                    settings.value_tol, settings.time_tol)


def run_bound(cfg: dict):
    if cfg["E"] is None or cfg["dE"] is None:
        raise QSLError("bound requires --E and --dE")
    stats = EnergyStats(cfg["E0"], cfg["E"], cfg["dE"])
    report = qsl_time(stats, cfg["eps"])
    checks = [check("bound-positive", report.bound_time > 0, report.bound_time)]
    return report.to_dict(), checks


def _sweep_row(N: int, cfg: dict) -> tuple[dict, list]:
    M, omega0, eps = cfg["M"], cfg["omega0"], cfg["eps"]
    model = LadderModel(M, N, omega0)
    settings = _solver(cfg, model.max_frequency)
    if model.dim <= MAX_DIM:
        path = "simulation"
        state = entangled_state(model)
        source = dyn.ladder_survival(state, model)
        T0 = qsl_time(energy_stats_ladder(state, model), eps).bound_time
    else:
        path = "closed-form"
        source = lambda t: dyn.survival_entangled_closed_form(model, t)  # noqa: E731
        T0 = entangled_qsl_time(model) if eps == 0 else qsl_time(entangled_energy_stats(model), eps).bound_time
    res = _solve(source, eps, settings)
    T_perp = res.time if res.reached else None
    ratio = T_perp / T0 if T_perp is not None else None
    closed = predicted_ratio_entangled(N)
    row = {"N": N, "M": M, "path": path, "T_perp_measured": T_perp, "T0": T0,
           "ratio": ratio, "ratio_closed_form": closed}
    checks = [check(f"N={N}:solver-reached", res.reached, res.achieved_value)]
    if eps == 0:
        predicted = predicted_orthogonality_time_entangled(model)
        checks += [
            check(f"N={N}:ratio-closed-form", _close(ratio, closed, 1e-6), ratio, closed, 1e-6),
            check(f"N={N}:ratio-below-asymptote", ratio is not None and ratio <= 2 / math.sqrt(3) + 1e-9,
                  ratio, 2 / math.sqrt(3), 1e-9),
            check(f"N={N}:first-zero", _close(T_perp, predicted, settings.time_tol), T_perp, predicted,
                  settings.time_tol),
        ]
    return row, checks


def run_entangled_sweep(cfg: dict):
    if cfg["N_max"] < 2:
        raise QSLError("N_max must be >= 2")
    Ns = range(2, cfg["N_max"] + 1)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        out = list(pool.map(lambda N: _sweep_row(N, cfg), Ns))
    rows = [r for r, _ in out]
    checks = [c for _, cs in out for c in cs]
    return {"rows": rows}, checks


def run_ising(cfg: dict):
    M, K, omega, eps = cfg["M"], cfg["K"], cfg["omega"], cfg["eps"]
    omega0 = cfg["omega0"] if cfg["omega0"] is not None else omega / STRONG_REGIME
    cfg["omega0"] = omega0
    topology = build_polygon_topology(M, K)
    validation = validate_topology(topology)
    model = SpinModel(topology, omega0, omega)
    state = all_zero_state(M)
    stats = energy_stats_spin(state, model)
    settings = _solver(cfg, model.max_frequency)
    res = _solve(dyn.spin_survival(state, model), eps, settings)
    Q = topology.Q
    cls = dyn.orthogonality_classification(Q)
    T0_exact = qsl_time(stats, eps).bound_time
    T0_strong = ising_qsl_strong(omega, Q)
    T_perp = res.time if res.reached else None
    results = {
        "topology": topology.to_dict(),
        "Q": Q,
        "classification": cls.value,
        "T_perp": T_perp,
        "T0_exact": T0_exact,
        "T0_strong": T0_strong,
        "ratio": T_perp / T0_exact if T_perp is not None else None,
        "predicted_ratio": predicted_ratio_ising(M, K) if cls is dyn.Orthogonality.ZERO_TWICE_ODD else None,
        "min_P": res.achieved_value,
        "min_P_time": res.time,
        "energy": {"E0": stats.ground_energy, "E": stats.mean_energy, "dE": stats.spread},
        "solver": res.to_dict(),
        "validation": validation.to_dict(),
    }
    checks = [check(c.name, c.passed) for c in validation.checks]
    strong = omega0 == 0 or omega / omega0 >= STRONG_REGIME
    if eps == 0 and strong:
        if cls is dyn.Orthogonality.ZERO_TWICE_ODD:
            first_zero = math.pi / (4 * omega)
            checks += [
                check("solver-reached", res.reached, res.achieved_value, 0.0, settings.value_tol),
                check("ratio-vs-sqrt(M/2K)", _close(results["ratio"], results["predicted_ratio"], 0.01, True),
                      results["ratio"], results["predicted_ratio"], 0.01),
                check("T_perp-vs-pi/(4omega)", _close(T_perp, first_zero, 0.01, True), T_perp, first_zero, 0.01),
            ]
        else:
            expected = strong_limit_minimum(Q)
            tol = 1e-9 if omega0 == 0 else 5e-3
            checks += [
                check("never-orthogonal", not res.reached, res.achieved_value),
                check("min_P-vs-strong-limit", _close(res.achieved_value, expected, tol), res.achieved_value,
                      expected, tol),
            ]
    if cfg.get("curve"):
        _write_curve(cfg["curve"], dyn.spin_survival(state, model), settings, f"ising M={M} K={K}")
    return results, checks


def strong_limit_minimum(Q: int) -> float:
    """Global minimum of the strong-coupling survival curve.

    Outside the twice-odd class it sits at ωt = π/4, where both terms have
    modulus 2^(-Q/2): they add in quadrature for odd Q and in phase for
    twice-even Q.
    """
    cls = dyn.orthogonality_classification(Q)
    if cls is dyn.Orthogonality.ZERO_TWICE_ODD:
        return 0.0
    if cls is dyn.Orthogonality.NEVER_ZERO_ODD:
        return 2.0 ** (1 - Q)
    return 2.0 ** (2 - Q)


def run_separable_demo(cfg: dict):
    M, omega0, eps = cfg["M"], cfg["omega0"], cfg["eps"]
    model = SpinModel.free(M, omega0)
    state = all_zero_state(M)
    stats = energy_stats_spin(state, model)
    single = energy_stats_spin(all_zero_state(1), SpinModel.free(1, omega0))
    settings = _solver(cfg, model.max_frequency)
    res = _solve(dyn.spin_survival(state, model), eps, settings)
    T_perp = res.time if res.reached else None
    T0 = qsl_time(stats, eps).bound_time
    sep = separable_bound([(single.mean_energy, single.spread)] * M)
    ratio = T_perp / T0 if T_perp is not None else None
    results = {
        "M": M, "T_perp": T_perp, "T0": T0, "ratio": ratio, "separable_bound": sep,
        "energy": {"E0": stats.ground_energy, "E": stats.mean_energy, "dE": stats.spread},
        "subsystem_energy": {"E": single.mean_energy, "dE": single.spread},
        "solver": res.to_dict(),
    }
    checks = [check("solver-reached", res.reached, res.achieved_value)]
    if eps == 0:
        checks += [
            check("ratio-vs-sqrt(M)", _close(ratio, math.sqrt(M), 1e-6), ratio, math.sqrt(M), 1e-6),
            check("T_perp-vs-pi/(2omega0)", _close(T_perp, math.pi / (2 * omega0), 1e-6, True),
                  T_perp, math.pi / (2 * omega0), 1e-6),
            check("T_perp-respects-separable-bound", T_perp is not None and T_perp >= sep * (1 - 1e-9),
                  T_perp, sep),
        ]
    if cfg.get("curve"):
        _write_curve(cfg["curve"], dyn.spin_survival(state, model), settings, f"separable M={M}")
    return results, checks


def run_topology(cfg: dict):
    topology = build_polygon_topology(cfg["M"], cfg["K"])
    validation = validate_topology(topology)
    results = {"topology": topology.to_dict(), "Q": topology.Q, "validation": validation.to_dict()}
    return results, [check(c.name, c.passed) for c in validation.checks]


COMMANDS = {
    "bound": run_bound,
    "entangled-sweep": run_entangled_sweep,
    "ising": run_ising,
    "separable-demo": run_separable_demo,
    "topology": run_topology,
}


def _write_curve(path, source, settings: dyn.SolverSettings, descriptor: str):
    n = int(math.floor(settings.horizon / settings.grid_step + 1e-9))
    times = [k * settings.grid_step for k in range(n + 1)]
    curve = dyn.SurvivalCurve.sample(source, times, descriptor)
    with open(path, "w", newline="\n") as fh:
        fh.write(curve.to_csv())


def sweep_csv(rows) -> str:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return "%.17g" % v
        return str(v)

    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(fmt(r[c]) for c in SWEEP_COLUMNS) for r in rows]
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[dict]:
    lines = text.strip("\n").split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        raw = dict(zip(header, line.split(",")))
        row = {}
        for k, v in raw.items():
            if k in ("N", "M"):
                row[k] = int(v)
            elif k == "path":
                row[k] = v
            else:
                row[k] = float(v) if v else None
        rows.append(row)
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsl",
        description="Quantum speed limits in composite systems: exact simulation and bounds. " + UNITS,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--config", help="JSON config file; CLI flags take precedence")
    common.add_argument("--eps", type=float, help="target survival probability (default 0)")
    common.add_argument("--horizon", type=float, help="solver horizon (default 8 fastest periods)")
    common.add_argument("--grid-step", dest="grid_step", type=float,
                        help="solver scan step (default fastest period / 512)")
    common.add_argument("--time-tol", dest="time_tol", type=float, help="refinement tolerance")
    common.add_argument("--value-tol", dest="value_tol", type=float, help="zero threshold for eps=0")

    p = sub.add_parser("bound", parents=[common], help="speed-limit bound from energy statistics")
    p.add_argument("--E", type=float, help="mean energy")
    p.add_argument("--dE", type=float, help="energy spread")
    p.add_argument("--E0", type=float, help="ground energy (default 0)")

    p = sub.add_parser("entangled-sweep", parents=[common],
                       help="T_perp/T0 versus level count N for the collective-level state (CSV)")
    p.add_argument("--N-max", dest="N_max", type=int)
    p.add_argument("--M", type=int, help="number of parties")
    p.add_argument("--omega0", type=float)

    p = sub.add_parser("ising", parents=[common], help="K-body coupled qubit polygon from |0...0>")
    p.add_argument("--M", type=int, help="number of qubits")
    p.add_argument("--K", type=int, help="interaction order")
    p.add_argument("--omega0", type=float, help="free frequency (default omega/1000, strong regime)")
    p.add_argument("--omega", type=float, help="interaction frequency")
    p.add_argument("--curve", help="also write the sampled survival curve (CSV t,P)")

    p = sub.add_parser("separable-demo", parents=[common], help="non-interacting qubits from |0...0>")
    p.add_argument("--M", type=int)
    p.add_argument("--omega0", type=float)
    p.add_argument("--curve", help="also write the sampled survival curve (CSV t,P)")

    p = sub.add_parser("topology", parents=[common], help="polygon interaction topology and its validation")
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, overridden by the config file, overridden by explicit flags."""
    cfg = {"command": args.command, **DEFAULTS[args.command]}
    for k in SOLVER_KEYS:
        cfg.setdefault(k, None)
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "out", "command"):
            cfg[k] = v
    return cfg


def render(cfg: dict, results, checks) -> str:
    if cfg["format"] == "csv":
        if cfg["command"] != "entangled-sweep":
            raise QSLError("--format csv is only available for entangled-sweep")
        return sweep_csv(results["rows"])
    payload = {"config": cfg, "results": results, "checks": checks}
    return json.dumps(_finite(payload), indent=2) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        results, checks = COMMANDS[args.command](cfg)
        text = render(cfg, results, checks)
    except (QSLError, ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [c for c in checks if not c["pass"]]
    if failed:
        json.dump({"error": "CheckFailed", "failed": [c["name"] for c in failed]}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
