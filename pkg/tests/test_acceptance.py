"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete. Every tolerance is pinned here; nothing is deferred to later
calibration.
"""

import json
import time

import pytest

from lprelax import suites
from lprelax.cli import main


def _report(num: int, name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} {name}: {status}" + (f" ({detail})" if detail else ""))
    return ok


def test_criterion_1_extension_exactness():
    t0 = time.monotonic()
    r = suites.suite_extension_exactness(tol=1e-8)
    elapsed = time.monotonic() - t0
    ok = r.ok and elapsed < 1.0
    assert _report(1, "extension_exactness", ok,
                   f"max_err={max(r.summary['max_errors'].values()):.2e}, "
                   f"{elapsed:.2f}s")


def test_criterion_2_k4_epsilon_exponent():
    t0 = time.monotonic()
    r = suites.suite_k4_exponent(p=1.5, slope_tol=0.10, oracle_tol=1e-10)
    elapsed = time.monotonic() - t0
    ok = r.ok and elapsed < 1.0
    assert _report(2, "k4_epsilon_exponent", ok,
                   f"slope={r.summary['slope']:.3f}, "
                   f"oracle_gap={r.summary['max_oracle_gap']:.1e}, "
                   f"{elapsed:.2f}s")


def test_criterion_3_gamma_hitting_sandwich():
    r = suites.suite_gamma_hitting(count=20, n_max=40, hand_tol=1e-9)
    violations = sum(rep.violations for rep in r.reports)
    assert _report(3, "gamma_hitting_sandwich", r.ok,
                   f"{r.summary['graphs_checked']} graphs, "
                   f"{violations} violations")


def test_criterion_4_p2_tau_bounds():
    t0 = time.monotonic()
    r = suites.suite_p2_bounds(n=16, epsilon=0.5, trials=500, seed=401)
    elapsed = time.monotonic() - t0
    ok = r.ok and elapsed < 30.0
    assert _report(4, "p2_tau_bounds", ok,
                   f"mean={r.summary['mean']:.0f} in "
                   f"[{r.summary['lower']:.0f}, {r.summary['upper']:.0f}], "
                   f"{elapsed:.1f}s")


def test_criterion_5_scaling_trend():
    t0 = time.monotonic()
    r = suites.suite_scaling(sizes=(8, 16, 32), epsilon=0.25, trials=200,
                             seed=501, slope_range=(2.5, 3.5))
    elapsed = time.monotonic() - t0
    ok = r.ok and elapsed < 120.0
    assert _report(5, "scaling_trend", ok,
                   f"slope={r.summary['slope']:.2f}, {elapsed:.1f}s")


def test_criterion_6_dynamics_invariants():
    r = suites.suite_dynamics_invariants(instances=50,
                                         p_values=(1.5, 2.0, 3.0, 4.0))
    bad = [rep.name for rep in r.reports if not rep.ok]
    assert _report(6, "dynamics_invariants", r.ok,
                   f"{r.summary['total_steps']} steps"
                   + (f", failing: {bad}" if bad else ""))


def test_criterion_7_double_cover_equivalence():
    r = suites.suite_double_cover(count=20, stages=50, epsilon=0.05,
                                  discrepancy_tol=1e-10)
    disc = max(rep.worst_margin for rep in r.reports)
    assert _report(7, "double_cover_equivalence", r.ok,
                   f"20 instances, 50 stages")


def test_criterion_8_inequality_suites():
    results = {
        "poincare": suites.suite_poincare(count=500),
        "pythagoras_p2": suites.suite_pythagoras_p2(count=500),
        "essential_p_lt2": suites.suite_essential_p_lt2(count=500),
        "kernel_inequalities": suites.suite_kernel_inequalities(),
        "norm_decrease": suites.suite_norm_decrease(),
        "energy_decrease": suites.suite_energy_decrease(),
    }
    bad = [name for name, r in results.items() if not r.ok]
    ok = not bad
    assert _report(8, "inequality_suites", ok,
                   "all zero-violation" if ok else f"failing: {bad}")


def test_criterion_9_determinism(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert main(["gen", "--kind", "path", "--n", "8", "--boundary", "0",
                 "--out", str(g)]) == 0
    f0 = tmp_path / "f0.txt"
    f0.write_text("".join(f"{v} {1.0 if v else 0.0}\n" for v in range(8)))
    blobs = []
    for name, workers in (("r1", "1"), ("r2", "1"), ("r3", "2"), ("r4", "3")):
        code = main(["tau", "--graph", str(g), "--boundary", str(f0),
                     "--p", "2", "--eps", "0.25", "--trials", "60",
                     "--seed", "2024", "--max-steps", "100000",
                     "--workers", workers, "--out", str(tmp_path / name)])
        assert code == 0
        blobs.append(((tmp_path / f"{name}.json").read_bytes(),
                      (tmp_path / f"{name}.csv").read_bytes()))
    capsys.readouterr()
    ok = all(b == blobs[0] for b in blobs)
    assert _report(9, "tau_determinism", ok,
                   "byte-identical across reruns and worker counts")
