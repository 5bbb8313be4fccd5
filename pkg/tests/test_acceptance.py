"""End-to-end acceptance criteria.

Each test checks one criterion at its stated tolerance and records a single
PASS/FAIL line, printed in the terminal summary.
"""

import dataclasses
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, crandn
from convridge.amp import (
    amp_ridge,
    se_iterate,
    se_ridge_fixed_point,
    solve_alpha,
)
from convridge.dft import transfer_of_kernel
from convridge.harness import is_high_variance, preset, run_sweep
from convridge.signal_model import AR1, ConstantDensity, ModelConfig, sample_kernel
from convridge.solvers import ridge_freq, ridge_time_oracle
from convridge.theory import pointwise_mse, predict_mse

pytestmark = pytest.mark.slow

DESK_DELTAS = (0.25, 0.5, 0.8, 1.25, 2.0, 4.0)
DESK_LAMBDAS = (1e-3, 1e-1, 1.0)


def record(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b))


@pytest.fixture(scope="module")
def desk_sweep():
    spec = preset("desk", seed=2024, deltas=DESK_DELTAS, lambdas=DESK_LAMBDAS)
    t0 = time.perf_counter()
    rows = run_sweep(spec)
    return rows, time.perf_counter() - t0


def test_c1_solver_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(25):
        n_x, n_y = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        T = int(rng.integers(1, 17))
        k = int(rng.integers(1, T + 1))
        lam = float(rng.choice([0.0, 0.1, 1.0]))
        K, Y = crandn(rng, n_y, n_x, k), crandn(rng, n_y, T)
        fast = ridge_freq(transfer_of_kernel(K, T), Y, lam).X_hat
        worst = max(worst, rel(fast, ridge_time_oracle(K, Y, lam)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 5.0
    assert record(1, "solver_oracle_equivalence", ok,
                  f"max rel err {worst:.2e} (tol 1e-8), {elapsed:.2f} s (limit 5 s)")


def test_c2_amp_correctness():
    rng = np.random.default_rng(202)
    n_y, n_x, lam = 300, 200, 0.5
    delta = n_y / n_x
    sol = solve_alpha(lam, delta)
    t0 = time.perf_counter()
    worst, worst_iters, worst_unstable, all_ok = 0.0, 0, 0, True
    for _ in range(10):
        A = crandn(rng, n_y, n_x) / math.sqrt(n_y)
        y = A @ crandn(rng, n_x) + 0.1 * crandn(rng, n_y)
        closed = np.linalg.solve(A.conj().T @ A + lam * np.eye(n_x), A.conj().T @ y)
        small = amp_ridge(A, y, sol.alpha_small, delta=delta, t_max=2000)
        large = amp_ridge(A, y, sol.alpha_large, delta=delta, t_max=200)
        err = rel(small.x, closed)
        worst = max(worst, err)
        worst_iters = max(worst_iters, small.iterations)
        worst_unstable = max(worst_unstable, large.iterations)
        all_ok &= small.converged and err <= 1e-6 and large.diverged
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 30.0
    assert record(2, "amp_correctness", ok,
                  f"small root max rel err {worst:.2e} in <= {worst_iters} iterations (tol 1e-6, "
                  f"2000); large root unstable after <= {worst_unstable} iterations (limit 200); "
                  f"{elapsed:.1f} s (limit 30 s)")


def test_c3_state_evolution_consistency():
    worst_fp, worst_ratio = 0.0, 0.0
    sigma2, sx2 = 0.1, 1.0
    for lam in np.geomspace(1e-3, 10, 10):
        for delta in np.geomspace(0.2, 5, 10):
            a = solve_alpha(lam, delta).alpha_small
            tr = se_iterate(a, delta, sigma2, sx2, tau0_2=0.0)
            star = se_ridge_fixed_point(a, delta, sigma2, sx2)
            worst_fp = max(worst_fp, abs(tr.tau2_fixed - star) / star)
            err = np.abs(np.array(tr.taus2) - star)
            use = err > 1e-9 * star
            if use.sum() >= 3:
                slope = np.polyfit(np.flatnonzero(use), np.log(err[use]), 1)[0]
                worst_ratio = max(worst_ratio, abs(math.exp(slope) - a * a / delta))
    ok = worst_fp <= 1e-10 and worst_ratio <= 1e-6
    assert record(3, "state_evolution_consistency", ok,
                  f"max rel gap limit vs fixed point {worst_fp:.2e} (tol 1e-10); "
                  f"max contraction ratio error {worst_ratio:.2e} (tol 1e-6)")


def test_c4_iid_collapse():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(20):
        lam = float(10 ** rng.uniform(-3, 1))
        delta = float(10 ** rng.uniform(-0.7, 0.7))
        sigma2 = float(rng.uniform(0, 2))
        sx2 = float(rng.uniform(1e-3, 2))
        # scalar risk from scratch: quadratic root, fixed point, risk
        b = 1 + delta + delta * lam
        a = 2 * delta / (b + math.sqrt(b * b - 4 * delta))
        tau2 = (sigma2 + (1 - a) ** 2 * sx2 / delta) / (1 - a * a / delta)
        scalar = (a - 1) ** 2 * sx2 + a * a * tau2
        got = predict_mse(lam, delta, sigma2, ConstantDensity(sx2)).mse
        worst = max(worst, abs(got - scalar) / scalar)
    ok = worst <= 1e-12
    assert record(4, "iid_collapse", ok, f"max rel err {worst:.2e} (tol 1e-12)")


def _tolerance(row):
    if row.lam == 1e-3:
        return 0.15 if row.high_variance else 0.08
    return 0.05


def test_c5_theory_vs_simulation(desk_sweep):
    rows, elapsed = desk_sweep
    failures, worst = [], 0.0
    for r in rows:
        err = abs(r.nmse_emp_mean - r.nmse_theory) / r.nmse_theory
        worst = max(worst, err / _tolerance(r))
        if err > _tolerance(r) or r.failed_trials:
            failures.append(f"delta={r.delta:g} lambda={r.lam:g} err={err:.3f}")
    ok = not failures and elapsed < 600
    detail = (f"{len(rows)} rows, worst err / tolerance = {worst:.2f}, sweep {elapsed:.0f} s "
              f"(limit 600 s)")
    if failures:
        detail += "; failing rows: " + ", ".join(failures)
    assert record(5, "theory_vs_simulation", ok, detail)


def test_c5_alternative_tau2_separation(desk_sweep):
    # the (1 - alpha^2) variant of tau^2 must miss the simulation at (1, 0.5) by more than 20%
    rows, _ = desk_sweep
    row = next(r for r in rows if r.lam == 1.0 and r.delta == 0.5)
    spec = preset("desk")
    cfg = spec.config_for(0.5)
    sx2 = spec.process.var
    a = solve_alpha(1.0, cfg.delta).alpha_small
    alt = pointwise_mse(a, cfg.delta, cfg.sigma2, sx2, "one_minus_alpha_sq") / sx2
    right = pointwise_mse(a, cfg.delta, cfg.sigma2, sx2) / sx2
    miss = abs(row.nmse_emp_mean - alt) / alt
    ok = miss > 0.20
    assert record(5, "alternative_tau2_rejected", ok,
                  f"alternative theory {alt:.5f}, implemented theory {right:.5f}, simulated "
                  f"{row.nmse_emp_mean:.5f}; alternative misses by {miss:.3%} (required > 20%)")


def test_c6_process_universality():
    out = {}
    for kind in ("gaussian", "rademacher"):
        spec = preset("desk", seed=606, trials=20, deltas=DESK_DELTAS, lambdas=DESK_LAMBDAS)
        spec = dataclasses.replace(spec, base=spec.base.replace(sigma2=0.1),
                                   process=AR1(0.9, 0.1, kind))
        out[kind] = run_sweep(spec)
    worst, failures = 0.0, []
    for g, r in zip(out["gaussian"], out["rademacher"]):
        assert (g.delta, g.lam) == (r.delta, r.lam)
        diff = abs(g.nmse_emp_mean - r.nmse_emp_mean) / g.nmse_emp_mean
        worst = max(worst, diff)
        if diff > 0.03:
            failures.append(f"delta={g.delta:g} lambda={g.lam:g} diff={diff:.3f}")
    ok = not failures
    detail = f"{len(out['gaussian'])} rows, max rel diff {worst:.3%} (tol 3%)"
    if failures:
        detail += "; failing rows: " + ", ".join(failures)
    assert record(6, "process_universality", ok, detail)


def test_c7_kernel_spectrum_statistics():
    rng = np.random.default_rng(707)
    n_y, n_x, T = 500, 16, 128
    parts, ok = [], True
    for k in (T // 4, T):
        cfg = ModelConfig(n_x=n_x, n_y=n_y, T=T, k=k)
        H = transfer_of_kernel(sample_kernel(cfg, rng), T).slices
        assert H.size >= 10**6
        var = float(np.mean(np.abs(H) ** 2))
        relation = float(abs(np.mean(H * H)))
        var_err = abs(var - cfg.sigmaK2 / n_y) / (cfg.sigmaK2 / n_y)
        ok &= var_err <= 0.05 and relation <= 0.05 * var
        parts.append(f"k={k}: variance err {var_err:.3%}, relation/variance {relation / var:.3%}")
    assert record(7, "kernel_spectrum_statistics", ok, "; ".join(parts) + " (tol 5%)")


def test_c8_double_descent_peak():
    spec = preset("desk", seed=808, deltas=(0.5, 1.0, 2.0), lambdas=(1e-4,))
    rows = {r.delta: r.nmse_emp_mean for r in run_sweep(spec, with_theory=False)}
    ok = rows[1.0] > rows[0.5] and rows[1.0] > rows[2.0]
    assert record(8, "double_descent_peak", ok,
                  f"NMSE at delta=0.5/1/2: {rows[0.5]:.4g} / {rows[1.0]:.4g} / {rows[2.0]:.4g}")


def test_c9_cli_determinism(tmp_path):
    outputs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        cmd = [sys.executable, "-m", "convridge.cli", "sweep", "--seed", "42", "--trials", "2",
               "--out", str(out)]
        subprocess.run(cmd, check=True, capture_output=True)
        lines = (out / "sweep.csv").read_text().splitlines()
        outputs.append([
            line if line.startswith("#") else ",".join(line.split(",")[:-1]) for line in lines
        ])
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 1
    assert record(9, "cli_determinism", ok,
                  f"{len(outputs[0]) - 1} data lines identical modulo runtime_ms: {ok}")


def test_high_variance_tagging_matches_rows(desk_sweep):
    rows, _ = desk_sweep
    assert all(r.high_variance == is_high_variance(r.delta, r.lam) for r in rows)
