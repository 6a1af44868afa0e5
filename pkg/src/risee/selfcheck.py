"""Built-in invariant and oracle checks behind the `check` CLI subcommand.

Desk-scale configuration (N=16, K=2, N_R=2) so the whole battery runs in
seconds; the pytest suite covers the same ground at the full tolerances.
"""

from __future__ import annotations

import math

import numpy as np

from .algorithms import (MethodConfig, algorithm_one, algorithm_two,
                         baseline_uniform_random)
from .kernels import (SolverOptions, dinkelbach, box_projected_ascent,
                      max_linear_minus_quadratic_ball, project_psd_trace_ball)
from .metrics import mmse_filters, sinr_all, sr_mmse, sr_mmse_determinant
from .scenario import desk_scenario, generate_drop, total_static_power
from .surrogates import (PowerSurrogateGEE, gamma_quadratic_model,
                         gamma_surrogate_coeffs, ratio_log_bound)

LN2 = math.log(2.0)


def _check_kernels():
    g = max_linear_minus_quadratic_ball(np.array([2.0, 0.0], complex), np.zeros((2, 2)), 1.0)
    ok = np.allclose(g, [1.0, 0.0], atol=1e-9)

    X = project_psd_trace_ball(np.diag([3.0, -1.0]).astype(complex), 2.0)
    ok &= np.allclose(X, np.diag([2.0, 0.0]), atol=1e-10)

    def num(p):
        return math.log1p(p[0]) / LN2

    def den(p):
        return p[0] + 1.0

    def solve(lam, x):
        def fg(q):
            return num(q) - lam * den(q), np.array([1.0 / ((1.0 + q[0]) * LN2) - lam])
        out, _ = box_projected_ascent(fg, [0.0], [10.0], x, SolverOptions())
        return out

    p, lam, _ = dinkelbach(num, den, solve, np.array([0.0]))
    ok &= abs(p[0] - (math.e - 1.0)) < 1e-4
    return bool(ok), f"ball/projection/dinkelbach hand cases (p*={p[0]:.6f})"


def _check_bound_and_surrogate():
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(2000):
        x, y, xb, yb = np.exp(rng.uniform(-4, 4, size=4))
        ok &= ratio_log_bound(x, y, xb, yb) <= math.log1p(x / y) / LN2 + 1e-12

    sc = desk_scenario()
    channels = generate_drop(sc, 3)
    p = total_static_power(sc).Pmax_w
    gamma = np.full(sc.N, math.sqrt(sc.P_R), complex)
    C = mmse_filters(gamma, p, channels)
    coeffs = gamma_surrogate_coeffs(gamma, p, C, channels)
    const, b, Q = gamma_quadratic_model(coeffs, p)
    at_bar = const + np.real(np.vdot(b, gamma)) - np.real(np.vdot(gamma, Q @ gamma))
    truth = float(np.sum(np.log1p(sinr_all(gamma, p, C, channels))) / LN2)
    ok &= abs(at_bar - truth) <= 1e-9 * max(1.0, abs(truth))
    return bool(ok), "ratio bound minorization + gamma surrogate tightness"


def _check_identity():
    sc = desk_scenario()
    ok = True
    for seed in range(5):
        channels = generate_drop(sc, seed)
        rng = np.random.default_rng(seed)
        gamma = rng.standard_normal(sc.N) + 1j * rng.standard_normal(sc.N)
        p = rng.uniform(0.1, 1.0, sc.K)
        a = sr_mmse(gamma, p, channels)
        b = sr_mmse_determinant(gamma, p, channels)
        ok &= abs(a - b) <= 1e-8 * max(1.0, abs(a))
    return bool(ok), "determinant identity for the MMSE-embedded sum rate"


def _check_convergence():
    sc = desk_scenario()
    pm = total_static_power(sc)
    opts = SolverOptions(outer_max_iter=30)
    ok = True
    worst = 0.0
    for seed in range(3):
        channels = generate_drop(sc, seed)
        for algo in (algorithm_one, algorithm_two):
            alloc, trace = algo(channels, pm, sc.P_R, MethodConfig(objective="gee"),
                                opts, sc.bandwidth_hz)
            seq = np.asarray(trace.objective_per_iteration)
            dips = np.diff(seq)
            worst = min(worst, float(dips.min()) if len(dips) else 0.0)
            ok &= np.all(dips >= -1e-9 * np.maximum(1.0, np.abs(seq[:-1])))
            base = baseline_uniform_random(channels, pm, sc.P_R, seed, sc.bandwidth_hz)
            ok &= alloc.gee_bits_per_joule >= base.gee_bits_per_joule
    return bool(ok), f"monotone convergence + baseline dominance (worst dip {worst:.2e})"


CHECKS = [
    ("kernels", _check_kernels),
    ("surrogates", _check_bound_and_surrogate),
    ("identity", _check_identity),
    ("convergence", _check_convergence),
]


def run_selfcheck(report=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:     # a crash is a failure, not an abort
            ok, detail = False, f"raised {exc!r}"
        all_ok &= ok
        report(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
