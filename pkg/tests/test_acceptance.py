"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest -v -s tests/test_acceptance.py``).

Tolerances and instance sizes are fixed here and are not meant to be
tuned: they define the bar the implementation has to clear.
"""

import math
import time

import numpy as np
import pytest

from sdl.geometry import (Objective, TrsModel, exp_map, normalize_sphere,
                          objective_value, parallel_translate, project_tangent,
                          random_sphere_point, riem_grad, riem_hess_operator)
from sdl.model import sample_bg, sample_conditioned_dictionary, sample_fixed_k
from sdl.model import sample_orthogonal_dictionary
from sdl.phase import ExperimentConfig, run_phase_sweep, sweep_csv_lines
from sdl.pipeline import precondition, recover_all
from sdl.rng import make_rng
from sdl.rounding import lp_round
from sdl.trm import (SolveStatus, SubproblemKind, TrmOptions,
                     quadratic_rate_probe, re_metric, trm_solve)
from sdl.trs import solve_trs_exact, trs_brute_oracle

MU = 1e-2


def p_rule(n: int) -> int:
    return int(math.ceil(5 * n * n * math.log(n)))


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_derivative_correctness():
    """Riemannian gradient/Hessian model vs central differences of f o exp."""
    t0 = time.perf_counter()
    h = 2e-4
    worst = 0.0
    for case in range(20):
        rng = make_rng(3000 + case)
        obj = Objective(sample_bg(8, 40, 0.3, rng), MU)
        q = random_sphere_point(8, rng)
        grad = riem_grad(obj, q)
        hess = riem_hess_operator(obj, q)
        for _ in range(5):
            delta = project_tangent(q, rng.standard_normal(8))
            delta /= np.linalg.norm(delta)

            def phi(t):
                return objective_value(obj, exp_map(q, t * delta))

            # Richardson-extrapolated central differences (O(h^4) truncation)
            def d1(s):
                return (phi(s) - phi(-s)) / (2 * s)

            f0 = phi(0.0)

            def d2(s):
                return (phi(s) - 2 * f0 + phi(-s)) / (s * s)

            fd1 = (4 * d1(h / 2) - d1(h)) / 3
            fd2 = (4 * d2(h / 2) - d2(h)) / 3
            e1 = float(grad @ delta)
            e2 = float(delta @ hess(delta))
            worst = max(worst,
                        abs(fd1 - e1) / max(abs(e1), 1e-12),
                        abs(fd2 - e2) / max(abs(e2), 1e-12))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5.0
    report("criterion 1 (derivatives)",
           ok, f"worst rel err {worst:.2e} (tol 1e-5), {elapsed:.1f}s (< 5s)")


def test_criterion_02_trs_exactness():
    """Exact TRS vs polar-grid oracle + KKT residuals on 50 models."""
    t0 = time.perf_counter()
    rng = make_rng(4000)
    worst_gap = worst_kkt = 0.0
    for i in range(50):
        dim = 2 if i % 2 == 0 else 3
        if i % 5 == 4:  # forced hard case: b orthogonal to bottom eigenvector
            qm, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            lam = np.sort(rng.uniform(-2.0, 2.0, dim))
            lam[0] = -abs(lam[0]) - 0.5
            hmat = (qm * lam) @ qm.T
            b = qm[:, 1:] @ rng.standard_normal(dim - 1) * 0.05
        else:
            g = rng.standard_normal((dim, dim))
            hmat = 0.5 * (g + g.T)
            b = rng.standard_normal(dim)
        model = TrsModel(b=b, h=hmat, basis=None,
                         radius=float(rng.uniform(0.3, 1.5)))
        sol = solve_trs_exact(model)
        val = float(b @ sol.xi + 0.5 * sol.xi @ hmat @ sol.xi)
        _, oracle_val = trs_brute_oracle(model, 1e-3)
        worst_gap = max(worst_gap, val - oracle_val)
        stationarity = np.linalg.norm(
            (hmat + sol.lam * np.eye(dim)) @ sol.xi + b)
        lam_min = np.linalg.eigvalsh(hmat + sol.lam * np.eye(dim))[0]
        comp = abs(sol.lam * (model.radius - np.linalg.norm(sol.xi)))
        scale = max(1.0, float(np.linalg.norm(b)), float(np.linalg.norm(hmat)))
        worst_kkt = max(worst_kkt, stationarity / scale,
                        max(0.0, -lam_min) / scale, comp / scale)
    elapsed = time.perf_counter() - t0
    ok = worst_gap <= 1e-4 and worst_kkt <= 1e-8 and elapsed < 30.0
    report("criterion 2 (TRS exactness)", ok,
           f"worst oracle gap {worst_gap:.2e} (tol 1e-4), "
           f"worst KKT {worst_kkt:.2e} (tol 1e-8), {elapsed:.1f}s (< 30s)")


def test_criterion_03_manifold_invariants():
    """exp map chord identity; parallel translation isometric and tangent."""
    rng = make_rng(5000)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 12))
        q = random_sphere_point(n, rng)
        delta = project_tangent(q, rng.standard_normal(n))
        v = project_tangent(q, rng.standard_normal(n))
        tau = float(rng.uniform(0.05, 1.5))
        out = exp_map(q, delta)
        worst = max(worst, abs(np.linalg.norm(out) - 1.0))
        chord = np.linalg.norm(out - q)
        worst = max(worst, abs(chord - 2 * np.sin(np.linalg.norm(delta) / 2)))
        if np.linalg.norm(delta) > 0:
            moved = parallel_translate(q, delta, tau, v)
            worst = max(worst, abs(np.linalg.norm(moved) - np.linalg.norm(v)))
            gamma = exp_map(q, tau * delta)
            worst = max(worst, abs(float(gamma @ moved)))
    ok = worst <= 1e-12
    report("criterion 3 (manifold invariants)", ok,
           f"worst violation {worst:.2e} (tol 1e-12), 100 triples")


def test_criterion_04_single_vector_recovery():
    """n=20, k=4, p=ceil(5 n^2 log n): RE <= mu in >= 4/5 seeded trials."""
    t0 = time.perf_counter()
    n, k = 20, 4
    p = p_rule(n)
    hits = 0
    for trial in range(5):
        x0 = sample_fixed_k(n, p, k, make_rng(1000 + trial))
        rep = trm_solve(Objective(x0, MU), TrmOptions(seed=trial))
        hits += re_metric(rep.q_final) <= MU
    elapsed = time.perf_counter() - t0
    ok = hits >= 4 and elapsed < 120.0
    report("criterion 4 (single-vector recovery)", ok,
           f"{hits}/5 trials with RE <= {MU}, {elapsed:.0f}s (< 120s)")


def test_criterion_05_phase_monotonicity():
    """n=15: success rate nonincreasing in k over {2,3,5,8,12}; 5/5 at k=3."""
    t0 = time.perf_counter()
    cfg = ExperimentConfig(n_values=[15], col_values=[2, 3, 5, 8, 12],
                           col_kind="k", trials=5, base_seed=2026)
    grid, _ = run_phase_sweep(cfg)
    counts = [int(c) for c in grid.successes[0]]
    monotone = all(a >= b for a, b in zip(counts, counts[1:]))
    elapsed = time.perf_counter() - t0
    ok = monotone and counts[1] == 5 and elapsed < 600.0
    report("criterion 5 (phase monotonicity)", ok,
           f"success counts {counts} over k=2,3,5,8,12, "
           f"{elapsed:.0f}s (< 600s)")


def test_criterion_06_lp_rounding_theorem():
    """theta=0.25, n=10, p=4000: r with <r,e_n> >= 0.996 recovers e_n."""
    t0 = time.perf_counter()
    n, p, theta = 10, 4000, 0.25
    hits = 0
    for trial in range(20):
        rng = make_rng(10_000 + trial)
        y = sample_bg(n, p, theta, rng)
        e_n = np.eye(n)[-1]
        tangent = project_tangent(e_n, rng.standard_normal(n))
        r = normalize_sphere(e_n + 0.05 * tangent / np.linalg.norm(tangent))
        assert float(r @ e_n) >= 0.996
        res = lp_round(y, r)
        err = min(np.linalg.norm(res.q - e_n), np.linalg.norm(res.q + e_n))
        hits += err <= 1e-8
    elapsed = time.perf_counter() - t0
    ok = hits >= 19 and elapsed < 300.0
    report("criterion 6 (LP rounding)", ok,
           f"{hits}/20 exact recoveries, {elapsed:.0f}s (< 300s)")


def test_criterion_07_end_to_end_recovery():
    """n=10, theta=0.25: full pipeline recovers (X0, A0) to 1e-6 row error."""
    t0 = time.perf_counter()
    n, theta = 10, 0.25
    p = p_rule(n)
    hits = 0
    for seed in range(5):
        x0 = sample_bg(n, p, theta, make_rng(20_000 + seed))
        result = recover_all(x0, MU, TrmOptions(seed=seed), x_true=x0)
        hits += result.match.max_rel_err <= 1e-6
    elapsed = time.perf_counter() - t0
    ok = hits >= 4 and elapsed < 300.0
    report("criterion 7 (end-to-end recovery)", ok,
           f"{hits}/5 seeds with max rel row err <= 1e-6, {elapsed:.0f}s (< 300s)")


def test_criterion_08_preconditioner_identity():
    """Ybar Ybar^T = p*theta*I to 1e-8 relative for kappa in {1, 3, 10}."""
    n, p, theta = 10, 2000, 0.25
    worst = 0.0
    for i, kappa in enumerate((1.0, 3.0, 10.0)):
        rng = make_rng(30_000 + i)
        a0 = sample_conditioned_dictionary(n, kappa, rng)
        y = a0 @ sample_bg(n, p, theta, rng)
        ybar = precondition(y, theta)
        target = p * theta
        worst = max(worst, float(
            np.max(np.abs(ybar @ ybar.T - target * np.eye(n)))) / target)
    ok = worst <= 1e-8
    report("criterion 8 (preconditioner)", ok,
           f"worst Gram deviation {worst:.2e} (tol 1e-8 relative)")


def test_criterion_09_quadratic_local_convergence():
    """Converged exact-TRS run: trailing interior log-grad ratios >= 1.5."""
    n = 10
    p = p_rule(n)
    x0 = sample_bg(n, p, 0.25, make_rng(57))
    rep = trm_solve(Objective(x0, MU),
                    TrmOptions(seed=42, subproblem=SubproblemKind.EXACT))
    ratios = quadratic_rate_probe(rep)
    ok = (rep.status is SolveStatus.GRAD_TOLERANCE_MET and len(ratios) >= 2
          and all(r >= 1.5 for r in ratios[-2:]))
    report("criterion 9 (quadratic convergence)", ok,
           f"status {rep.status.value}, tail ratios "
           f"{[f'{r:.2f}' for r in ratios]} (need final 2 >= 1.5)")


def test_criterion_10_equivariance():
    """Identical-seed solves on X0 and A0 X0 give A0-related iterates."""
    n = 8
    p = p_rule(n)
    rng = make_rng(40_000)
    x0 = sample_bg(n, p, 0.3, rng)
    a0 = sample_orthogonal_dictionary(n, rng)
    q0 = random_sphere_point(n, rng)
    opts = TrmOptions(seed=0, max_iters=30, grad_tol=1e-300)
    rep1 = trm_solve(Objective(x0, MU), opts, q0=q0)
    rep2 = trm_solve(Objective(a0 @ x0, MU), opts, q0=a0 @ q0)
    same_len = len(rep1.qs) == len(rep2.qs)
    worst = max(np.linalg.norm(a0 @ qa - qb)
                for qa, qb in zip(rep1.qs, rep2.qs)) if same_len else np.inf
    ok = same_len and worst <= 1e-8
    report("criterion 10 (equivariance)", ok,
           f"{len(rep1.qs)} iterates, worst deviation {worst:.2e} (tol 1e-8)")


def test_criterion_11_sweep_reproducibility():
    """Same config twice: byte-identical CSV bodies."""
    def run_once():
        cfg = ExperimentConfig(n_values=[6, 8], col_values=[1, 2],
                               col_kind="k", trials=2, base_seed=99)
        _, results = run_phase_sweep(cfg)
        return "\n".join(sweep_csv_lines(results, include_timestamp=False))

    body1 = run_once()
    body2 = run_once()
    ok = body1 == body2
    report("criterion 11 (reproducibility)", ok,
           f"CSV bodies identical: {body1 == body2} ({len(body1)} bytes)")
