import math

import numpy as np
import pytest

from sdl.geometry import Objective, Region, random_sphere_point
from sdl.model import sample_bg, sample_orthogonal_dictionary
from sdl.rng import make_rng
from sdl.trm import (SolveStatus, SubproblemKind, TrmMode, TrmOptions,
                     quadratic_rate_probe, re_metric, trm_solve)

MU = 1e-2


def bg_objective(seed, n=10, theta=0.25):
    p = int(math.ceil(5 * n * n * math.log(n)))
    return Objective(sample_bg(n, p, theta, make_rng(seed)), MU)


def test_known_minimizer_instance():
    # all rows dense except the first: the sparsest direction is exactly e1
    rng = make_rng(50)
    x0 = rng.standard_normal((6, 500))
    x0[0, :] = 0.0
    rep = trm_solve(Objective(x0, MU), TrmOptions(seed=9))
    e1 = np.eye(6)[0]
    err = min(np.linalg.norm(rep.q_final - e1), np.linalg.norm(rep.q_final + e1))
    assert err <= MU
    assert re_metric(rep.q_final) <= MU


def test_immediate_return_at_minimizer():
    obj = bg_objective(51)
    first = trm_solve(obj, TrmOptions(seed=1))
    assert first.status is SolveStatus.GRAD_TOLERANCE_MET
    again = trm_solve(obj, TrmOptions(seed=1), q0=first.q_final)
    assert again.status is SolveStatus.GRAD_TOLERANCE_MET
    assert again.num_iters <= 1


def test_scale_recovery_bg_instance():
    obj = bg_objective(52)
    rep = trm_solve(obj, TrmOptions(seed=3))
    assert re_metric(rep.q_final) <= MU


@pytest.mark.parametrize("sub", [SubproblemKind.TCG, SubproblemKind.EXACT])
def test_saddle_escape_within_three_iterations(sub):
    obj = Objective(np.eye(3), MU)
    q0 = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    rep = trm_solve(obj, TrmOptions(seed=5, subproblem=sub), q0=q0)
    moved = [i for i, q in enumerate(rep.qs) if np.linalg.norm(q - q0) > 1e-8]
    assert moved and moved[0] <= 3
    assert rep.status is SolveStatus.GRAD_TOLERANCE_MET
    assert re_metric(rep.q_final) <= 1e-8


def test_fixed_step_exact_monotone():
    obj = bg_objective(53, n=8)
    opts = TrmOptions(mode=TrmMode.FIXED_STEP, subproblem=SubproblemKind.EXACT,
                      delta0=0.05, seed=2, max_iters=200)
    rep = trm_solve(obj, opts)
    f_vals = [r.f_value for r in rep.iterates]
    assert all(b <= a + 1e-15 for a, b in zip(f_vals, f_vals[1:]))


def test_all_iterates_unit_norm():
    obj = bg_objective(54, n=8)
    rep = trm_solve(obj, TrmOptions(seed=4))
    for q in rep.qs:
        assert abs(np.linalg.norm(q) - 1.0) <= 1e-12


def test_equivariance_under_rotation():
    n = 8
    p = int(math.ceil(5 * n * n * math.log(n)))
    rng = make_rng(55)
    x0 = sample_bg(n, p, 0.3, rng)
    a0 = sample_orthogonal_dictionary(n, rng)
    q0 = random_sphere_point(n, rng)
    opts = TrmOptions(seed=0, max_iters=15, grad_tol=1e-300)
    rep1 = trm_solve(Objective(x0, MU), opts, q0=q0)
    rep2 = trm_solve(Objective(a0 @ x0, MU), opts, q0=a0 @ q0)
    assert len(rep1.qs) == len(rep2.qs)
    for qa, qb in zip(rep1.qs, rep2.qs):
        assert np.linalg.norm(a0 @ qa - qb) <= 1e-8


def test_re_metric_examples():
    assert re_metric(np.array([0.0, 0.0, 1.0])) == 0.0
    assert re_metric(np.array([-1.0, 0.0])) == 0.0
    val = re_metric(np.array([1.0, 1.0]) / np.sqrt(2))
    assert val == pytest.approx(np.sqrt(2 - np.sqrt(2)), rel=1e-12)
    rng = make_rng(56)
    for _ in range(10):
        assert 0.0 <= re_metric(random_sphere_point(7, rng)) <= np.sqrt(2)


def test_rate_probe_converged_run():
    obj = bg_objective(57)
    rep = trm_solve(obj, TrmOptions(seed=42, subproblem=SubproblemKind.EXACT))
    assert rep.status is SolveStatus.GRAD_TOLERANCE_MET
    ratios = quadratic_rate_probe(rep)
    assert len(ratios) >= 2
    assert all(r >= 1.5 for r in ratios[-2:])


def test_rate_probe_empty_for_unconverged_run():
    obj = bg_objective(58)
    rep = trm_solve(obj, TrmOptions(seed=1, max_iters=3, grad_tol=1e-300))
    assert rep.status is SolveStatus.MAX_ITERS
    assert quadratic_rate_probe(rep) == []


def test_rate_probe_uses_only_interior_convex_tail():
    obj = bg_objective(59)
    rep = trm_solve(obj, TrmOptions(seed=7, subproblem=SubproblemKind.EXACT))
    ratios = quadratic_rate_probe(rep)
    tail_len = len(ratios) + 1
    tail = rep.iterates[-tail_len:-1]
    for rec in tail:
        assert rec.region is Region.R_I and not rec.on_boundary and rec.accepted


def test_options_validation():
    from sdl.errors import InvalidInput
    with pytest.raises(InvalidInput):
        trm_solve(bg_objective(60, n=4), TrmOptions(accept_threshold=0.5))
    with pytest.raises(InvalidInput):
        trm_solve(bg_objective(61, n=4), TrmOptions(delta0=2.0, delta_max=1.0))
