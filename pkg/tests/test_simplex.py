import itertools

import numpy as np
import pytest

from sdl.errors import Infeasible, InvalidInput, Unbounded
from sdl.rng import make_rng
from sdl.simplex import LpStandardForm, simplex_solve


def test_single_equality():
    # min x s.t. x = 1, x >= 0
    lp = LpStandardForm(c=[1.0], a=[[1.0]], rhs=[1.0])
    res = simplex_solve(lp)
    assert res.x[0] == pytest.approx(1.0, abs=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_maximize_with_slack():
    # min -x s.t. x + s = 5, x, s >= 0  -> x = 5
    lp = LpStandardForm(c=[-1.0, 0.0], a=[[1.0, 1.0]], rhs=[5.0])
    res = simplex_solve(lp)
    assert res.x[0] == pytest.approx(5.0, abs=1e-12)
    assert res.value == pytest.approx(-5.0, abs=1e-12)


def test_negative_rhs_rows_are_flipped():
    lp = LpStandardForm(c=[1.0, 0.0], a=[[-1.0, -1.0]], rhs=[-5.0])
    assert np.all(lp.rhs >= 0)
    res = simplex_solve(lp)
    assert res.value == pytest.approx(0.0, abs=1e-12)


def test_infeasible():
    # x1 + x2 = 1 and x1 + x2 = 3 cannot both hold
    lp = LpStandardForm(c=[0.0, 0.0], a=[[1.0, 1.0], [1.0, 1.0]], rhs=[1.0, 3.0])
    with pytest.raises(Infeasible):
        simplex_solve(lp)


def test_unbounded():
    # min -x1 s.t. x1 - x2 = 0: ray x1 = x2 -> inf
    lp = LpStandardForm(c=[-1.0, 0.0], a=[[1.0, -1.0]], rhs=[0.0])
    with pytest.raises(Unbounded):
        simplex_solve(lp)


def test_redundant_row_is_dropped():
    lp = LpStandardForm(c=[1.0, 1.0], a=[[1.0, 1.0], [2.0, 2.0]], rhs=[1.0, 2.0])
    res = simplex_solve(lp)
    assert res.value == pytest.approx(1.0, abs=1e-10)


def test_warm_start_accepts_feasible_basis():
    lp = LpStandardForm(c=[0.0, 1.0], a=[[1.0, 0.0], [0.0, 1.0]],
                        rhs=[2.0, 3.0])
    res = simplex_solve(lp, initial_basis=np.array([0, 1]))
    assert res.value == pytest.approx(3.0, abs=1e-12)


def test_warm_start_rejects_bad_basis():
    lp = LpStandardForm(c=[0.0, 0.0, 1.0],
                        a=[[1.0, 1.0, 0.0], [1.0, 1.0, 1.0]], rhs=[1.0, 2.0])
    with pytest.raises(InvalidInput):
        simplex_solve(lp, initial_basis=np.array([0, 1]))  # singular basis


def brute_force_value(lp):
    """Enumerate basic solutions of A x = b, x >= 0 and take the best."""
    m, n = lp.a.shape
    best = np.inf
    for cols in itertools.combinations(range(n), m):
        sub = lp.a[:, cols]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        xb = np.linalg.solve(sub, lp.rhs)
        if np.min(xb) < -1e-9:
            continue
        x = np.zeros(n)
        x[list(cols)] = xb
        best = min(best, float(lp.c @ x))
    return best


@pytest.mark.parametrize("seed", range(15))
def test_matches_vertex_enumeration(seed):
    rng = make_rng(700 + seed)
    m, n = 3, 6
    a = rng.standard_normal((m, n))
    x_feas = np.abs(rng.standard_normal(n))
    rhs = a @ x_feas  # feasible by construction
    c = rng.standard_normal(n)
    lp = LpStandardForm(c=c, a=a, rhs=rhs)
    expected = brute_force_value(lp)
    if not np.isfinite(expected):
        return
    try:
        res = simplex_solve(lp)
    except Unbounded:
        # a finite vertex minimum can coexist with an unbounded ray
        return
    assert abs(res.value - expected) <= 1e-9
    assert res.reduced_cost_min >= -1e-9
    assert np.max(np.abs(lp.a @ res.x - lp.rhs)) <= 1e-8


def test_reduced_costs_nonnegative_at_optimum():
    rng = make_rng(720)
    a = rng.standard_normal((2, 5))
    x_feas = np.abs(rng.standard_normal(5))
    lp = LpStandardForm(c=rng.standard_normal(5), a=a, rhs=a @ x_feas)
    try:
        res = simplex_solve(lp)
    except Unbounded:
        return
    assert res.reduced_cost_min >= -1e-9
