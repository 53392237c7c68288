import numpy as np
import pytest

from sdl.errors import InvalidInput
from sdl.geometry import normalize_sphere, project_tangent
from sdl.model import sample_bg
from sdl.rng import make_rng
from sdl.rounding import (CONFIDENCE_THRESHOLD, build_rounding_lp, lp_round)
from sdl.simplex import simplex_solve


def test_identity_data_axis_direction():
    res = lp_round(np.eye(5), np.eye(5)[0])
    assert np.allclose(res.q_raw, np.eye(5)[0], atol=1e-12)
    assert res.objective == pytest.approx(1.0, abs=1e-12)
    assert res.reduced_cost_min >= -1e-9


def test_identity_data_perturbed_direction_snaps():
    r = normalize_sphere(np.array([0.9998, 0.008, 0.0, 0.0]))
    res = lp_round(np.eye(4), r)
    # vertex of the l1 ball is stable: still along e1, rescaled to <r,q>=1
    expect = np.eye(4)[0] / r[0]
    assert np.allclose(res.q_raw, expect, atol=1e-10)


def test_constraint_satisfied_exactly():
    rng = make_rng(90)
    y = sample_bg(6, 200, 0.3, rng)
    r = normalize_sphere(rng.standard_normal(6))
    res = lp_round(y, r)
    assert abs(r @ res.q_raw - 1.0) <= 1e-9


def test_optimality_dominates_input_direction():
    rng = make_rng(91)
    y = sample_bg(7, 300, 0.3, rng)
    r = normalize_sphere(rng.standard_normal(7))
    res = lp_round(y, r)
    feasible_input = r / float(r @ r)
    assert res.objective <= np.sum(np.abs(feasible_input @ y)) + 1e-9


def test_scaling_invariance():
    rng = make_rng(92)
    y = sample_bg(6, 250, 0.3, rng)
    r = normalize_sphere(rng.standard_normal(6))
    base = lp_round(y, r)
    for c in (0.5, 2.0, 7.3):
        scaled = lp_round(y, c * r)
        assert np.allclose(scaled.q_raw * c, base.q_raw, atol=1e-9)
        assert np.allclose(scaled.q, base.q, atol=1e-9) or np.allclose(
            scaled.q, -base.q, atol=1e-9)


def test_unit_normalization_and_confidence():
    rng = make_rng(93)
    y = sample_bg(5, 300, 0.25, rng)
    e1 = np.eye(5)[0]
    res = lp_round(y, e1)
    assert abs(np.linalg.norm(res.q) - 1.0) <= 1e-12
    assert res.confidence >= CONFIDENCE_THRESHOLD
    assert not res.below_threshold


def test_below_threshold_is_flagged_not_hidden():
    rng = make_rng(94)
    y = sample_bg(6, 400, 0.3, rng)
    # a direction far from every axis: the guarantee does not apply
    r = normalize_sphere(np.ones(6))
    res = lp_round(y, r)
    assert res.confidence < CONFIDENCE_THRESHOLD
    assert res.below_threshold


def test_rounding_theorem_small_scale():
    # theta=0.25 BG data: r within 0.05 of e_n recovers e_n exactly
    n, p = 8, 1500
    wins = 0
    for trial in range(5):
        rng = make_rng(95 + trial)
        y = sample_bg(n, p, 0.25, rng)
        e_n = np.eye(n)[-1]
        t = project_tangent(e_n, rng.standard_normal(n))
        r = normalize_sphere(e_n + 0.05 * t / np.linalg.norm(t))
        res = lp_round(y, r)
        err = min(np.linalg.norm(res.q - e_n), np.linalg.norm(res.q + e_n))
        wins += err <= 1e-8
    assert wins >= 4


def test_matches_generic_two_phase_path():
    rng = make_rng(96)
    y = sample_bg(4, 40, 0.4, rng)
    r = normalize_sphere(rng.standard_normal(4))
    fast = lp_round(y, r)
    lp, _ = build_rounding_lp(y, r)
    generic = simplex_solve(lp)
    assert fast.objective == pytest.approx(generic.value, abs=1e-9)


def test_rejects_zero_direction():
    with pytest.raises(InvalidInput):
        lp_round(np.eye(3), np.zeros(3))
