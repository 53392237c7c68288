"""Linear-programming rounding of an approximate sphere minimizer.

Given data Y (n-by-p) and a nonzero direction r, solve

    minimize  |q^T Y|_1   subject to   <r, q> = 1

so that a q already close to a signed sparse direction snaps onto it
exactly. The l1 objective is linearized the standard way: with
q = qp - qm and the positive/negative parts (a, b) of Y^T q,

    min sum(a + b)  s.t.  Y^T (qp - qm) - a + b = 0,  r^T (qp - qm) = 1,

all variables >= 0 (p + 1 equality rows). The LP always has the feasible
vertex q = e_j / r_j for the largest |r_j|, so the simplex starts there and
certifies optimality by nonnegative reduced costs; no phase 1 is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .simplex import (BLAND_AFTER, MAX_PIVOTS, LpStandardForm, SimplexResult,
                      _run_pivots, rank1_update, simplex_solve)

CONFIDENCE_THRESHOLD = 249.0 / 250.0


@dataclass
class RoundResult:
    """LP rounding output.

    ``q_raw`` is the optimal vertex with <r, q_raw> = 1; ``q`` is its unit
    normalization for downstream use. ``objective`` is |q_raw^T Y|_1 and
    ``confidence`` the cosine <r/|r|, q>; values below 249/250 mean the
    rounding guarantee did not apply and the result should be flagged.
    """

    q: np.ndarray
    q_raw: np.ndarray
    objective: float
    confidence: float
    reduced_cost_min: float
    pivots: int

    @property
    def below_threshold(self) -> bool:
        return self.confidence < CONFIDENCE_THRESHOLD


def build_rounding_lp(y_hat: np.ndarray, r: np.ndarray) -> tuple[LpStandardForm, np.ndarray]:
    """Standard-form LP for the rounding problem plus its warm-start basis."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    n, p = y_hat.shape
    ncols = 2 * n + 2 * p
    a = np.zeros((p + 1, ncols))
    a[:p, :n] = y_hat.T
    a[:p, n:2 * n] = -y_hat.T
    a[np.arange(p), 2 * n + np.arange(p)] = -1.0
    a[np.arange(p), 2 * n + p + np.arange(p)] = 1.0
    a[p, :n] = r
    a[p, n:2 * n] = -r
    rhs = np.zeros(p + 1)
    rhs[p] = 1.0
    c = np.concatenate([np.zeros(2 * n), np.ones(2 * p)])
    lp = LpStandardForm(c=c, a=a, rhs=rhs)

    j = int(np.argmax(np.abs(r)))
    v = 1.0 / r[j]
    w = y_hat[j, :] * v
    basis = np.where(w >= 0, 2 * n + np.arange(p), 2 * n + p + np.arange(p))
    basis = np.concatenate([basis, [j if v >= 0 else n + j]]).astype(np.intp)
    return lp, basis


def _warm_tableau(y_hat: np.ndarray, r: np.ndarray, perturb: float = 1e-6):
    """Tableau in warm-basis coordinates, built structurally in O(n p).

    The warm basis contains one of (a_k, b_k) per data row plus one q
    variable for the normalization row, so the basis inverse is a signed
    permutation plus a single rank-1 correction; the tableau follows from
    one pivot elimination instead of a dense solve.

    The warm vertex is heavily degenerate (every data column orthogonal to
    the start direction parks its a/b pair at zero), which stalls the
    simplex in zero-length pivots. A graded epsilon perturbation of the
    right-hand side, carried as an extra column and used only for ratio
    tests, makes the path nondegenerate; reduced costs and the final basic
    values are unaffected because they do not depend on the rhs.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    n, p = y_hat.shape
    ncols = 2 * n + 2 * p
    j = int(np.argmax(np.abs(r)))
    v = 1.0 / r[j]
    w = y_hat[j, :] * v  # Y^T q at the warm vertex q = e_j / r_j

    tableau = np.zeros((p + 1, ncols + 2))
    tableau[:p, :n] = y_hat.T
    tableau[:p, n:2 * n] = -y_hat.T
    tableau[np.arange(p), 2 * n + np.arange(p)] = -1.0
    tableau[np.arange(p), 2 * n + p + np.arange(p)] = 1.0
    tableau[p, :n] = r
    tableau[p, n:2 * n] = -r
    tableau[p, ncols] = 1.0

    # Pivot the q_j (or its negative-part twin) column into the last row.
    qcol = j if v >= 0 else n + j
    tableau[p, :] /= tableau[p, qcol]
    factors = tableau[:, qcol].copy()
    factors[p] = 0.0
    rank1_update(tableau, factors, tableau[p, :].copy())

    # Rows whose basic variable is a_k carry coefficient -1; flip them.
    a_rows = w >= 0
    tableau[:p][a_rows] *= -1.0

    m = p + 1
    tableau[:, ncols + 1] = tableau[:, ncols] + perturb * (
        1.0 + np.arange(m) / m)

    basis = np.where(a_rows, 2 * n + np.arange(p), 2 * n + p + np.arange(p))
    basis = np.concatenate([basis, [qcol]]).astype(np.intp)
    # All basic a/b variables have cost 1; the q variable has cost 0.
    c = np.concatenate([np.zeros(2 * n), np.ones(2 * p)])
    reduced = c - np.sum(tableau[:p, :ncols], axis=0)
    return tableau, basis, reduced, c


def lp_round(y_hat: np.ndarray, r: np.ndarray, *,
             bland_after: int = BLAND_AFTER,
             max_pivots: int = MAX_PIVOTS) -> RoundResult:
    """Snap a direction r onto the sparsest feasible direction for y_hat."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    if y_hat.ndim != 2:
        raise InvalidInput("y_hat must be a matrix")
    n, p = y_hat.shape
    if r.size != n:
        raise InvalidInput(f"r has dim {r.size}, data has dim {n}")
    if float(np.linalg.norm(r)) == 0.0:
        raise InvalidInput("r must be nonzero")

    tableau, basis, reduced, c = _warm_tableau(y_hat, r)
    if float(np.min(tableau[:, -2])) < -1e-9:
        # Should not happen (the warm vertex is feasible by construction),
        # but fall back to the generic two-phase path if it ever does.
        lp, _ = build_rounding_lp(y_hat, r)
        res = simplex_solve(lp, bland_after=bland_after, max_pivots=max_pivots)
    else:
        allowed = np.ones(c.size, dtype=bool)
        pivots = _run_pivots(tableau, reduced, basis, allowed, ratio_col=-1,
                             bland_after=bland_after, max_pivots=max_pivots)
        x = np.zeros(c.size)
        x[basis] = np.maximum(tableau[:, -2], 0.0)
        res = SimplexResult(x=x, basis=basis, value=float(c @ x),
                            reduced_cost_min=float(np.min(reduced)),
                            pivots=pivots)

    q_raw = res.x[:n] - res.x[n:2 * n]
    q_unit = q_raw / float(np.linalg.norm(q_raw))
    confidence = float((r / np.linalg.norm(r)) @ q_unit)
    return RoundResult(q=q_unit, q_raw=q_raw, objective=res.value,
                       confidence=confidence,
                       reduced_cost_min=res.reduced_cost_min,
                       pivots=res.pivots)
