"""Dense primal simplex on tableaus, with a two-phase start.

Solves   min c.x  s.t.  A x = rhs,  x >= 0   for small/medium dense
problems. The tableau (basis-inverse times [A | rhs]) is kept explicitly
and updated by rank-1 pivots. Entering columns follow Dantzig's rule until
``bland_after`` degenerate pivots have accumulated, after which Bland's
rule takes over to exclude cycling; a hard pivot cap converts pathological
runs into ``NumericalFailure`` instead of hanging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InvalidInput, NumericalFailure, Unbounded

try:
    from scipy.linalg.blas import dger as _dger
except ImportError:  # pragma: no cover
    _dger = None

REDUCED_COST_TOL = 1e-9
PIVOT_TOL = 1e-10
DEGENERATE_TOL = 1e-11
BLAND_AFTER = 5000
MAX_PIVOTS = 50000


@dataclass
class LpStandardForm:
    """min c.x s.t. a x = rhs, x >= 0. Rows with negative rhs are flipped."""

    c: np.ndarray
    a: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        self.a = np.asarray(self.a, dtype=np.float64)
        self.rhs = np.asarray(self.rhs, dtype=np.float64).reshape(-1)
        if self.a.ndim != 2 or self.a.shape != (self.rhs.size, self.c.size):
            raise InvalidInput(
                f"inconsistent LP shapes: A {self.a.shape}, c {self.c.size}, "
                f"rhs {self.rhs.size}"
            )
        flip = self.rhs < 0
        if np.any(flip):
            self.a = self.a.copy()
            self.rhs = self.rhs.copy()
            self.a[flip] *= -1.0
            self.rhs[flip] *= -1.0


@dataclass
class SimplexResult:
    x: np.ndarray
    basis: np.ndarray
    value: float
    reduced_cost_min: float
    pivots: int


def rank1_update(a: np.ndarray, col: np.ndarray, row: np.ndarray) -> None:
    """In-place a -= outer(col, row) without a tableau-sized temporary.

    Goes through BLAS dger on the transposed (Fortran-ordered) view when
    scipy is present; the fallback updates in row blocks to bound temp
    memory. This is the inner loop of every pivot, so it matters for the
    larger rounding tableaus.
    """
    if _dger is not None and a.flags.c_contiguous:
        _dger(-1.0, row, col, a=a.T, overwrite_a=1)
        return
    block = max(1, 4_000_000 // max(1, a.shape[1]))
    for lo in range(0, a.shape[0], block):
        hi = min(lo + block, a.shape[0])
        a[lo:hi] -= col[lo:hi, None] * row[None, :]


def _run_pivots(tableau: np.ndarray, reduced: np.ndarray, basis: np.ndarray,
                allowed: np.ndarray, *, ratio_col: int = -1,
                bland_after: int = BLAND_AFTER,
                max_pivots: int = MAX_PIVOTS) -> int:
    """Pivot to optimality in place. Returns the pivot count.

    ``tableau`` holds the constraint columns followed by one or more
    right-hand-side columns (all updated together); ``ratio_col`` selects
    the one driving the ratio test, so callers can run the test on an
    epsilon-perturbed copy while the true basic values ride along.
    """
    m = tableau.shape[0]
    ncols = reduced.size
    pivots = 0
    degenerate = 0
    while True:
        use_bland = degenerate > bland_after
        candidates = np.where(allowed & (reduced < -REDUCED_COST_TOL))[0]
        if candidates.size == 0:
            return pivots
        if use_bland:
            enter = int(candidates[0])
        else:
            enter = int(candidates[np.argmin(reduced[candidates])])

        col = tableau[:, enter]
        eligible = col > PIVOT_TOL
        if not np.any(eligible):
            raise Unbounded("entering column has no positive pivot entries")
        ratios = np.full(m, np.inf)
        ratios[eligible] = tableau[eligible, ratio_col] / col[eligible]
        best = float(np.min(ratios))
        ties = np.where(ratios <= best + DEGENERATE_TOL)[0]
        # Smallest basis label among ties keeps Bland's rule anti-cycling.
        leave = int(ties[np.argmin(basis[ties])])
        if best <= DEGENERATE_TOL:
            degenerate += 1

        pivot = tableau[leave, enter]
        tableau[leave, :] /= pivot
        piv_row = tableau[leave, :].copy()
        factors = tableau[:, enter].copy()
        factors[leave] = 0.0
        rank1_update(tableau, factors, piv_row)
        reduced -= reduced[enter] * piv_row[:ncols]
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise NumericalFailure(f"pivot cap {max_pivots} exceeded (cycling?)")


def _reduced_costs(tableau: np.ndarray, basis: np.ndarray,
                   c: np.ndarray) -> np.ndarray:
    cb = c[basis]
    active = cb != 0.0
    if np.any(active):
        return c - cb[active] @ tableau[active, :-1]
    return c.copy()


def simplex_solve(lp: LpStandardForm, initial_basis: np.ndarray | None = None,
                  *, bland_after: int = BLAND_AFTER,
                  max_pivots: int = MAX_PIVOTS) -> SimplexResult:
    """Solve the LP, via phase 1 unless a feasible starting basis is given.

    Returns a basic optimal solution with all reduced costs >= -1e-9.
    Raises ``Infeasible`` or ``Unbounded`` accordingly.
    """
    m, n = lp.a.shape

    if initial_basis is not None:
        basis = np.asarray(initial_basis, dtype=np.intp).copy()
        if basis.size != m:
            raise InvalidInput(f"initial basis must have {m} indices")
        bmat = lp.a[:, basis]
        try:
            tableau = np.linalg.solve(bmat, np.hstack([lp.a, lp.rhs[:, None]]))
        except np.linalg.LinAlgError:
            raise InvalidInput("initial basis is singular") from None
        if float(np.min(tableau[:, -1])) < -1e-9:
            raise InvalidInput("initial basis is not primal feasible")
    else:
        tableau, basis = _phase_one(lp, bland_after=bland_after,
                                    max_pivots=max_pivots)
        if tableau.shape[0] == 0:
            return SimplexResult(np.zeros(n), basis, 0.0, 0.0, 0)

    reduced = _reduced_costs(tableau, basis, lp.c)
    allowed = np.ones(n, dtype=bool)
    pivots = _run_pivots(tableau, reduced, basis, allowed,
                         bland_after=bland_after, max_pivots=max_pivots)
    x = np.zeros(n)
    x[basis] = np.maximum(tableau[:, -1], 0.0)
    return SimplexResult(x=x, basis=basis, value=float(lp.c @ x),
                         reduced_cost_min=float(np.min(reduced)),
                         pivots=pivots)


def _phase_one(lp: LpStandardForm, *, bland_after: int, max_pivots: int):
    """Find a feasible basis by minimizing the sum of artificial variables."""
    m, n = lp.a.shape
    tableau = np.hstack([lp.a, np.eye(m), lp.rhs[:, None]])
    basis = np.arange(n, n + m, dtype=np.intp)
    # Artificial cost vector: reduced costs are -(column sums) on real columns.
    reduced = np.concatenate([-np.sum(lp.a, axis=0), np.zeros(m)])
    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    _run_pivots(tableau, reduced, basis, allowed, bland_after=bland_after,
                max_pivots=max_pivots)
    infeas = float(np.sum(tableau[basis >= n, -1]))
    if infeas > 1e-8 * max(1.0, float(np.max(np.abs(lp.rhs)))):
        raise Infeasible(f"phase 1 ended with residual {infeas:.3e}")

    # Drive leftover artificials out of the basis; rows where that is
    # impossible are redundant and get dropped.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] < n:
            continue
        row = tableau[i, :n]
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > PIVOT_TOL:
            pivot = tableau[i, j]
            tableau[i, :] /= pivot
            piv_row = tableau[i, :]
            factors = tableau[:, j].copy()
            factors[i] = 0.0
            tableau -= np.outer(factors, piv_row)
            basis[i] = j
        else:
            keep[i] = False
    tableau = tableau[keep][:, list(range(n)) + [n + m]]
    basis = basis[keep]
    return tableau, basis
