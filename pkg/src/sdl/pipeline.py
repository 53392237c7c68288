"""End-to-end recovery: precondition, solve/round/deflate, reconstruct, score.

One row of the coefficient matrix is recovered per round: a trust-region
solve over the sphere restricted to the orthogonal complement of the
already-recovered directions gives an approximate direction, LP rounding
snaps it to an exact one, and the complement shrinks by one. After n rounds
the coefficient estimate is X_hat = Q_stars @ Y_hat and the dictionary
estimate solves the least-squares system Y = A X_hat.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInput, SdlError, SingularMatrix
from .geometry import Objective
from .linalg import inv_sqrt_psd, orthonormal_complement_basis, sym_eig
from .rng import mix_seed
from .rounding import RoundResult, lp_round
from .trm import SolveReport, TrmOptions, trm_solve


def precondition(y: np.ndarray, theta: float | None = None) -> np.ndarray:
    """Whiten the observations: sqrt(p * theta) (Y Y^T)^{-1/2} Y.

    The output Gram matrix equals p * theta * I (exactly I without theta),
    which makes the effective dictionary nearly orthogonal. theta unknown
    only rescales the problem, so ``theta=None`` drops the scalar and
    returns (Y Y^T)^{-1/2} Y.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise InvalidInput("y must be a matrix")
    if theta is not None and not 0.0 < theta <= 1.0:
        raise InvalidInput(f"theta must lie in (0, 1], got {theta}")
    root = inv_sqrt_psd(y @ y.T)
    scale = np.sqrt(y.shape[1] * theta) if theta is not None else 1.0
    return scale * (root @ y)


def reconstruct_dictionary(y: np.ndarray, x_hat: np.ndarray,
                           return_residual: bool = False):
    """Least-squares dictionary A_hat = Y X_hat^T (X_hat X_hat^T)^{-1}."""
    y = np.asarray(y, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if y.ndim != 2 or x_hat.ndim != 2 or y.shape[1] != x_hat.shape[1]:
        raise InvalidInput(f"shape mismatch: y {y.shape}, x_hat {x_hat.shape}")
    gram = x_hat @ x_hat.T
    eig = sym_eig(gram)
    lam_max = float(eig.eigenvalues[-1])
    if lam_max <= 0 or float(eig.eigenvalues[0]) <= 1e-12 * lam_max:
        raise SingularMatrix("X_hat X_hat^T is numerically singular")
    inv = (eig.eigenvectors / eig.eigenvalues) @ eig.eigenvectors.T
    a_hat = y @ x_hat.T @ inv
    if not return_residual:
        return a_hat
    denom = max(float(np.linalg.norm(y)), np.finfo(float).tiny)
    residual = float(np.linalg.norm(y - a_hat @ x_hat)) / denom
    return a_hat, residual


@dataclass
class MatchReport:
    """Signed-permutation match of estimated rows against reference rows.

    ``perm[i] = j`` pairs estimated row i with reference row j; ``signs[i]``
    is the sign making the correlation positive. The assignment maximizes
    total absolute normalized correlation (Hungarian algorithm). Row errors
    are plain relative differences, so rows that are only recovered up to
    scale (e.g. after preconditioning) show that scale in the error even
    when the directions match exactly.
    """

    perm: np.ndarray
    signs: np.ndarray
    max_rel_err: float
    row_rel_errs: np.ndarray


def match_signed_permutation(rows_hat: np.ndarray,
                             rows_true: np.ndarray) -> MatchReport:
    rows_hat = np.atleast_2d(np.asarray(rows_hat, dtype=np.float64))
    rows_true = np.atleast_2d(np.asarray(rows_true, dtype=np.float64))
    if rows_hat.shape != rows_true.shape:
        raise InvalidInput(
            f"shape mismatch: {rows_hat.shape} vs {rows_true.shape}")
    tiny = np.finfo(float).tiny
    nh = np.maximum(np.linalg.norm(rows_hat, axis=1), tiny)
    nt = np.maximum(np.linalg.norm(rows_true, axis=1), tiny)
    corr = (rows_hat / nh[:, None]) @ (rows_true / nt[:, None]).T
    rows, cols = linear_sum_assignment(-np.abs(corr))
    perm = np.empty(rows_hat.shape[0], dtype=np.intp)
    perm[rows] = cols
    signs = np.where(corr[np.arange(len(perm)), perm] >= 0, 1.0, -1.0)
    diffs = rows_hat - signs[:, None] * rows_true[perm]
    errs = np.linalg.norm(diffs, axis=1) / nt[perm]
    return MatchReport(perm=perm, signs=signs,
                       max_rel_err=float(np.max(errs)), row_rel_errs=errs)


@dataclass
class DeflationStep:
    """Telemetry for one solve-round-deflate round."""

    dim: int
    solve_report: SolveReport | None
    rounding: RoundResult
    flagged: bool


@dataclass
class RecoveryResult:
    q_stars: np.ndarray                 # n-by-n, one recovered direction per row
    x_hat: np.ndarray
    a_hat: np.ndarray
    residual: float                     # |Y - A_hat X_hat|_F / |Y|_F
    steps: list[DeflationStep] = field(default_factory=list)
    match: MatchReport | None = None


class RecoveryAborted(SdlError):
    """A deflation step failed; ``steps`` holds the telemetry so far."""

    def __init__(self, message: str, steps: list[DeflationStep]):
        super().__init__(message)
        self.steps = steps


def recover_all(y_hat: np.ndarray, mu: float = 1e-2,
                opts: TrmOptions | None = None,
                x_true: np.ndarray | None = None) -> RecoveryResult:
    """Recover all n sparse directions from y_hat by repeated deflation.

    Rounds 0..n-2 each solve a reduced-sphere instance and round it; the
    last direction is forced by the one-dimensional complement (its sign
    resolved by the same LP rounding). Roundings whose input direction is
    not provably inside the basin (cosine below 249/250) are flagged, never
    silently trusted.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y_hat.ndim != 2:
        raise InvalidInput("y_hat must be a matrix")
    n = y_hat.shape[0]
    opts = opts or TrmOptions()

    recovered: list[np.ndarray] = []
    steps: list[DeflationStep] = []
    ortho = np.zeros((n, 0))
    for ell in range(n):
        try:
            if ell < n - 1:
                u = np.eye(n) if ell == 0 else orthonormal_complement_basis(ortho)
                sub = Objective(u.T @ y_hat, mu)
                sub_opts = replace(
                    opts,
                    seed=mix_seed(opts.seed, ell),
                    max_iters=max(50, int(np.ceil(opts.max_iters * (n - ell) / n))),
                )
                report = trm_solve(sub, sub_opts)
                direction = u @ report.q_final
            else:
                u = orthonormal_complement_basis(ortho)
                direction = u[:, 0]
                report = None
            rounding = lp_round(y_hat, direction)
        except SdlError as exc:
            raise RecoveryAborted(
                f"deflation step {ell} failed: {exc}", steps) from exc
        q_star = rounding.q
        steps.append(DeflationStep(dim=n - ell, solve_report=report,
                                   rounding=rounding,
                                   flagged=rounding.below_threshold))
        recovered.append(q_star)
        # Maintain an exactly orthonormal stack of recovered directions so
        # each complement is exact even when the rounded vectors are only
        # nearly orthogonal (complete, non-orthogonal dictionaries).
        g = q_star.copy()
        for _ in range(2):
            if ortho.shape[1]:
                g = g - ortho @ (ortho.T @ g)
        norm = float(np.linalg.norm(g))
        if norm < 1e-8:
            raise RecoveryAborted(
                f"deflation step {ell} produced a dependent direction", steps)
        ortho = np.hstack([ortho, (g / norm)[:, None]])

    q_stars = np.vstack(recovered)
    x_hat = q_stars @ y_hat
    a_hat, residual = reconstruct_dictionary(y_hat, x_hat, return_residual=True)
    match = match_signed_permutation(x_hat, x_true) if x_true is not None else None
    return RecoveryResult(q_stars=q_stars, x_hat=x_hat, a_hat=a_hat,
                          residual=residual, steps=steps, match=match)


def run_report_lines(result: RecoveryResult) -> list[str]:
    """Key=value run report, one metric per line."""
    n = result.q_stars.shape[0]
    lines = [
        f"n={n}",
        f"residual={result.residual:.6e}",
        f"flagged_steps={sum(1 for s in result.steps if s.flagged)}",
        f"total_pivots={sum(s.rounding.pivots for s in result.steps)}",
    ]
    for i, step in enumerate(result.steps):
        iters = step.solve_report.num_iters if step.solve_report else 0
        lines.append(f"step{i}.dim={step.dim}")
        lines.append(f"step{i}.iters={iters}")
        lines.append(f"step{i}.confidence={step.rounding.confidence:.9f}")
        lines.append(f"step{i}.flagged={int(step.flagged)}")
    if result.match is not None:
        lines.append(f"match.max_rel_err={result.match.max_rel_err:.6e}")
        lines.append("match.perm=" + ",".join(str(int(j)) for j in result.match.perm))
        lines.append("match.signs=" + ",".join(
            "+" if s > 0 else "-" for s in result.match.signs))
    return lines
