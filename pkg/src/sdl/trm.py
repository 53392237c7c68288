"""Riemannian trust-region driver over the sphere.

Two modes:

* ``FIXED_STEP`` keeps the radius constant and applies every exact-subproblem
  step as long as it decreases the objective (the idealized scheme that the
  landscape analysis assumes).
* ``ADAPTIVE`` is the practical variant: steps are accepted when the
  actual-to-predicted decrease ratio rho clears a threshold, and the radius
  follows the standard expand/shrink rules.

The subproblem can be solved exactly (dense reduced model, global minimizer)
or by truncated CG on the matrix-free Riemannian Hessian. Every visited
iterate is recorded with value, gradient norm, step data, and its landscape
region, which downstream diagnostics (quadratic-rate probe, equivariance
checks) consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInput
from .geometry import (Objective, Region, build_trs_model, classify_region,
                       exp_map, normalize_sphere, objective_value,
                       project_tangent, random_sphere_point, riem_grad,
                       riem_hess_operator)
from .rng import make_rng
from .trs import EPS_CURV, solve_trs_exact, solve_trs_tcg


class TrmMode(Enum):
    FIXED_STEP = "FixedStep"
    ADAPTIVE = "Adaptive"


class SubproblemKind(Enum):
    EXACT = "Exact"
    TCG = "Tcg"


class SolveStatus(Enum):
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    MAX_ITERS = "MaxIters"


@dataclass
class TrmOptions:
    mode: TrmMode = TrmMode.ADAPTIVE
    subproblem: SubproblemKind = SubproblemKind.TCG
    delta0: float = 0.1
    delta_max: float = np.pi / 4
    accept_threshold: float = 0.1     # rho' in (0, 0.25)
    expand_factor: float = 2.0
    shrink_factor: float = 0.25
    grad_tol: float = 1e-10
    max_iters: int = 500
    seed: int = 0                     # used only when q0 is not supplied

    def validate(self) -> None:
        if not 0.0 < self.accept_threshold < 0.25:
            raise InvalidInput("accept_threshold must lie in (0, 0.25)")
        if self.delta0 <= 0 or self.delta0 > self.delta_max:
            raise InvalidInput("need 0 < delta0 <= delta_max")
        if self.max_iters < 1:
            raise InvalidInput("max_iters must be >= 1")


@dataclass
class IterateRecord:
    """Telemetry for one visited iterate (the step taken from it, if any)."""

    f_value: float
    grad_norm: float
    step_norm: float
    region: Region
    on_boundary: bool
    rho: float | None
    accepted: bool


@dataclass
class SolveReport:
    q_final: np.ndarray
    status: SolveStatus
    iterates: list[IterateRecord] = field(default_factory=list)
    qs: list[np.ndarray] = field(default_factory=list)

    @property
    def f_final(self) -> float:
        return self.iterates[-1].f_value

    @property
    def grad_final(self) -> float:
        return self.iterates[-1].grad_norm

    @property
    def num_iters(self) -> int:
        return len(self.iterates) - 1


def _probe_start(obj: Objective, q: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Equivariant start vector for the curvature probe at q.

    Uses the Riemannian gradient when it is nonzero; at an exact critical
    point, falls back to the tangent projection of the largest data column,
    which transforms covariantly under orthogonal changes of basis.
    """
    if float(np.linalg.norm(grad)) > 1e-14:
        return grad
    norms = np.linalg.norm(obj.y_hat, axis=0)
    for k in np.argsort(-norms):
        cand = project_tangent(q, obj.y_hat[:, int(k)])
        if float(np.linalg.norm(cand)) > 1e-12 * max(1.0, float(norms[k])):
            return cand
    return project_tangent(q, np.cos(np.arange(1, obj.dim + 1)))


def trm_solve(obj: Objective, opts: TrmOptions | None = None,
              q0: np.ndarray | None = None) -> SolveReport:
    """Minimize the objective over the sphere from q0 (or a seeded random start)."""
    opts = opts or TrmOptions()
    opts.validate()
    if q0 is None:
        q = random_sphere_point(obj.dim, make_rng(opts.seed))
    else:
        q = normalize_sphere(q0)

    radius = float(opts.delta0)
    records: list[IterateRecord] = []
    qs: list[np.ndarray] = []
    status = SolveStatus.MAX_ITERS

    for _ in range(opts.max_iters):
        f_q = objective_value(obj, q)
        grad = riem_grad(obj, q)
        grad_norm = float(np.linalg.norm(grad))
        region, _ = classify_region(q, obj.mu)
        at_grad_tol = grad_norm <= opts.grad_tol

        if opts.subproblem is SubproblemKind.EXACT:
            model = build_trs_model(obj, q, radius)
            sol = solve_trs_exact(model)
            delta = model.basis @ sol.xi
        else:
            op = riem_hess_operator(obj, q)
            base = q
            sol = solve_trs_tcg(op, grad, radius,
                                probe_start=_probe_start(obj, q, grad),
                                probe_project=lambda v: project_tangent(base, v))
            delta = project_tangent(q, sol.xi)
        step_norm = float(np.linalg.norm(delta))
        pred = sol.model_decrease

        # second-order termination: a vanishing gradient alone can also mean
        # a saddle point; stop only when no escape direction with real
        # negative curvature is on offer either.
        if at_grad_tol and pred <= 0.25 * EPS_CURV * radius * radius:
            status = SolveStatus.GRAD_TOLERANCE_MET
            break

        if pred <= 0.0 or step_norm == 0.0:
            # No descent available from the subproblem (flat model); in
            # adaptive mode shrink and retry, otherwise stop.
            qs.append(q.copy())
            records.append(IterateRecord(f_q, grad_norm, 0.0, region,
                                         sol.on_boundary, None, False))
            if opts.mode is TrmMode.ADAPTIVE and radius > 1e-14:
                radius *= opts.shrink_factor
                continue
            break

        q_new = exp_map(q, delta)
        f_new = objective_value(obj, q_new)
        # Regularize rho against float cancellation: once the predicted
        # decrease falls near eps*|f|, the raw ratio is pure noise and would
        # spuriously reject converged Newton steps.
        rho_reg = 1e3 * np.finfo(float).eps * max(1.0, abs(f_q))
        rho = (f_q - f_new + rho_reg) / (pred + rho_reg)

        if opts.mode is TrmMode.FIXED_STEP:
            accepted = f_new <= f_q
        else:
            # Powell-style radius update: shrink on a poor model fit, expand
            # whenever an adequate step was clipped by the boundary.
            accepted = rho >= opts.accept_threshold
            if rho < 0.25:
                radius *= opts.shrink_factor
            elif sol.on_boundary:
                radius = min(radius * opts.expand_factor, opts.delta_max)

        qs.append(q.copy())
        records.append(IterateRecord(f_q, grad_norm, step_norm, region,
                                     sol.on_boundary, float(rho), accepted))
        if accepted:
            q = q_new
        elif opts.mode is TrmMode.FIXED_STEP:
            break  # a fixed-radius step that fails to decrease f ends the run
        elif radius <= 1e-14:
            break

    # Terminal record for the point where the run stopped.
    f_q = objective_value(obj, q)
    grad_norm = float(np.linalg.norm(riem_grad(obj, q)))
    region, _ = classify_region(q, obj.mu)
    qs.append(q.copy())
    records.append(IterateRecord(f_q, grad_norm, 0.0, region, False, None,
                                 False))
    return SolveReport(q_final=q, status=status, iterates=records, qs=qs)


def re_metric(q_hat: np.ndarray) -> float:
    """Distance from a unit vector to the nearest signed standard basis vector.

    min_i min(|q - e_i|, |q + e_i|) = sqrt(2 - 2 max_i |q_i|); lies in
    [0, sqrt(2)] for unit input.
    """
    q_hat = np.asarray(q_hat, dtype=np.float64).reshape(-1)
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * float(np.max(np.abs(q_hat))))))


def quadratic_rate_probe(report: SolveReport) -> list[float]:
    """Successive log-gradient-norm ratios over the trailing Newton phase.

    Scans the trailing run of accepted interior steps inside the strongly
    convex region and returns r_k = log|g_{k+1}| / log|g_k| for consecutive
    gradient norms in that run (ratios near 2 indicate quadratic
    convergence). Empty when the run did not converge or the tail is too
    short.
    """
    if report.status is not SolveStatus.GRAD_TOLERANCE_MET:
        return []
    recs = report.iterates
    tail = [recs[-1].grad_norm]
    for rec in reversed(recs[:-1]):
        if rec.region is not Region.R_I or rec.on_boundary or not rec.accepted:
            break
        tail.append(rec.grad_norm)
    tail.reverse()
    ratios: list[float] = []
    for g0, g1 in zip(tail, tail[1:]):
        if not 0.0 < g0 < 1.0:
            continue
        if g1 <= 0.0:
            ratios.append(float("inf"))
        elif g1 < 1.0:
            ratios.append(float(np.log(g1) / np.log(g0)))
    return ratios
