"""Trust-region subproblem solvers.

The subproblem is

    minimize  m(xi) = b . xi + 0.5 * xi . H xi   subject to  |xi| <= radius

with H symmetric and possibly indefinite. ``solve_trs_exact`` computes the
global minimizer via the More-Sorensen characterization on the
eigendecomposition of H: xi solves the subproblem iff

    (H + lam I) xi = -b,   H + lam I >= 0,   lam >= 0,   lam (radius - |xi|) = 0.

``solve_trs_tcg`` is the Steihaug-Toint truncated conjugate gradient variant
(Conn, Gould & Toint 2000, ch. 7.5) that only needs Hessian-vector products,
extended with a negative-curvature probe so saddle points are escaped even
when the gradient vanishes. ``trs_brute_oracle`` is a slow polar-grid search
used by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .linalg import sym_eig

SECULAR_MAX_ITERS = 200
SECULAR_TOL = 1e-12
HARD_CASE_TOL = 1e-10
DEFAULT_KAPPA_ACC = 0.1
DEFAULT_THETA_ACC = 1.0
EPS_CURV = 1e-8
PROBE_GRAD_TOL = 1e-4
PROBE_ITERS = 25


class TrsStatus(Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    HARD_CASE = "HardCase"
    TCG_TRUNCATED = "TcgTruncated"
    TCG_NEG_CURV = "TcgNegCurv"


@dataclass
class TrsSolution:
    """Subproblem step ``xi`` with its multiplier and bookkeeping.

    ``model_decrease`` is -m(xi) >= 0 (xi = 0 is always feasible). The
    multiplier ``lam`` is meaningful for the exact solver only; truncated CG
    reports 0.
    """

    xi: np.ndarray
    lam: float
    on_boundary: bool
    model_decrease: float
    status: TrsStatus
    iterations: int = 0
    iterate_norms: list[float] | None = None  # tCG only; nondecreasing


def _model_value(b: np.ndarray, h: np.ndarray, xi: np.ndarray) -> float:
    return float(b @ xi + 0.5 * xi @ (h @ xi))


def solve_trs_exact(model) -> TrsSolution:
    """Global trust-region subproblem minimizer via the secular equation.

    Eigendecomposes H once, then finds the multiplier lam on
    [max(0, -lam_min), lam_hi] with |xi(lam)| = radius by safeguarded Newton
    on phi(lam) = 1/radius - 1/|xi(lam)|. The hard case (b orthogonal to the
    bottom eigenspace with lam_min < 0 and the pseudo-inverse step interior)
    is detected and resolved by adding a bottom-eigenvector component that
    reaches the boundary.
    """
    b = np.asarray(model.b, dtype=np.float64).reshape(-1)
    h = np.asarray(model.h, dtype=np.float64)
    radius = float(model.radius)
    if radius <= 0:
        raise InvalidInput(f"radius must be positive, got {radius}")
    if h.shape != (b.size, b.size):
        raise InvalidInput(f"H has shape {h.shape}, expected {(b.size, b.size)}")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    if float(np.max(np.abs(h - h.T))) > 1e-10 * scale:
        raise InvalidInput("H must be symmetric")

    eig = sym_eig(h)
    lam_min = float(eig.eigenvalues[0])
    beta = eig.eigenvectors.T @ b
    bnorm = float(np.linalg.norm(b))

    def xi_of(lam: float, mask=None) -> np.ndarray:
        denom = eig.eigenvalues + lam
        coef = np.zeros_like(beta)
        sel = np.ones_like(beta, dtype=bool) if mask is None else mask
        coef[sel] = -beta[sel] / denom[sel]
        return eig.eigenvectors @ coef

    def norm_sq(lam: float, mask=None) -> tuple[float, float]:
        """(|xi(lam)|^2, d/dlam |xi(lam)|^2) from the eigen-expansion."""
        denom = eig.eigenvalues + lam
        sel = np.ones_like(beta, dtype=bool) if mask is None else mask
        r = np.zeros_like(beta)
        r[sel] = beta[sel] / denom[sel]
        n2 = float(r @ r)
        d2 = np.zeros_like(beta)
        d2[sel] = r[sel] * r[sel] / denom[sel]
        return n2, -2.0 * float(np.sum(d2))

    # Unconstrained Newton step when H is positive definite.
    if lam_min > 0.0:
        n2, _ = norm_sq(0.0)
        if n2 <= radius * radius:
            xi = xi_of(0.0)
            return TrsSolution(xi=xi, lam=0.0, on_boundary=False,
                               model_decrease=max(0.0, -_model_value(b, h, xi)),
                               status=TrsStatus.INTERIOR)

    # Pure negative-curvature step for a vanishing gradient.
    if bnorm == 0.0:
        if lam_min >= 0.0:
            return TrsSolution(xi=np.zeros_like(b), lam=max(0.0, -lam_min),
                               on_boundary=False, model_decrease=0.0,
                               status=TrsStatus.INTERIOR)
        xi = radius * eig.eigenvectors[:, 0]
        return TrsSolution(xi=xi, lam=-lam_min, on_boundary=True,
                           model_decrease=max(0.0, -_model_value(b, h, xi)),
                           status=TrsStatus.BOUNDARY)

    # Hard case: no component of b along the bottom eigenspace.
    lam_lo = max(0.0, -lam_min)
    eig_gap_tol = 1e-12 * max(scale, 1.0)
    bottom = eig.eigenvalues <= lam_min + eig_gap_tol
    if lam_min < 0.0 and float(np.max(np.abs(beta[bottom]))) <= HARD_CASE_TOL * bnorm:
        n2, _ = norm_sq(lam_lo, mask=~bottom)
        if n2 <= radius * radius:
            xi_p = xi_of(lam_lo, mask=~bottom)
            tau = float(np.sqrt(max(0.0, radius * radius - n2)))
            xi = xi_p + tau * eig.eigenvectors[:, 0]
            return TrsSolution(xi=xi, lam=lam_lo, on_boundary=True,
                               model_decrease=max(0.0, -_model_value(b, h, xi)),
                               status=TrsStatus.HARD_CASE)

    # Boundary solution via the secular equation. Bracket the multiplier
    # with a Gershgorin bound: lam_hi >= |b|/radius - lam_min guarantees
    # |xi(lam_hi)| <= radius.
    gersh = float(np.max(np.sum(np.abs(h), axis=1))) if h.size else 0.0
    lam_hi = lam_lo + bnorm / radius + gersh + 1.0
    lo, hi = lam_lo, lam_hi
    lam = lam_lo + 1e-3 * (lam_hi - lam_lo)
    converged = False
    for _ in range(SECULAR_MAX_ITERS):
        if lam_min < 0.0 and hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(hi)):
            # Near-hard case: the secular root is closer to -lam_min than
            # float resolution allows. Take the boundary-reaching bottom
            # eigenvector correction at the feasible bracket end instead.
            n2, _ = norm_sq(hi)
            if n2 <= radius * radius:
                xi_p = xi_of(hi)
                tau = float(np.sqrt(max(0.0, radius * radius - n2)))
                xi = xi_p + tau * eig.eigenvectors[:, 0]
                return TrsSolution(
                    xi=xi, lam=float(hi), on_boundary=True,
                    model_decrease=max(0.0, -_model_value(b, h, xi)),
                    status=TrsStatus.HARD_CASE)
        n2, dn2 = norm_sq(lam)
        norm = np.sqrt(n2)
        if not np.isfinite(norm) or norm == 0.0:
            lo = lam
            lam = 0.5 * (lo + hi)
            continue
        if abs(norm - radius) <= SECULAR_TOL * radius:
            converged = True
            break
        if norm > radius:
            lo = lam
        else:
            hi = lam
        # Newton step on phi(lam) = 1/radius - 1/|xi(lam)|, which is nearly
        # linear in lam; fall back to bisection outside the bracket.
        phi = 1.0 / radius - 1.0 / norm
        dphi = 0.5 * dn2 / (n2 * norm)
        if dphi != 0.0 and np.isfinite(dphi):
            cand = lam - phi / dphi
            lam = cand if lo < cand < hi else 0.5 * (lo + hi)
        else:
            lam = 0.5 * (lo + hi)
    if not converged:
        n2, _ = norm_sq(lam)
        if abs(np.sqrt(n2) - radius) > 1e-6 * radius:
            raise NumericalFailure("secular equation did not converge")
    xi = xi_of(lam)
    return TrsSolution(xi=xi, lam=float(lam), on_boundary=True,
                       model_decrease=max(0.0, -_model_value(b, h, xi)),
                       status=TrsStatus.BOUNDARY)


def _boundary_tau(xi: np.ndarray, p: np.ndarray, radius: float) -> float:
    """Positive root of |xi + tau p| = radius."""
    pp = float(p @ p)
    xp = float(xi @ p)
    xx = float(xi @ xi)
    disc = max(0.0, xp * xp + pp * (radius * radius - xx))
    return (-xp + np.sqrt(disc)) / pp


def probe_smallest_curvature(hess_vec: Callable[[np.ndarray], np.ndarray],
                             start: np.ndarray,
                             iters: int = PROBE_ITERS,
                             project: Callable[[np.ndarray], np.ndarray] | None = None):
    """Cheap bottom-of-spectrum probe by shifted power iteration.

    First estimates the dominant eigenvalue magnitude of the operator by
    power iteration, then runs ``iters`` power iterations on sigma*I - H to
    pull out an approximate bottom eigenvector. Returns (direction,
    rayleigh_quotient); the direction is a unit vector.

    When the operator acts on a subspace (e.g. a tangent space), pass its
    orthoprojector as ``project``: the shift sigma*I amplifies any
    off-subspace rounding noise, so iterates must be projected back.
    """
    v0 = np.asarray(start, dtype=np.float64).copy()
    if project is not None:
        v0 = project(v0)
    nv = float(np.linalg.norm(v0))
    if nv == 0.0:
        raise InvalidInput("probe start vector must be nonzero")
    v0 /= nv

    def clean(w: np.ndarray) -> np.ndarray:
        return project(w) if project is not None else w

    # Stage 1: dominant-magnitude eigenvalue, for the shift. If it is
    # already negative it is the smallest eigenvalue and we are done.
    v = v0.copy()
    for _ in range(iters):
        w = clean(hess_vec(v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            break
        v = w / nw
    rq_dom = float(v @ hess_vec(v))
    if rq_dom < 0.0:
        return v, rq_dom
    # Stage 2: power iteration on sigma*I - H from the original start (the
    # stage-1 eigenvector is a fixed point of the shifted operator).
    sigma = abs(rq_dom) + 1.0
    v = v0
    for _ in range(iters):
        w = clean(sigma * v - hess_vec(v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            break
        v = w / nw
    rq = float(v @ hess_vec(v))
    return v, rq


def solve_trs_tcg(hess_vec: Callable[[np.ndarray], np.ndarray],
                  b: np.ndarray,
                  radius: float,
                  max_iter: int | None = None,
                  kappa_acc: float = DEFAULT_KAPPA_ACC,
                  theta_acc: float = DEFAULT_THETA_ACC,
                  eps_curv: float = EPS_CURV,
                  probe_grad_tol: float = PROBE_GRAD_TOL,
                  probe_start: np.ndarray | None = None,
                  probe_project: Callable[[np.ndarray], np.ndarray] | None = None,
                  ) -> TrsSolution:
    """Truncated CG on the subproblem with a negative-curvature escape.

    Stops on boundary crossing, on detected nonpositive curvature (moving to
    the boundary along the offending direction), or on the residual test
    |r_j| <= |r_0| * min(kappa_acc, |r_0|^theta_acc). When |b| is below
    ``probe_grad_tol``, a shifted power iteration probes for a direction d
    with d.Hd < -eps_curv |d|^2 first; if found, d (sign-aligned with -b) is
    used as the initial search direction, which guarantees saddle points
    with negative curvature are escaped. The returned step never does worse
    than the Cauchy point.
    """
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if radius <= 0:
        raise InvalidInput(f"radius must be positive, got {radius}")
    if probe_project is not None:
        # Scrub off-subspace rounding noise; it would otherwise be amplified
        # when b is normalized near a critical point.
        b = probe_project(b)
    dim = b.size
    if max_iter is None:
        max_iter = max(1, 3 * max(1, dim - 1))
    bnorm = float(np.linalg.norm(b))

    neg_dir = None
    if bnorm < probe_grad_tol:
        start = probe_start if probe_start is not None else None
        if start is None or float(np.linalg.norm(start)) == 0.0:
            start = np.cos(np.arange(1, dim + 1))  # fixed deterministic probe
        d, rq = probe_smallest_curvature(hess_vec, start,
                                         project=probe_project)
        if rq < -eps_curv:
            neg_dir = d if float(d @ b) <= 0.0 else -d

    if bnorm == 0.0 and neg_dir is None:
        return TrsSolution(xi=np.zeros(dim), lam=0.0, on_boundary=False,
                           model_decrease=0.0, status=TrsStatus.INTERIOR)

    xi = np.zeros(dim)
    r = b.copy()
    p = neg_dir.copy() if neg_dir is not None else -r
    r0 = bnorm
    stop_resid = r0 * min(kappa_acc, r0 ** theta_acc)
    status = TrsStatus.TCG_TRUNCATED
    iterations = 0
    norms = [0.0]
    for j in range(max_iter):
        iterations = j + 1
        hp = hess_vec(p)
        php = float(p @ hp)
        if php <= eps_curv * float(p @ p):
            tau = _boundary_tau(xi, p, radius)
            xi = xi + tau * p
            norms.append(float(np.linalg.norm(xi)))
            status = TrsStatus.TCG_NEG_CURV
            break
        rr = float(r @ r)
        alpha = rr / php
        cand = xi + alpha * p
        if float(np.linalg.norm(cand)) >= radius:
            tau = _boundary_tau(xi, p, radius)
            xi = xi + tau * p
            norms.append(float(np.linalg.norm(xi)))
            status = TrsStatus.BOUNDARY
            break
        xi = cand
        norms.append(float(np.linalg.norm(xi)))
        r = r + alpha * hp
        if float(np.linalg.norm(r)) <= stop_resid:
            status = TrsStatus.INTERIOR
            break
        beta = float(r @ r) / rr
        p = -r + beta * p

    def model_value(x: np.ndarray) -> float:
        return float(b @ x + 0.5 * x @ hess_vec(x))

    decrease = -model_value(xi)
    # Cauchy-point floor: fall back to the best boundary/interior point along
    # -b if the iteration (e.g. a curvature-only start) did strictly worse.
    if bnorm > 0.0:
        g = b / bnorm
        hg = hess_vec(g)
        ghg = float(g @ hg)
        if ghg > 0:
            t_star = min(radius, bnorm / ghg)
        else:
            t_star = radius
        cauchy = -t_star * g
        cdec = -model_value(cauchy)
        if cdec > decrease * (1.0 + 1e-12) + 1e-300:
            xi = cauchy
            decrease = cdec
            status = TrsStatus.BOUNDARY if t_star >= radius else status
    on_boundary = float(np.linalg.norm(xi)) >= radius * (1.0 - 1e-10)
    return TrsSolution(xi=xi, lam=0.0, on_boundary=on_boundary,
                       model_decrease=max(0.0, decrease), status=status,
                       iterations=iterations, iterate_norms=norms)


def trs_brute_oracle(model, grid_step: float = 1e-3):
    """Exhaustive polar-grid minimization for 2- and 3-dim models (tests only).

    Scans directions with angular spacing ``grid_step`` and, per direction,
    takes the exact minimum of the quadratic over the radius grid
    {0, grid_step*radius, ..., radius} (the 1-d quadratic attains its grid
    minimum at an endpoint or at the grid points bracketing its vertex, so
    the scan is evaluated in closed form). Returns (xi_best, value).
    """
    b = np.asarray(model.b, dtype=np.float64).reshape(-1)
    h = np.asarray(model.h, dtype=np.float64)
    radius = float(model.radius)
    dim = b.size
    if dim not in (2, 3):
        raise InvalidInput(f"oracle supports dimensions 2 and 3, got {dim}")

    tgrid = np.arange(0.0, radius + 0.5 * grid_step * radius, grid_step * radius)
    if dim == 2:
        ang = np.arange(0.0, 2.0 * np.pi, grid_step)
        dirs = np.stack([np.cos(ang), np.sin(ang)])
        val, xi = _best_over_directions(b, h, dirs, radius, tgrid)
        return xi, val

    theta = np.arange(0.0, np.pi + grid_step, grid_step)
    phi = np.arange(0.0, 2.0 * np.pi, grid_step)
    cphi, sphi = np.cos(phi), np.sin(phi)
    st, ct = np.sin(theta), np.cos(theta)
    step = grid_step * radius
    scan = _compiled_scan3d()
    if scan is not None:
        val, t_best, i, j = scan(b, h, radius, step, cphi, sphi, st, ct)
        xi = t_best * np.array([st[i] * cphi[j], st[i] * sphi[j], ct[i]])
        return xi, float(val)

    best_val = 0.0
    best_xi = np.zeros(3)
    chunk = max(1, 200_000 // phi.size)
    for lo in range(0, theta.size, chunk):
        hi = min(lo + chunk, theta.size)
        dirs = np.empty((3, (hi - lo) * phi.size))
        dirs[0] = np.outer(st[lo:hi], cphi).ravel()
        dirs[1] = np.outer(st[lo:hi], sphi).ravel()
        dirs[2] = np.repeat(ct[lo:hi], phi.size)
        val, xi = _best_over_directions(b, h, dirs, radius, tgrid)
        if val < best_val:
            best_val, best_xi = val, xi
    return best_xi, best_val


_SCAN3D = None


def _compiled_scan3d():
    """JIT-compiled spherical scan (numba), or None when numba is missing."""
    global _SCAN3D
    if _SCAN3D is not None:
        return _SCAN3D if _SCAN3D is not False else None
    try:
        import numba
    except ImportError:
        _SCAN3D = False
        return None

    @numba.njit(cache=False)
    def scan3d(b, h, radius, step, cphi, sphi, st, ct):
        best_val = 0.0
        best_t = 0.0
        best_i = 0
        best_j = 0
        h00, h01, h02 = h[0, 0], h[0, 1], h[0, 2]
        h11, h12, h22 = h[1, 1], h[1, 2], h[2, 2]
        b0, b1, b2 = b[0], b[1], b[2]
        for i in range(st.size):
            sti = st[i]
            cti = ct[i]
            for j in range(cphi.size):
                d0 = sti * cphi[j]
                d1 = sti * sphi[j]
                d2 = cti
                alpha = b0 * d0 + b1 * d1 + b2 * d2
                beta = (h00 * d0 * d0 + h11 * d1 * d1 + h22 * d2 * d2
                        + 2.0 * (h01 * d0 * d1 + h02 * d0 * d2 + h12 * d1 * d2))
                v = alpha * radius + 0.5 * beta * radius * radius
                tbest = radius
                if beta > 0.0:
                    tv = -alpha / beta
                    if tv < 0.0:
                        tv = 0.0
                    elif tv > radius:
                        tv = radius
                    lo = np.floor(tv / step) * step
                    hi = lo + step
                    if hi > radius:
                        hi = radius
                    v1 = alpha * lo + 0.5 * beta * lo * lo
                    v2 = alpha * hi + 0.5 * beta * hi * hi
                    if v1 < v:
                        v = v1
                        tbest = lo
                    if v2 < v:
                        v = v2
                        tbest = hi
                if v > 0.0:
                    v = 0.0
                    tbest = 0.0
                if v < best_val:
                    best_val = v
                    best_t = tbest
                    best_i = i
                    best_j = j
        return best_val, best_t, best_i, best_j

    _SCAN3D = scan3d
    return scan3d


def _best_over_directions(b, h, dirs, radius, tgrid):
    """Exact minimum of the model over the (direction grid) x (radius grid).

    Per direction the model is a 1-d quadratic in the radius, so its minimum
    over the uniform radius grid sits at an endpoint or at the grid points
    bracketing the interior vertex; those candidates are evaluated in closed
    form instead of scanning every radius.
    """
    alpha = b @ dirs
    beta = np.sum(dirs * (h @ dirs), axis=0)
    step = tgrid[1] - tgrid[0] if tgrid.size > 1 else radius
    vals = alpha * radius + (0.5 * radius * radius) * beta
    with np.errstate(divide="ignore", invalid="ignore"):
        t_vertex = np.where(beta > 0, -alpha / np.where(beta > 0, beta, 1.0),
                            radius)
    np.clip(t_vertex, 0.0, radius, out=t_vertex)
    lower = np.floor(t_vertex / step) * step
    upper = np.minimum(lower + step, radius)
    np.minimum(vals, alpha * lower + 0.5 * beta * lower * lower, out=vals)
    np.minimum(vals, alpha * upper + 0.5 * beta * upper * upper, out=vals)
    np.minimum(vals, 0.0, out=vals)
    k = int(np.argmin(vals))
    # Ties (e.g. a zero model) resolve toward the smallest radius.
    cands = np.array([0.0, lower[k], upper[k], radius])
    cv = alpha[k] * cands + 0.5 * beta[k] * cands * cands
    t_best = float(cands[int(np.argmin(cv))])
    return float(vals[k]), t_best * dirs[:, k]
