"""Objective, derivatives, and sphere-manifold operations.

The objective is the smoothed l1 surrogate

    f(q) = (1/p) * sum_k h_mu(q . y_k),    h_mu(z) = mu * log cosh(z / mu),

minimized over unit vectors q. Its Euclidean derivatives are

    grad  = (1/p) * sum_k tanh(q.y_k / mu) y_k
    hess  = (1/p) * sum_k (1/mu) (1 - tanh^2(q.y_k / mu)) y_k y_k^T   (PSD)

and the Riemannian versions on the sphere are the tangent projections

    rgrad = P grad,    rhess = P (hess - (grad . q) I) P,   P = I - q q^T.

A trust-region step minimizes the second-order tangent model of f composed
with the exponential map; ``build_trs_model`` expresses that model in an
orthonormal tangent basis for the exact subproblem solver, while
``riem_hess_operator`` exposes it matrix-free for truncated CG.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInput
from .linalg import orthonormal_complement_basis

EXP_MAP_ZERO_TOL = 1e-14

# Distance-to-axis thresholds separating the strong-convexity, large-gradient
# and negative-curvature zones of the landscape (for smoothing mu).
REGION_CONVEX_RADIUS_FACTOR = 1.0 / (4.0 * np.sqrt(2.0))   # times mu
REGION_GRADIENT_RADIUS = 1.0 / (20.0 * np.sqrt(5.0))


class Region(str, Enum):
    """Landscape zone by distance from the nearest signed coordinate axis."""

    R_I = "R_I"      # strongly convex cap around a minimizer
    R_II = "R_II"    # nonvanishing radial gradient
    R_III = "R_III"  # negative curvature toward the equator


def surrogate_eval(z, mu: float):
    """Value and first two derivatives of h_mu(z) = mu log cosh(z/mu).

    Evaluated in the overflow-safe form
    h_mu(z) = |z| - mu log 2 + mu log1p(exp(-2|z|/mu)), elementwise over
    arrays. Returns (h, hdot, hddot) with hdot = tanh(z/mu) and
    hddot = (1 - tanh^2(z/mu)) / mu.
    """
    if mu <= 0:
        raise InvalidInput(f"mu must be positive, got {mu}")
    z = np.asarray(z, dtype=np.float64)
    az = np.abs(z)
    h = az - mu * np.log(2.0) + mu * np.log1p(np.exp(-2.0 * az / mu))
    t = np.tanh(z / mu)
    hdd = (1.0 - t * t) / mu
    if z.ndim == 0:
        return float(h), float(t), float(hdd)
    return h, t, hdd


@dataclass(frozen=True)
class Objective:
    """Smoothed sparsity objective over the sphere for a data matrix y_hat."""

    y_hat: np.ndarray
    mu: float

    def __post_init__(self):
        y = np.asarray(self.y_hat, dtype=np.float64)
        if y.ndim != 2 or y.shape[1] < 1:
            raise InvalidInput(f"y_hat must be n-by-p with p >= 1, got {y.shape}")
        if self.mu <= 0:
            raise InvalidInput(f"mu must be positive, got {self.mu}")
        object.__setattr__(self, "y_hat", y)

    @property
    def dim(self) -> int:
        return self.y_hat.shape[0]

    @property
    def num_samples(self) -> int:
        return self.y_hat.shape[1]


def _check_point(obj: Objective, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != obj.dim:
        raise InvalidInput(f"point has dim {q.shape[0]}, data has dim {obj.dim}")
    return q


def normalize_sphere(v: np.ndarray) -> np.ndarray:
    """Project a nonzero vector onto the unit sphere."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidInput("cannot normalize a zero or non-finite vector")
    return v / norm


def random_sphere_point(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere (normalized Gaussian)."""
    while True:
        v = rng.standard_normal(n)
        if np.linalg.norm(v) > 1e-12:
            return normalize_sphere(v)


def project_tangent(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of v onto the tangent space at q."""
    return v - q * float(q @ v)


def objective_value(obj: Objective, q: np.ndarray) -> float:
    q = _check_point(obj, q)
    h, _, _ = surrogate_eval(q @ obj.y_hat, obj.mu)
    return float(np.mean(h))


def euclid_grad(obj: Objective, q: np.ndarray) -> np.ndarray:
    q = _check_point(obj, q)
    t = np.tanh((q @ obj.y_hat) / obj.mu)
    return obj.y_hat @ t / obj.num_samples


def euclid_hess(obj: Objective, q: np.ndarray) -> np.ndarray:
    """Full n-by-n Euclidean Hessian (PSD sum of scaled outer products)."""
    q = _check_point(obj, q)
    t = np.tanh((q @ obj.y_hat) / obj.mu)
    w = (1.0 - t * t) / obj.mu
    e = obj.y_hat * np.sqrt(w / obj.num_samples)
    h = e @ e.T
    return 0.5 * (h + h.T)


def euclid_hess_vec(obj: Objective, q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-free Euclidean Hessian-vector product."""
    q = _check_point(obj, q)
    t = np.tanh((q @ obj.y_hat) / obj.mu)
    w = (1.0 - t * t) / obj.mu
    return obj.y_hat @ (w * (obj.y_hat.T @ v)) / obj.num_samples


def riem_grad(obj: Objective, q: np.ndarray) -> np.ndarray:
    """Riemannian gradient: tangent projection of the Euclidean gradient."""
    q = _check_point(obj, q)
    return project_tangent(q, euclid_grad(obj, q))


def riem_hess_operator(obj: Objective, q: np.ndarray):
    """Riemannian Hessian as a matrix-free operator on tangent vectors.

    Returns ``apply(v)`` computing P(hess @ v) - (grad . q) v for tangent v.
    The tanh weights are precomputed, so repeated applications cost one pass
    over the data each.
    """
    q = _check_point(obj, q)
    t = np.tanh((q @ obj.y_hat) / obj.mu)
    w = (1.0 - t * t) / obj.mu
    grad = obj.y_hat @ t / obj.num_samples
    radial = float(grad @ q)
    y = obj.y_hat
    p = obj.num_samples

    def apply(v: np.ndarray) -> np.ndarray:
        hv = y @ (w * (y.T @ v)) / p
        return project_tangent(q, hv) - radial * v

    return apply


@dataclass
class TrsModel:
    """Quadratic tangent model in an orthonormal basis, plus a radius.

    ``b`` is the reduced gradient U^T grad f, ``h`` the reduced Riemannian
    Hessian U^T (hess - (grad.q) I) U, and ``basis`` the n-by-(n-1)
    tangent basis U at the base point.
    """

    b: np.ndarray
    h: np.ndarray
    basis: np.ndarray
    radius: float
    base_point: np.ndarray | None = None
    f_value: float | None = None


def tangent_basis(q: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the tangent space at q."""
    return orthonormal_complement_basis(q.reshape(-1, 1))


def build_trs_model(obj: Objective, q: np.ndarray, radius: float) -> TrsModel:
    """Assemble the reduced trust-region model at q with the given radius."""
    if radius <= 0:
        raise InvalidInput(f"radius must be positive, got {radius}")
    q = _check_point(obj, q)
    u = tangent_basis(q)
    grad = euclid_grad(obj, q)
    hess = euclid_hess(obj, q)
    b = u.T @ grad
    h = u.T @ hess @ u - float(grad @ q) * np.eye(u.shape[1])
    h = 0.5 * (h + h.T)
    return TrsModel(b=b, h=h, basis=u, radius=float(radius), base_point=q,
                    f_value=objective_value(obj, q))


def quadratic_model_eval(obj: Objective, q: np.ndarray, delta: np.ndarray) -> float:
    """Second-order tangent model of f(exp_q(delta)) at the tangent step delta."""
    q = _check_point(obj, q)
    delta = np.asarray(delta, dtype=np.float64).reshape(-1)
    grad = euclid_grad(obj, q)
    hd = euclid_hess_vec(obj, q, delta)
    quad = float(delta @ hd) - float(grad @ q) * float(delta @ delta)
    return objective_value(obj, q) + float(grad @ delta) + 0.5 * quad


def exp_map(q: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Geodesic step: exp_q(delta) = q cos|delta| + (delta/|delta|) sin|delta|."""
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    delta = np.asarray(delta, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(delta))
    if norm < EXP_MAP_ZERO_TOL:
        return q.copy()
    out = q * np.cos(norm) + (delta / norm) * np.sin(norm)
    return out / float(np.linalg.norm(out))


def parallel_translate(q: np.ndarray, delta: np.ndarray, tau: float,
                       v: np.ndarray) -> np.ndarray:
    """Parallel translation of tangent v along the geodesic t -> exp_q(t delta).

    Isometric: the result is tangent at exp_q(tau * delta) with |v| preserved.
    delta = 0 acts as the identity.
    """
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    delta = np.asarray(delta, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(delta))
    if norm < EXP_MAP_ZERO_TOL:
        return v.copy()
    s = norm * tau
    coeff = float(delta @ v) / norm
    return v + (np.cos(s) - 1.0) * coeff * (delta / norm) - np.sin(s) * coeff * q


def reparam_g(obj: Objective, w: np.ndarray):
    """Objective through the chart q(w) = (w, sqrt(1 - |w|^2)).

    Returns (g(w), grad g(w)); requires |w| < 1. Used only for landscape
    diagnostics and derivative cross-checks.
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.shape[0] != obj.dim - 1:
        raise InvalidInput(f"w must have dim {obj.dim - 1}, got {w.shape[0]}")
    nw2 = float(w @ w)
    if nw2 >= 1.0:
        raise InvalidInput("w must lie strictly inside the unit ball")
    qn = np.sqrt(1.0 - nw2)
    q = np.concatenate([w, [qn]])
    grad = euclid_grad(obj, q)
    gw = grad[:-1] - (grad[-1] / qn) * w
    return objective_value(obj, q), gw


def classify_region(q: np.ndarray, mu: float):
    """Classify q into its landscape zone, with the nearest signed axis.

    The chart axis is the coordinate of largest magnitude; the distance to
    it is the norm of the equatorial projection, |w| = sqrt(1 - q_max^2).
    Boundary ties go to the smaller region. The axis is reported 1-based
    and signed: +3 means +e_3, -1 means -e_1.
    """
    if mu <= 0:
        raise InvalidInput(f"mu must be positive, got {mu}")
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    i = int(np.argmax(np.abs(q)))
    axis = (i + 1) if q[i] >= 0 else -(i + 1)
    rest = np.delete(q, i)
    w_norm = float(np.linalg.norm(rest))
    if w_norm <= REGION_CONVEX_RADIUS_FACTOR * mu:
        return Region.R_I, axis
    if w_norm <= REGION_GRADIENT_RADIUS:
        return Region.R_II, axis
    return Region.R_III, axis
