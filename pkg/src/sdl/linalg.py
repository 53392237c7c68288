"""Small-dense symmetric linear algebra primitives.

Everything here operates on plain float64 numpy arrays (row-major). The
eigensolver is a cyclic Jacobi iteration: slower than LAPACK but simple,
robust, and more than adequate for the matrix sizes this package touches
(a few hundred at most).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SingularMatrix
from .rng import make_rng

# Module tolerances; callers may override per call.
SYMMETRY_TOL = 1e-10
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
PSD_RCOND = 1e-12
BASIS_TOL = 1e-10

_COMPLEMENT_SEED = 0x5D1C0FFEE


@dataclass
class SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are ascending; ``eigenvectors`` has the matching
    orthonormal eigenvectors as columns, so
    ``eigenvectors @ diag(eigenvalues) @ eigenvectors.T`` reconstructs the
    input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(m: np.ndarray, tol: float) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    if float(np.max(np.abs(m - m.T))) > tol * scale:
        raise InvalidInput("matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


def sym_eig(m: np.ndarray, *, symmetry_tol: float = SYMMETRY_TOL,
            off_tol: float = JACOBI_OFF_TOL,
            max_sweeps: int = JACOBI_MAX_SWEEPS) -> SymEig:
    """Eigendecompose a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away every off-diagonal pair (p, q) in row-cyclic order
    until the off-diagonal Frobenius norm drops below ``off_tol`` times the
    Frobenius norm of the input, or ``max_sweeps`` sweeps have run.
    """
    a = _check_symmetric(m, symmetry_tol)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return SymEig(np.array([a[0, 0]]), v)

    norm_f = float(np.linalg.norm(a))
    if norm_f == 0.0:
        return SymEig(np.zeros(n), v)
    threshold = off_tol * norm_f

    def off_norm() -> float:
        return float(np.sqrt(max(0.0, np.sum(a * a) - np.sum(np.diag(a) ** 2))))

    for _ in range(max_sweeps):
        if off_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 0.1 * threshold / n:
                    continue
                # Classic symmetric Schur rotation (Golub & Van Loan 8.5).
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = c * v[:, p] - s * v[:, q]
                vq = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = vp, vq

    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return SymEig(eigenvalues[order], v[:, order])


def inv_sqrt_psd(m: np.ndarray, *, rcond: float = PSD_RCOND) -> np.ndarray:
    """Inverse square root of a symmetric positive definite matrix.

    Returns R with R @ m @ R = I. Raises ``SingularMatrix`` when the
    smallest eigenvalue falls below ``rcond`` times the largest.
    """
    eig = sym_eig(m)
    lam_max = float(eig.eigenvalues[-1])
    lam_min = float(eig.eigenvalues[0])
    if lam_max <= 0.0 or lam_min <= rcond * lam_max:
        raise SingularMatrix(
            f"matrix is numerically singular (smallest eigenvalue {lam_min:.3e}, "
            f"largest {lam_max:.3e})"
        )
    v = eig.eigenvectors
    return (v / np.sqrt(eig.eigenvalues)) @ v.T


def orthonormal_complement_basis(v: np.ndarray, *, tol: float = BASIS_TOL,
                                 seed: int = _COMPLEMENT_SEED) -> np.ndarray:
    """Orthonormal basis U for the orthogonal complement of range(V).

    V must be n-by-l with orthonormal columns and l < n. The complement is
    built by Gram-Schmidt on [V | G] for seeded Gaussian columns G, with a
    re-orthogonalization pass, so the result is deterministic.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    if v.ndim != 2:
        raise InvalidInput("expected a 2-d array of basis columns")
    n, ell = v.shape
    if ell >= n:
        raise InvalidInput(f"need fewer columns than rows, got {v.shape}")
    gram_err = float(np.max(np.abs(v.T @ v - np.eye(ell)))) if ell else 0.0
    if gram_err > tol:
        raise InvalidInput("columns are not orthonormal (possibly rank deficient)")

    rng = make_rng(seed)
    u = np.empty((n, n - ell))
    have = 0
    attempts = 0
    while have < n - ell:
        g = rng.standard_normal(n)
        # Two projection passes keep orthogonality near machine precision.
        for _ in range(2):
            if ell:
                g -= v @ (v.T @ g)
            if have:
                g -= u[:, :have] @ (u[:, :have].T @ g)
        norm = float(np.linalg.norm(g))
        attempts += 1
        if norm < 1e-8:
            if attempts > 8 * n:
                raise InvalidInput("could not complete basis; input looks rank deficient")
            continue
        u[:, have] = g / norm
        have += 1
    return u
