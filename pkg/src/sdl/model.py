"""Synthetic problem instances: sparse coefficients, dictionaries, observations.

Coefficient models:

* Bernoulli-Gaussian with rate theta: each entry is B * Z with
  B ~ Ber(theta), Z ~ N(0, 1), all independent.
* Fixed sparsity k: every column has exactly k nonzeros on a uniformly
  random support, values i.i.d. N(0, 1).

Dictionaries are square. ``sample_orthogonal_dictionary`` draws from the
Haar measure; ``sample_conditioned_dictionary`` builds a complete matrix
with a prescribed condition number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass
class ProblemInstance:
    """Ground-truth dictionary/coefficients and the observation y = a0 @ x0."""

    a0: np.ndarray
    x0: np.ndarray
    y: np.ndarray
    sparsity_spec: tuple[str, float]  # ("theta", rate) or ("k", count)
    seed: int | None = None


def sample_bg(n: int, p: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    """n-by-p matrix of i.i.d. Bernoulli(theta)-Gaussian entries.

    theta = 1 is allowed and degenerates to a dense Gaussian matrix.
    """
    if not 0.0 < theta <= 1.0:
        raise InvalidInput(f"theta must lie in (0, 1], got {theta}")
    if n < 1 or p < 1:
        raise InvalidInput("dimensions must be positive")
    z = rng.standard_normal((n, p))
    mask = rng.random((n, p)) < theta
    return np.where(mask, z, 0.0)


def sample_fixed_k(n: int, p: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """n-by-p matrix whose every column has exactly k N(0,1) nonzeros.

    Supports are uniform over size-k subsets of the rows (independent
    partial shuffles per column).
    """
    if not 1 <= k <= n:
        raise InvalidInput(f"k must lie in [1, {n}], got {k}")
    if p < 1:
        raise InvalidInput("p must be positive")
    idx = rng.permuted(np.tile(np.arange(n), (p, 1)), axis=1)[:, :k]
    x = np.zeros((n, p))
    cols = np.repeat(np.arange(p), k)
    x[idx.ravel(), cols] = rng.standard_normal(p * k)
    return x


def sample_orthogonal_dictionary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal n-by-n matrix.

    QR of a Gaussian matrix with the R diagonal sign fixed (Mezzadri 2007),
    which makes the distribution exactly Haar rather than QR-biased.
    """
    if n < 1:
        raise InvalidInput("n must be positive")
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def sample_conditioned_dictionary(n: int, kappa: float,
                                  rng: np.random.Generator) -> np.ndarray:
    """Complete n-by-n dictionary with condition number ``kappa``.

    Built as U diag(sigma) V^T with Haar-orthogonal U, V and singular
    values log-spaced from 1 down to 1/kappa.
    """
    if kappa < 1.0:
        raise InvalidInput(f"condition number must be >= 1, got {kappa}")
    u = sample_orthogonal_dictionary(n, rng)
    v = sample_orthogonal_dictionary(n, rng)
    sigma = np.logspace(0.0, -np.log10(kappa), n) if kappa > 1.0 else np.ones(n)
    return (u * sigma) @ v.T


def make_instance(a0: np.ndarray, x0: np.ndarray,
                  sparsity_spec: tuple[str, float] = ("theta", float("nan")),
                  seed: int | None = None) -> ProblemInstance:
    """Bundle (a0, x0) with y = a0 @ x0."""
    a0 = np.asarray(a0, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if a0.ndim != 2 or x0.ndim != 2 or a0.shape[1] != x0.shape[0]:
        raise InvalidInput(f"shape mismatch: a0 {a0.shape}, x0 {x0.shape}")
    return ProblemInstance(a0=a0, x0=x0, y=a0 @ x0, sparsity_spec=sparsity_spec,
                           seed=seed)
