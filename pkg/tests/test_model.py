import numpy as np
import pytest

from sdl.errors import InvalidInput
from sdl.linalg import sym_eig
from sdl.model import (make_instance, sample_bg, sample_conditioned_dictionary,
                       sample_fixed_k, sample_orthogonal_dictionary)
from sdl.rng import make_rng


def test_bg_dense_at_rate_one():
    x = sample_bg(5, 40, 1.0, make_rng(0))
    assert np.count_nonzero(x) == x.size


def test_bg_nonzero_fraction():
    x = sample_bg(20, 10000, 0.3, make_rng(1))
    frac = np.count_nonzero(x) / x.size
    assert abs(frac - 0.3) <= 0.02


def test_bg_binomial_three_sigma():
    n, p, theta = 100, 2000, 0.2
    x = sample_bg(n, p, theta, make_rng(2))
    count = np.count_nonzero(x)
    mean = n * p * theta
    sigma = np.sqrt(n * p * theta * (1 - theta))
    assert abs(count - mean) <= 3 * sigma


def test_bg_deterministic():
    assert np.array_equal(sample_bg(6, 9, 0.4, make_rng(7)),
                          sample_bg(6, 9, 0.4, make_rng(7)))


def test_bg_rejects_bad_rate():
    with pytest.raises(InvalidInput):
        sample_bg(3, 3, 0.0, make_rng(0))
    with pytest.raises(InvalidInput):
        sample_bg(3, 3, 1.5, make_rng(0))


def test_fixed_k_exact_counts():
    x = sample_fixed_k(9, 300, 4, make_rng(3))
    assert np.all(np.count_nonzero(x, axis=0) == 4)


def test_fixed_k_dense_when_k_equals_n():
    x = sample_fixed_k(5, 20, 5, make_rng(4))
    assert np.count_nonzero(x) == x.size


def test_fixed_k_support_uniform():
    n, p = 5, 50000
    x = sample_fixed_k(n, p, 1, make_rng(5))
    freq = np.count_nonzero(x, axis=1) / p
    assert np.max(np.abs(freq - 1.0 / n)) <= 0.01


def test_fixed_k_rejects_large_k():
    with pytest.raises(InvalidInput):
        sample_fixed_k(4, 10, 5, make_rng(0))


def test_orthogonal_dictionary_n1():
    a = sample_orthogonal_dictionary(1, make_rng(6))
    assert a.shape == (1, 1) and abs(abs(a[0, 0]) - 1.0) <= 1e-12


def test_orthogonal_dictionary_is_orthogonal():
    for seed in range(5):
        a = sample_orthogonal_dictionary(7, make_rng(seed))
        assert np.max(np.abs(a.T @ a - np.eye(7))) <= 1e-12


def test_orthogonal_dictionary_haar_symmetry():
    rng = make_rng(8)
    means = np.zeros((3, 3))
    reps = 10000
    for _ in range(reps):
        means += sample_orthogonal_dictionary(3, rng)
    means /= reps
    assert np.max(np.abs(means)) <= 0.05


def test_conditioned_dictionary_kappa_one_is_orthogonal():
    a = sample_conditioned_dictionary(6, 1.0, make_rng(9))
    assert np.max(np.abs(a.T @ a - np.eye(6))) <= 1e-12


def test_conditioned_dictionary_condition_number():
    a = sample_conditioned_dictionary(8, 10.0, make_rng(10))
    eig = sym_eig(a.T @ a)
    sigma = np.sqrt(eig.eigenvalues)
    assert abs(sigma[-1] / sigma[0] - 10.0) <= 1e-6
    assert abs(np.linalg.det(a)) > 0


def test_conditioned_dictionary_rejects_kappa_below_one():
    with pytest.raises(InvalidInput):
        sample_conditioned_dictionary(4, 0.5, make_rng(0))


def test_make_instance_identity_dictionary():
    x0 = sample_bg(4, 10, 0.5, make_rng(11))
    inst = make_instance(np.eye(4), x0)
    assert np.array_equal(inst.y, x0)


def test_make_instance_zero_coefficients():
    inst = make_instance(np.eye(3), np.zeros((3, 7)))
    assert not inst.y.any()


def test_make_instance_bit_exact_product():
    rng = make_rng(12)
    a0 = sample_orthogonal_dictionary(6, rng)
    x0 = sample_bg(6, 50, 0.3, rng)
    inst = make_instance(a0, x0)
    assert np.array_equal(inst.y, a0 @ x0)


def test_make_instance_shape_mismatch():
    with pytest.raises(InvalidInput):
        make_instance(np.eye(3), np.zeros((4, 5)))
