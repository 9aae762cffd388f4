import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pkhessian import oracle, symfun


def matrices(n_max=5):
    return st.integers(1, n_max).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-3, 3, allow_nan=False))
    )


def test_sigma_of_vector_values():
    assert symfun.sigma_of_vector(np.ones(5), 3) == 10
    assert symfun.sigma_of_vector([1, 2, 3], 2) == 11
    assert symfun.sigma_of_vector([4.0, -7.0], 0) == 1


def test_sigma_of_vector_matches_subsets(rng):
    lam = rng.standard_normal(6)
    for k in range(7):
        brute = sum(math.prod(lam[list(S)]) for S in itertools.combinations(range(6), k))
        assert symfun.sigma_of_vector(lam, k) == pytest.approx(brute, rel=1e-12, abs=1e-12)


def test_sigma_of_vector_batched(rng):
    lam = rng.standard_normal((4, 3))
    out = symfun.sigma_of_vector(lam, 2)
    assert out.shape == (4,)
    assert out[1] == pytest.approx(symfun.sigma_of_vector(lam[1], 2))


@pytest.mark.parametrize("k", [-1, 4])
def test_degree_out_of_range(k):
    with pytest.raises(ValueError):
        symfun.sigma_of_vector([1, 2, 3], k)
    with pytest.raises(ValueError):
        symfun.sigma_of_matrix(np.eye(3), k)


def test_sigma_gradient_rejects_k0():
    with pytest.raises(ValueError):
        symfun.sigma_gradient(np.eye(2), 0)


def test_sigma_of_matrix_values():
    assert symfun.sigma_of_matrix(np.eye(3), 2) == 3
    assert symfun.sigma_of_matrix([[0, 1], [-1, 0]], 2) == 1
    assert symfun.sigma_of_matrix(np.eye(3), 0) == 1


def test_sigma_of_matrix_matches_minors(rng):
    A = rng.standard_normal((4, 4))
    assert symfun.sigma_of_matrix(A, 2) == pytest.approx(oracle.sigma_minor_oracle(A, 2), rel=1e-12)


def test_sigma_gradient_values(rng):
    A = rng.standard_normal((4, 4))
    np.testing.assert_array_equal(symfun.sigma_gradient(A, 1), np.eye(4))
    np.testing.assert_allclose(symfun.sigma_gradient([[1, 2], [3, 4]], 2), [[4, -3], [-2, 1]], atol=1e-14)


def test_sigma_gradient_diagonal():
    d = np.array([1.0, -2.0, 3.0, 0.5])
    for k in range(1, 5):
        G = symfun.sigma_gradient(np.diag(d), k)
        expected = [symfun.sigma_of_vector(np.delete(d, i), k - 1) for i in range(4)]
        np.testing.assert_allclose(G, np.diag(expected), atol=1e-13)


def test_identity_residuals_examples():
    for k in range(1, 4):
        res = symfun.identity_residuals(np.eye(3), k)
        assert res.euler == 0 and res.exchange == 0
    assert symfun.identity_residuals([[1, 2], [3, 4]], 2).euler == 0


def test_identity_residuals_random_5x5(rng):
    A = rng.standard_normal((1000, 5, 5))
    for k in range(1, 6):
        res = symfun.identity_residuals(A, k)
        scale = symfun.entry_scale(A, k)
        assert np.max(res.euler / scale) <= 1e-10
        assert np.max(res.exchange / scale) <= 1e-10


def test_power_sums_agree_with_recursion(rng):
    A = rng.standard_normal((50, 6, 6))
    for k in range(7):
        np.testing.assert_allclose(symfun.sigma_from_power_sums(A, k), symfun.sigma_of_matrix(A, k), rtol=1e-9, atol=1e-9)


def test_cone_membership():
    assert symfun.cone_membership([1, 1, 1], 3)
    assert symfun.cone_membership([-1, 5, 5], 2)
    assert not symfun.cone_membership([-1, 5, 5], 3)
    assert not symfun.cone_membership([-1, 0, 0], 1)


def test_zero_matrix_scale():
    assert symfun.entry_scale(np.zeros((3, 3)), 2) == 1


@settings(max_examples=60, deadline=None)
@given(matrices(), st.floats(-2, 2))
def test_homogeneity(A, t):
    n = A.shape[0]
    for k in range(n + 1):
        lhs = symfun.sigma_of_matrix(t * A, k)
        rhs = t**k * symfun.sigma_of_matrix(A, k)
        scale = (abs(t) * max(1.0, np.max(np.abs(A)))) ** k * math.comb(n, k) * math.factorial(k)
        assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-3, 3, allow_nan=False)))
def test_diagonal_consistency(lam):
    for k in range(lam.size + 1):
        assert symfun.sigma_of_matrix(np.diag(lam), k) == pytest.approx(symfun.sigma_of_vector(lam, k), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-3, 3, allow_nan=False)))
def test_cone_nesting(lam):
    n = lam.size
    for k in range(1, n + 1):
        if symfun.cone_membership(lam, k):
            assert all(symfun.cone_membership(lam, j) for j in range(1, k))


@settings(max_examples=40, deadline=None)
@given(matrices())
def test_euler_and_exchange_property(A):
    for k in range(1, A.shape[0] + 1):
        res = symfun.identity_residuals(A, k)
        scale = symfun.entry_scale(A, k)
        assert res.euler <= 1e-10 * scale * math.comb(A.shape[0], k)
        assert res.exchange <= 1e-10 * scale * math.comb(A.shape[0], k)


def test_gradient_fd_exact_for_any_step(rng):
    # each minor is affine in any single entry, so central differences carry no truncation error
    A = rng.standard_normal((4, 4))
    exact = symfun.sigma_gradient(A, 3)
    for h in (1e-1, 1e-3, 1e-5):
        fd = oracle.gradient_fd_oracle(A, 3, oracle.StencilSpec(h=h, richardson_levels=1))
        assert np.max(np.abs(fd - exact)) <= 1e-8
