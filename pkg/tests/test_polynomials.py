from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasispline.polynomials import (
    Polynomial,
    affine_matrix,
    derivative_matrix,
    lagrange_basis,
    lattice_interpolate,
    multi_indices,
    n_monomials,
    poly_derivative,
    poly_eval,
)


def _random_poly(rng, d, degree):
    return Polynomial.from_vector(d, degree, rng.uniform(-1, 1, n_monomials(d, degree)))


def test_multi_index_count_matches_binomial():
    for d in range(1, 4):
        for degree in range(5):
            assert len(multi_indices(d, degree)) == comb(d + degree, d)


def test_all_ones_quadratic_in_two_variables_at_one_one():
    p = Polynomial(2, 2, {lam: 1.0 for lam in multi_indices(2, 2)})
    assert poly_eval(p, np.array([1.0, 1.0])) == pytest.approx(6.0)


def test_monomial_degree_bound_is_enforced():
    with pytest.raises(ValueError):
        Polynomial(1, 1, {(2,): 1.0})


def test_eval_matches_explicit_formula(rng):
    p = Polynomial(2, 3, {(0, 0): 1.5, (2, 1): -2.0, (0, 3): 0.5})
    x = rng.random((20, 2))
    expect = 1.5 - 2.0 * x[:, 0] ** 2 * x[:, 1] + 0.5 * x[:, 1] ** 3
    np.testing.assert_allclose(poly_eval(p, x), expect, rtol=1e-14)


@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**31))
def test_derivative_of_order_above_degree_vanishes(d, degree, seed):
    rng = np.random.default_rng(seed)
    p = _random_poly(rng, d, degree)
    lam = tuple(rng.multinomial(degree + 1, [1 / d] * d))
    assert not poly_derivative(p, lam).coeffs


def test_derivative_matches_finite_difference(rng):
    p = _random_poly(rng, 2, 4)
    x = rng.random((10, 2))
    h = 1e-6
    fd = (poly_eval(p, x + [h, 0]) - poly_eval(p, x - [h, 0])) / (2 * h)
    np.testing.assert_allclose(poly_eval(poly_derivative(p, (1, 0)), x), fd, atol=1e-7)


def test_derivative_matrix_agrees_with_poly_derivative(rng):
    p = _random_poly(rng, 2, 3)
    M = derivative_matrix(2, 3, (1, 1))
    np.testing.assert_allclose(M @ p.vector(), poly_derivative(p, (1, 1)).vector(3), atol=1e-14)


def test_affine_matrix_composes_with_evaluation(rng):
    p = _random_poly(rng, 2, 3)
    scale, shift = [2.0, 0.5], [-1.0, 0.25]
    q = Polynomial.from_vector(2, 3, affine_matrix(2, 3, scale, shift) @ p.vector())
    x = rng.random((15, 2))
    np.testing.assert_allclose(poly_eval(q, x), poly_eval(p, x * scale + shift), atol=1e-12)


def test_lattice_interpolation_recovers_linear_polynomial():
    q = Polynomial(2, 1, {(0, 0): 3.0, (1, 0): 1.0, (0, 1): -2.0})
    vals = {lam: float(poly_eval(q, np.array(lam, float))) for lam in multi_indices(2, 1)}
    r = lattice_interpolate(2, 1, vals)
    np.testing.assert_allclose(r.vector(), q.vector(), atol=1e-14)


@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**31))
def test_lattice_interpolation_round_trip(d, degree, seed):
    rng = np.random.default_rng(seed)
    p = _random_poly(rng, d, degree)
    vals = {lam: float(poly_eval(p, np.array(lam, float))) for lam in multi_indices(d, degree)}
    np.testing.assert_allclose(lattice_interpolate(d, degree, vals).vector(), p.vector(), atol=1e-9)


def test_lagrange_basis_linear_one_dimension():
    pi0, pi1 = lagrange_basis(1, 1)
    np.testing.assert_allclose(pi0.vector(), [1.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(pi1.vector(), [0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("d,degree", [(1, 3), (2, 2), (3, 2)])
def test_lagrange_basis_is_cardinal_and_sums_to_one(d, degree, rng):
    basis = lagrange_basis(d, degree)
    lattice = multi_indices(d, degree)
    for i, pi in enumerate(basis):
        for j, mu in enumerate(lattice):
            assert poly_eval(pi, np.array(mu, float)) == pytest.approx(float(i == j), abs=1e-12)
    x = rng.uniform(-1, degree + 1, (100, d))
    np.testing.assert_allclose(sum(poly_eval(pi, x) for pi in basis), 1.0, atol=1e-10)
