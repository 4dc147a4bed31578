from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasispline.bsplines import (
    basis_eval,
    bspline_build,
    psi,
    refinement_check,
    refinement_coeffs_exact,
    tensor_weight_exact,
)


def cox_de_boor(m, t):
    """Cardinal B-spline of order m (degree m) on knots 0..m+1 by direct recursion."""
    t = np.asarray(t, dtype=float)

    def rec(i, p):
        if p == 0:
            return ((t >= i) & (t < i + 1)).astype(float)
        return (t - i) / p * rec(i, p - 1) + (i + p + 1 - t) / p * rec(i + 1, p - 1)

    return rec(0, m)


@pytest.mark.parametrize("m", range(6))
def test_matches_cox_de_boor_recursion(m, rng):
    t = rng.uniform(-1, m + 2, 500)
    np.testing.assert_allclose(bspline_build(m)(t), cox_de_boor(m, t), atol=1e-13)


def test_order_zero_is_unit_interval_indicator():
    B = bspline_build(0)
    np.testing.assert_array_equal(B(np.array([-0.1, 0.0, 0.5, 0.999, 1.0, 1.5])), [0, 1, 1, 1, 0, 0])


def test_order_one_is_hat():
    B = bspline_build(1)
    assert B.pieces == ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(-1)))
    assert B(np.array([1.0]))[0] == 1.0
    np.testing.assert_allclose(B(np.array([0.25, 1.5])), [0.25, 0.5])


@pytest.mark.parametrize("m", range(5))
def test_unit_mass(m):
    assert bspline_build(m).integral() == 1


def test_refinement_coefficients():
    assert refinement_coeffs_exact(0) == (1, 1)
    assert refinement_coeffs_exact(1) == (Fraction(1, 2), 1, Fraction(1, 2))
    for m in range(7):
        a = refinement_coeffs_exact(m)
        assert a == tuple(Fraction(comb(m + 1, i), 2**m) for i in range(m + 2))
        assert sum(a[0::2]) == 1 and sum(a[1::2]) == 1


@given(st.integers(0, 4), st.lists(st.integers(0, 5), min_size=1, max_size=3))
def test_tensor_weight_is_product(m, mm):
    mm = [min(v, m + 1) for v in mm]
    expect = Fraction(1)
    for v in mm:
        expect *= Fraction(comb(m + 1, v), 2**m)
    assert tensor_weight_exact(m, mm) == expect


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("d", [1, 2])
def test_refinement_identity(m, d, rng):
    x = rng.uniform(-0.5, m + 1.5, (300, d))
    assert np.max(np.abs(refinement_check(m, d, x))) <= 1e-12


def test_refinement_identity_order_zero_off_knots(rng):
    x = np.floor(rng.uniform(-1, 2, (300, 2)) * 2) / 2 + rng.uniform(0.01, 0.49, (300, 2))
    assert np.max(np.abs(refinement_check(0, 2, x))) <= 1e-12


def test_basis_support(rng):
    m, k, nu = 2, 3, np.array([1, -2])
    x = rng.uniform(-2, 2, (2000, 2))
    y = x * 2**k - nu
    outside = np.any((y < 0) | (y > m + 1), axis=1)
    assert np.all(basis_eval(m, 2, k, nu, x[outside]) == 0)


def test_hat_peak():
    assert basis_eval(1, 1, 0, [0], np.array([[1.0]]))[0] == 1.0


def test_derivative_scaling_is_level_independent():
    ref = None
    for k in range(5):
        x = (np.linspace(0, 4, 4001) / 2**k)[:, None]
        val = np.max(np.abs(basis_eval(3, 1, k, [0], x, (2,)))) / 2 ** (2 * k)
        ref = val if ref is None else ref
        assert val == pytest.approx(ref, rel=0.05)


def test_psi_derivative_matches_finite_difference(rng):
    y = rng.uniform(0.1, 3.9, (50, 2))
    h = 1e-6
    fd = (psi(3, y + [h, 0]) - psi(3, y - [h, 0])) / (2 * h)
    np.testing.assert_allclose(psi(3, y, (1, 0)), fd, atol=1e-7)


@pytest.mark.parametrize("m,d,k", [(0, 1, 2), (1, 2, 1), (2, 2, 3), (3, 1, 4)])
def test_partition_of_unity(m, d, k, rng):
    x = rng.random((200, d))
    cell = np.floor(x * 2**k).astype(int)
    total = np.zeros(len(x))
    for i in range(len(x)):
        for off in np.ndindex(*(m + 1,) * d):
            total[i] += basis_eval(m, d, k, cell[i] - np.array(off), x[i : i + 1])[0]
    assert np.max(np.abs(total - 1)) <= 1e-12


def test_derivative_above_order_is_rejected():
    with pytest.raises(ValueError):
        basis_eval(1, 1, 0, [0], [[0.5]], (2,))
