import numpy as np
import pytest

from quasispline.analysis import fit_rate
from quasispline.domains import Ball, LShape, Staircase, unit_cube
from quasispline.functions import PolynomialFunction, TensorTrig, ridge_family
from quasispline.multiscale import quasi_interpolant
from quasispline.operators import (
    StechkinOperator,
    error_probe,
    extend,
    first_admissible_level,
    interpolation_residual,
    norm_probe,
    recover,
    recovery,
    rough_inputs,
    sample,
    sample_points,
)
from quasispline.polynomials import Polynomial, n_monomials, poly_derivative, poly_eval


def points_in(D, n, rng):
    lo, hi = D.bbox
    out = np.zeros((0, D.d))
    while len(out) < n:
        x = lo + (hi - lo) * rng.random((4 * n, D.d))
        out = np.concatenate([out, x[D.contains(x)]])
    return out[:n]


def random_poly(rng, d, degree):
    return Polynomial.from_vector(d, degree, rng.uniform(-1, 1, n_monomials(d, degree)))


def test_first_admissible_level():
    assert first_admissible_level(unit_cube(2)) == 2
    assert first_admissible_level(Staircase()) >= 1


@pytest.mark.parametrize("D", [unit_cube(2), Ball((0.5, 0.5), 0.5), LShape()])
def test_extension_reproduces_polynomials(D, rng):
    p = random_poly(rng, 2, 1)
    E = extend(p, D, 2, 5)
    x = points_in(D, 300, rng)
    np.testing.assert_allclose(E(x), poly_eval(p, x), atol=1e-9)
    outside = rng.uniform(-1, 2, (300, 2))
    assert np.all(np.isfinite(E(outside)))


def test_extension_equals_finest_quasi_interpolant_on_domain(rng):
    D = Ball((0.5, 0.5), 0.5)
    f = ridge_family(2, 0.75, 1)[0]
    E = extend(f, D, 2, 5)
    x = points_in(D, 300, rng)
    np.testing.assert_allclose(E(x), quasi_interpolant(f, D, 5, 2)(x), atol=1e-10)


def test_extension_vanishes_outside_support_box(rng):
    D = unit_cube(1)
    E = extend(ridge_family(1, 0.75, 1)[0], D, 2, 6)
    lo, hi = E.support_box(D)
    x = np.concatenate([rng.uniform(lo[0] - 1, lo[0], (100, 1)), rng.uniform(hi[0], hi[0] + 1, (100, 1))])
    np.testing.assert_array_equal(E(x), 0.0)


def test_extension_rejects_bad_levels():
    with pytest.raises(ValueError):
        extend(lambda x: x[:, 0], unit_cube(2), 2, 5, K0=1)
    with pytest.raises(ValueError):
        extend(lambda x: x[:, 0], unit_cube(2), 2, 1)


def test_sample_points_layout():
    S = sample_points(unit_cube(1), 2, 2)
    np.testing.assert_allclose(S.points[:, :, 0], [[(1 + 0.25) / 4, (1 + 0.5) / 4], [(2 + 0.25) / 4, (2 + 0.5) / 4]])
    assert S.count == 4


@pytest.mark.parametrize("D,l", [(unit_cube(1), 3), (unit_cube(2), 2), (Ball((0.5, 0.5), 0.5), 3)])
def test_interpolation_identity(D, l):
    S = sample(ridge_family(D.d, 0.75, 1)[0], sample_points(D, 4, l))
    assert interpolation_residual(S) <= 1e-9


@pytest.mark.parametrize("D", [unit_cube(2), Ball((0.5, 0.5), 0.5), Staircase()])
def test_recovery_reproduces_polynomials(D, rng):
    p = random_poly(rng, 2, 2)
    F, _ = recover(p, D, 4, 3)
    x = points_in(D, 300, rng)
    np.testing.assert_allclose(F(x), poly_eval(p, x), atol=1e-8)


def test_recovery_uses_only_sample_values(rng):
    D = unit_cube(1)
    f = ridge_family(1, 0.75, 1)[0]
    S = sample(f, sample_points(D, 4, 2))
    pts = S.points.reshape(-1, 1)

    def g(x):
        # agrees with f on the sample points only
        x = np.atleast_2d(x)
        hit = np.isclose(x[:, 0][:, None], pts[:, 0][None]).any(axis=1)
        return np.where(hit, f(x), 7.0)

    F1 = recovery(S, D)
    F2 = recovery(sample(g, sample_points(D, 4, 2)), D)
    np.testing.assert_array_equal(F1.coeffs, F2.coeffs)


def test_missing_sample_values_are_rejected():
    S = sample_points(unit_cube(1), 3, 2)
    with pytest.raises(ValueError):
        recovery(S, unit_cube(1))
    vals = np.zeros(S.points.shape[:2])
    vals[0, 0] = np.nan
    with pytest.raises(ValueError):
        recovery(S.with_values(vals), unit_cube(1))


def test_stechkin_operator_differentiates_polynomials(rng):
    D = unit_cube(2)
    p = random_poly(rng, 2, 2)
    V = StechkinOperator(D, 4, 3, 3, (1, 1))
    x = points_in(D, 200, rng)
    np.testing.assert_allclose(V.apply(p)(x), poly_eval(poly_derivative(p, (1, 1)), x), atol=1e-8)


def test_stechkin_exponent_and_validation():
    V = StechkinOperator(unit_cube(2), 3, 2, 2, (1, 0))
    assert V.exponent(1.0, 2.0) == pytest.approx(1 + 2 - 1)
    assert V.exponent(2.0, 2.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        StechkinOperator(unit_cube(2), 3, 2, 2, (3, 0))
    with pytest.raises(ValueError):
        StechkinOperator(unit_cube(2), 3, 2, 2, (1,))


def test_norm_probe_grows_like_two_to_the_k_tau():
    D = unit_cube(1)
    ks = [3, 4, 5, 6]
    norms = [norm_probe(StechkinOperator(D, k, 2, 2, (1,)), 2.0, 2.0, trials=8) for k in ks]
    tau = 1.0
    assert fit_rate(ks, norms).slope == pytest.approx(tau, abs=0.3)


def test_error_probe_is_zero_for_smooth_polynomials():
    D = unit_cube(1)
    V = StechkinOperator(D, 4, 3, 3, (1,))
    p = PolynomialFunction(Polynomial(1, 2, {(0,): 1.0, (2,): 2.0}))
    assert error_probe(V, [p], 2.0) <= 1e-9


def test_error_probe_decreases_for_smooth_input():
    D = unit_cube(1)
    f = TensorTrig((1.0,), (0.3,))
    errs = [error_probe(StechkinOperator(D, k, 3, 3, (1,)), [f], 2.0) for k in (3, 4, 5)]
    assert errs[0] > errs[1] > errs[2]


def test_rough_inputs_are_deterministic(rng):
    a = rough_inputs(unit_cube(2), 3, 2, seed=5)
    b = rough_inputs(unit_cube(2), 3, 2, seed=5)
    x = rng.random((50, 2))
    for f, g in zip(a, b):
        np.testing.assert_array_equal(f(x), g(x))
