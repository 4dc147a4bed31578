import numpy as np
import pytest

from quasispline.functions import (
    FieldFunction,
    Plain,
    PolynomialFunction,
    Pullback,
    Ridge,
    TensorTrig,
    as_function,
    make_function,
    ridge_family,
)
from quasispline.domains import unit_cube
from quasispline.multiscale import quasi_interpolant
from quasispline.polynomials import Polynomial


def fd(f, x, axis, h=1e-6):
    e = np.zeros(x.shape[1])
    e[axis] = h
    return (f(x + e) - f(x - e)) / (2 * h)


@pytest.mark.parametrize("kind", ["cusp", "step"])
def test_ridge_derivative_matches_finite_difference(kind, rng):
    f = Ridge(1.75, 0.4, (0.6, 0.8), kind)
    x = rng.random((50, 2))
    x = x[np.abs(x @ [0.6, 0.8] - 0.4) > 1e-3]
    for axis, lam in enumerate([(1, 0), (0, 1)]):
        np.testing.assert_allclose(f.derivative(lam)(x), fd(f, x, axis), rtol=1e-5, atol=1e-7)


def test_tensor_trig_derivative(rng):
    f = TensorTrig((1.0, 2.0), (0.3, 0.1))
    x = rng.random((30, 2))
    np.testing.assert_allclose(f.derivative((0, 1))(x), fd(f, x, 1), rtol=1e-6, atol=1e-8)


def test_pullback_and_its_inverse_cancel(rng):
    f = TensorTrig((1.0,), (0.3,))
    g = Pullback(Pullback(f, 0.5, (0.2,)), 0.5, (0.2,), inverse=True)
    x = rng.random((20, 1))
    np.testing.assert_allclose(g(x), f(x), atol=1e-14)
    np.testing.assert_allclose(g.derivative((1,))(x), f.derivative((1,))(x), atol=1e-12)


def test_arithmetic_combinations(rng):
    f, g = TensorTrig((1.0,), (0.0,)), PolynomialFunction(Polynomial(1, 1, {(1,): 2.0}))
    h = f - 3.0 * g
    x = rng.random((10, 1))
    np.testing.assert_allclose(h(x), f(x) - 6 * x[:, 0], atol=1e-14)
    np.testing.assert_allclose(h.derivative((1,))(x), f.derivative((1,))(x) - 6, atol=1e-14)


def test_field_function_differentiates(rng):
    F = quasi_interpolant(TensorTrig((1.0,), (0.3,)), unit_cube(1), 4, 3)
    x = rng.uniform(0.1, 0.9, (20, 1))
    np.testing.assert_allclose(FieldFunction(F).derivative((1,))(x), F.eval(x, (1,)))


def test_plain_function_has_no_derivative():
    f = as_function(lambda x: x[:, 0] ** 2)
    assert isinstance(f, Plain)
    with pytest.raises(TypeError):
        f.derivative((1,))


def test_ridge_family_anchors_avoid_dyadic_points():
    for d in (1, 2):
        for r in ridge_family(d, 0.75, 6):
            assert np.linalg.norm(r.direction) > 0
            assert abs(r.anchor * 2**20 - round(r.anchor * 2**20)) > 1e-6


def test_make_function_catalog():
    assert isinstance(make_function({"kind": "cusp", "beta": 0.5}, 2), Ridge)
    assert isinstance(make_function({"kind": "tensor-trig"}, 1), TensorTrig)
    p = make_function({"kind": "polynomial", "degree": 1, "coeffs": [1, 2]}, 1)
    assert p(np.array([[1.0]]))[0] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        make_function({"kind": "noise"}, 1)
