import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasispline.polynomials import Polynomial, n_monomials, poly_eval
from quasispline.projection import (
    LocalProjector,
    QuadratureOrderError,
    gauss_rule,
    local_project,
    min_points,
    stability_probe,
)


@pytest.mark.parametrize("d,n,sub", [(1, 4, 0), (2, 3, 1), (3, 2, 0)])
def test_gauss_rule_weights_sum_to_one(d, n, sub):
    z, w = gauss_rule(d, n, sub)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert z.min() > 0 and z.max() < 1


@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**31))
def test_projection_reproduces_polynomials(d, degree, seed):
    rng = np.random.default_rng(seed)
    p = Polynomial.from_vector(d, degree, rng.uniform(-1, 1, n_monomials(d, degree)))
    lower = tuple(rng.uniform(-2, 2, d))
    width = tuple(rng.uniform(0.05, 3, d))
    P = LocalProjector(lower, width, degree)
    x = np.asarray(lower) + rng.random((50, d)) * np.asarray(width)
    want = poly_eval(p, x)
    got = poly_eval(local_project(P, p), x)
    assert np.max(np.abs(got - want)) <= 1e-9 * max(1.0, np.max(np.abs(want)))


def test_too_few_points_is_rejected():
    assert min_points(3) == 8
    with pytest.raises(QuadratureOrderError):
        LocalProjector((0.0,), (1.0,), 3, points=7)


def test_projection_is_best_l2_approximation(rng):
    f = lambda x: np.sin(np.pi * x[:, 0])
    Pf = local_project(LocalProjector((0.0, 0.0), (1.0, 1.0), 2, points=10), f)
    z, w = gauss_rule(2, 20)

    def err(q):
        return np.sum(w * (f(z) - poly_eval(q, z)) ** 2)

    best = err(Pf)
    for _ in range(50):
        q = Polynomial.from_vector(2, 2, rng.uniform(-2, 2, 6))
        assert err(q) >= best
    # the residual is orthogonal to every monomial of degree <= 2
    res = f(z) - poly_eval(Pf, z)
    for e in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert abs(np.sum(w * res * z[:, 0] ** e[0] * z[:, 1] ** e[1])) < 1e-12


def test_l2_stability_is_at_most_one():
    P = LocalProjector((0.0, 0.0), (1.0, 1.0), 3)
    assert stability_probe(P, 2.0, trials=32) <= 1.0 + 1e-12


def test_polynomial_input_gives_ratio_one():
    P = LocalProjector((0.3,), (0.2,), 2)
    p = Polynomial(1, 2, {(0,): 1.0, (2,): -3.0})
    z, w = P.nodes()
    np.testing.assert_allclose(poly_eval(local_project(P, p), z), poly_eval(p, z), atol=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, np.inf])
def test_stability_constant_is_affine_invariant(p):
    a = stability_probe(LocalProjector((0.0, 0.0), (1.0, 1.0), 2), p, trials=24, seed=3)
    b = stability_probe(LocalProjector((-5.0, 2.5), (0.01, 0.01), 2), p, trials=24, seed=3)
    assert b == pytest.approx(a, rel=0.05)
