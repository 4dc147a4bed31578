"""Fast invariant battery run by ``quasispline selftest``.

Each check returns a measured value and the limit it must not exceed.
Random inputs come from one seeded generator, consumed in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np

from . import kernels
from .analysis import QuadratureSpec, lp_norm, modulus_avg, modulus_sup
from .bsplines import basis_eval, refinement_check, tensor_weight_exact
from .domains import Ball, Staircase, unit_cube
from .functions import PolynomialFunction, ridge_family
from .geometry import check_segment_chain, etype_probe, interior_cells, interior_chain, segment_chain
from .multiscale import (
    detail,
    discretize_color,
    quasi_interpolant,
    split_colors,
    two_scale_refine,
    undiscretize_color,
)
from .polynomials import Polynomial, lattice_interpolate, multi_indices, poly_eval
from .projection import LocalProjector, local_project, stability_probe


@dataclass
class Check:
    name: str
    value: float
    limit: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)

    def row(self) -> dict:
        return {"check": self.name, "value": self.value, "limit": self.limit, "pass": self.ok}


def _points_in(D, n, rng):
    lo, hi = D.bbox
    out = np.zeros((0, D.d))
    while out.shape[0] < n:
        x = lo + (hi - lo) * rng.random((2 * n, D.d))
        out = np.concatenate([out, x[D.contains(x)]])
    return out[:n]


def _random_poly(d, degree, rng):
    return Polynomial.from_vector(d, degree, rng.uniform(-1, 1, len(multi_indices(d, degree))))


def check_refinement(rng) -> float:
    worst = 0.0
    for m in range(5):
        for d in (1, 2):
            x = rng.uniform(-0.5, m + 1.5, (200, d))
            if m == 0:
                # the identity holds off the dyadic knots only
                x = np.floor(x * 2) / 2 + 0.25 + 0.2 * rng.random(x.shape)
            worst = max(worst, float(np.max(np.abs(refinement_check(m, d, x)))))
    return worst


def check_partition(rng) -> float:
    worst = 0.0
    for m in range(4):
        for d in (1, 2):
            for k in (0, 2, 4):
                x = rng.random((100, d))
                cell = np.floor(np.ldexp(x, k)).astype(np.int64)
                total = np.zeros(x.shape[0])
                for off in product(range(m + 1), repeat=d):
                    for i in range(x.shape[0]):
                        total[i] += basis_eval(m, d, k, cell[i] - np.array(off), x[i : i + 1])[0]
                worst = max(worst, float(np.max(np.abs(total - 1))))
    return worst


def check_weights(rng) -> float:
    for m in range(5):
        for d in (1, 2, 3):
            for _ in range(10):
                nu = rng.integers(-50, 50, d)
                total = Fraction(0)
                for fm in product(range(m + 2), repeat=d):
                    if all((v - w) % 2 == 0 for v, w in zip(nu, fm)):
                        total += tensor_weight_exact(m, fm)
                if total != 1:
                    return 1.0
    return 0.0


def check_two_scale(rng) -> float:
    worst = 0.0
    for D in (unit_cube(2), Ball((0.5, 0.5), 0.5)):
        for k in (3, 4):
            f = ridge_family(2, 0.75, 1)[0]
            F = quasi_interpolant(f, D, k, 2)
            H = two_scale_refine(F, D)
            x = _points_in(D, 300, rng)
            worst = max(worst, float(np.max(np.abs(H(x) - F(x)))))
    return worst


def check_reproduction(rng) -> float:
    worst = 0.0
    for D in (unit_cube(2), Ball((0.5, 0.5), 0.5)):
        for l in (1, 2, 3):
            p = _random_poly(2, l - 1, rng)
            x = _points_in(D, 200, rng)
            F = quasi_interpolant(p, D, 4, l)
            scale = max(1.0, float(np.max(np.abs(p(x)))))
            worst = max(worst, float(np.max(np.abs(F(x) - p(x)))) / scale)
            E = detail(p, D, 4, l)
            worst = max(worst, float(np.max(np.abs(E(x)))) / scale)
    return worst


def check_telescoping(rng) -> float:
    D = unit_cube(1)
    f = ridge_family(1, 0.75, 1)[0]
    x = rng.random((400, 1))
    total = quasi_interpolant(f, D, 2, 2)(x)
    for k in range(3, 7):
        total = total + detail(f, D, k, 2)(x)
    return float(np.max(np.abs(total - quasi_interpolant(f, D, 6, 2)(x))))


def check_lattice(rng) -> float:
    worst = 0.0
    for d in (1, 2, 3):
        for degree in range(5):
            p = _random_poly(d, degree, rng)
            vals = {lam: poly_eval(p, np.array(lam, float)) for lam in multi_indices(d, degree)}
            q = lattice_interpolate(d, degree, vals)
            worst = max(worst, float(np.max(np.abs(q.vector() - p.vector()))))
    return worst


def check_projection(rng) -> float:
    P = LocalProjector((0.2, -0.4), (0.3, 0.15), 3)
    p = _random_poly(2, 3, rng)
    err = float(np.max(np.abs(local_project(P, p).vector() - p.vector())))
    contraction = stability_probe(P, 2.0, trials=16, seed=int(rng.integers(1 << 31)))
    return max(err, contraction - 1.0)


def check_chains(rng) -> float:
    bad = 0
    for _ in range(300):
        d = int(rng.integers(1, 4))
        k = int(rng.integers(0, 6))
        x0 = rng.uniform(-1, 1, d)
        xi = rng.uniform(-1, 1, d)
        chain = segment_chain(k, x0, xi)
        bound = 4 * d * d * (2**k * np.max(np.abs(xi)) + 1)
        bad += bool(check_segment_chain(chain, x0, xi)) or chain.length > bound
    return float(bad)


def check_staircase(rng) -> float:
    D = Staircase()
    bad = 0
    for k in (3, 4):
        cells = interior_cells(D, k)
        for _ in range(5):
            a, b = cells[rng.integers(len(cells))], cells[rng.integers(len(cells))]
            chain = interior_chain(D, k, a, b, 0, 3)
            bad += not chain.is_unit_walk()
    return float(bad)


def check_discretization(rng) -> float:
    F = quasi_interpolant(ridge_family(2, 0.75, 1)[0], unit_cube(2), 3, 2)
    worst = 0.0
    for part in split_colors(F).values():
        if len(part) == 0:
            continue
        back = undiscretize_color(discretize_color(part), part.cells, part.k, part.m, part.degree)
        worst = max(worst, float(np.max(np.abs(back.coeffs - part.coeffs))))
    return worst


def check_modulus(rng) -> float:
    f = PolynomialFunction(Polynomial(1, 1, {(1,): 1.0}))
    D = unit_cube(1)
    worst = 0.0
    for t in (0.5, 0.125, 0.01):
        worst = max(worst, abs(modulus_avg(f, D, 1, t, 1.0) - (t / 2 - t * t / 3)))
    g = ridge_family(1, 0.75, 1)[0]
    quad = QuadratureSpec(max_level=10)
    gap = modulus_avg(g, D, 2, 0.05, 2.0, quad) - modulus_sup(g, D, 2, 0.05, 2.0, quad)
    return max(worst, gap)


def check_backends(rng) -> float:
    if kernels.BACKEND != "cython":
        return 0.0
    F = quasi_interpolant(ridge_family(2, 0.75, 1)[0], unit_cube(2), 3, 2)
    x = rng.random((500, 2))
    a = F.eval(x, (1, 1), backend="python")
    b = F.eval(x, (1, 1), backend="cython")
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a))))


def check_etype(rng) -> float:
    rep = etype_probe(unit_cube(2), range(1, 5), 3, 10, int(rng.integers(1 << 31)))
    return 0.0 if rep.K0 == 2 else 1.0


def check_lp(rng) -> float:
    D = unit_cube(1)
    x1 = PolynomialFunction(Polynomial(1, 1, {(1,): 1.0}))
    return abs(lp_norm(x1, D, 2.0) - 3**-0.5)


CHECKS: tuple[tuple[str, Callable, float], ...] = (
    ("refinement identity", check_refinement, 1e-12),
    ("partition of unity", check_partition, 1e-12),
    ("refinement weights sum to one", check_weights, 0.0),
    ("two-scale exactness", check_two_scale, 1e-10),
    ("polynomial reproduction and zero detail", check_reproduction, 1e-8),
    ("telescoping", check_telescoping, 1e-10),
    ("lattice interpolation round trip", check_lattice, 1e-10),
    ("projector reproduction and L2 contraction", check_projection, 1e-9),
    ("segment chain validity", check_chains, 0.0),
    ("staircase interior chains", check_staircase, 0.0),
    ("colour discretization round trip", check_discretization, 1e-10),
    ("modulus closed form and averaged <= sup", check_modulus, 1e-9),
    ("backend agreement", check_backends, 1e-12),
    ("unit cube start level", check_etype, 0.0),
    ("L2 norm of x on (0,1)", check_lp, 1e-10),
)


def run_selftest(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    return [Check(name, float(fn(rng)), limit) for name, fn, limit in CHECKS]


__all__ = ["Check", "CHECKS", "run_selftest"]
