"""Local L2 polynomial projectors on axis-parallel boxes.

Every projection is computed on the reference cube ``[0, 1]^d`` with a tensor
Gauss-Legendre rule and an orthonormal Legendre frame, then expressed in
monomials of the reference variable ``z``.  A box ``lower + width * z`` maps
to the reference cube by an affine change of variables, so one precomputed
matrix serves every box of a given shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg

from .polynomials import Polynomial, affine_matrix, exponent_array, monomial_matrix, multi_indices


class QuadratureOrderError(ValueError):
    """Raised when a projector is configured with too few Gauss points."""


def min_points(degree: int) -> int:
    """Smallest admissible number of Gauss points per axis for ``degree``."""
    return 2 * degree + 2


@lru_cache(maxsize=None)
def gauss_rule(d: int, n: int, subdivisions: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Composite tensor Gauss-Legendre rule on ``[0, 1]^d``.

    Parameters
    ----------
    d : int
        Dimension.
    n : int
        Points per axis in each sub-box.
    subdivisions : int
        The cube is split into ``2**subdivisions`` sub-boxes per axis.

    Returns
    -------
    nodes : ndarray, shape (N, d)
    weights : ndarray, shape (N,)
        Weights sum to one.
    """
    t, w = npleg.leggauss(n)
    t = (t + 1.0) / 2.0
    w = w / 2.0
    parts = 2**subdivisions
    t = ((np.arange(parts)[:, None] + t[None, :]) / parts).ravel()
    w = np.tile(w / parts, parts)
    grids = np.meshgrid(*([t] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def _legendre_to_monomial(d: int, degree: int) -> np.ndarray:
    """Column ``e`` holds the monomial coefficients of the orthonormal tensor Legendre ``Phi_e``."""
    uni = np.zeros((degree + 1, degree + 1))
    for r in range(degree + 1):
        c = npleg.leg2poly(np.eye(degree + 1)[r])
        # shift from [-1, 1] to [0, 1]: P_r(2z - 1)
        shifted = np.polynomial.Polynomial(c)(np.polynomial.Polynomial([-1.0, 2.0])).coef
        uni[: len(shifted), r] = shifted * np.sqrt(2 * r + 1)
    exps = multi_indices(d, degree)
    pos = {e: i for i, e in enumerate(exps)}
    mat = np.zeros((len(exps), len(exps)))
    for col, e in enumerate(exps):
        # only monomials with every exponent <= e_j appear, all of total degree <= |e|
        for target in exps:
            if all(tj <= ej for tj, ej in zip(target, e)):
                mat[pos[target], col] = np.prod([uni[tj, ej] for tj, ej in zip(target, e)])
    return mat


@lru_cache(maxsize=None)
def projection_matrix(d: int, degree: int, n: int, subdivisions: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Reference projection: ``coef_z = M @ f(nodes)``.

    Returns
    -------
    nodes : ndarray, shape (N, d)
        Quadrature nodes in ``[0, 1]^d``.
    M : ndarray, shape (n_mono, N)
        Maps node values to monomial coefficients (in ``z``) of the L2
        projection onto polynomials of total degree ``<= degree``.
    """
    if n < min_points(degree):
        raise QuadratureOrderError(
            f"{n} Gauss points per axis is below the required {min_points(degree)} for degree {degree}"
        )
    nodes, weights = gauss_rule(d, n, subdivisions)
    exps = exponent_array(d, degree)
    to_mono = _legendre_to_monomial(d, degree)
    phi = monomial_matrix(nodes, exps) @ to_mono
    mat = to_mono @ (phi * weights[:, None]).T
    mat.setflags(write=False)
    return nodes, mat


def project_boxes(
    f: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    width: np.ndarray | float,
    degree: int,
    n: int | None = None,
    subdivisions: int = 0,
) -> np.ndarray:
    """Project ``f`` on many boxes ``lower[i] + width * [0, 1]^d`` at once.

    Returns the coefficients of each projection in the reference variable
    ``z = (x - lower[i]) / width``, shape (n_boxes, n_mono).
    """
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    nb, d = lower.shape
    n = min_points(degree) if n is None else n
    nodes, mat = projection_matrix(d, degree, n, subdivisions)
    width = np.broadcast_to(np.asarray(width, dtype=float), (d,))
    pts = lower[:, None, :] + nodes[None, :, :] * width
    vals = np.asarray(f(pts.reshape(-1, d)), dtype=float).reshape(nb, -1)
    return vals @ mat.T


@dataclass(frozen=True)
class LocalProjector:
    """L2 projector onto P^{degree,d} over the box ``lower + width * [0, 1]^d``.

    ``width`` plays the role of ``delta * rho``.  ``points`` is the number of
    Gauss points per axis and must be at least ``2 * degree + 2``.
    """

    lower: tuple[float, ...]
    width: tuple[float, ...]
    degree: int
    points: int | None = None
    subdivisions: int = 0

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.width):
            raise ValueError("lower and width must have the same dimension")
        if min(self.width) <= 0:
            raise ValueError("box widths must be positive")
        if self.points is not None and self.points < min_points(self.degree):
            raise QuadratureOrderError(
                f"{self.points} Gauss points per axis is below the required "
                f"{min_points(self.degree)} for degree {self.degree}"
            )

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def n(self) -> int:
        return min_points(self.degree) if self.points is None else self.points

    def reference_coeffs(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Coefficients of the projection in ``z = (x - lower) / width``."""
        return project_boxes(f, np.array([self.lower]), np.array(self.width), self.degree, self.n, self.subdivisions)[0]

    def to_global(self, coeffs: np.ndarray) -> Polynomial:
        scale = [1.0 / w for w in self.width]
        shift = [-a / w for a, w in zip(self.lower, self.width)]
        mat = affine_matrix(self.d, self.degree, scale, shift)
        return Polynomial.from_vector(self.d, self.degree, mat @ coeffs)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and weights of the box (weights sum to its volume)."""
        z, w = gauss_rule(self.d, self.n, self.subdivisions)
        return np.asarray(self.lower) + z * np.asarray(self.width), w * float(np.prod(self.width))


def local_project(P: LocalProjector, f: Callable[[np.ndarray], np.ndarray]) -> Polynomial:
    """L2(Q) orthogonal projection of ``f`` onto P^{degree,d}, in global coordinates."""
    return P.to_global(P.reference_coeffs(f))


def _box_lp(vals: np.ndarray, weights: np.ndarray, p: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    return float(np.sum(weights * np.abs(vals) ** p) ** (1.0 / p))


def stability_probe(
    P: LocalProjector,
    p: float,
    trials: int = 64,
    seed: int = 0,
    resolution: int = 3,
) -> float:
    """Largest observed ``||P f||_p / ||f||_p`` over random rough inputs.

    Inputs are piecewise constant on a ``2**resolution`` grid per axis with
    i.i.d. standard normal values, plus a few random degree-``degree``
    polynomials mixed in.  Projection and norms use a composite rule aligned
    with that grid, so for ``p = 2`` both are exact.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    d = P.d
    fine = LocalProjector(P.lower, P.width, P.degree, P.n, resolution)
    x, w = fine.nodes()
    lower = np.asarray(P.lower)
    width = np.asarray(P.width)
    parts = 2**resolution
    rng = np.random.default_rng(seed)
    mono = monomial_matrix((x - lower) / width, exponent_array(d, P.degree))
    best = 0.0
    for trial in range(trials):
        cells = rng.standard_normal((parts,) * d)
        poly = rng.uniform(-1, 1, mono.shape[1]) * (trial % 4 == 0)

        def f(pts, cells=cells, poly=poly):
            z = (pts - lower) / width
            idx = np.clip(np.floor(z * parts).astype(np.int64), 0, parts - 1)
            return cells[tuple(idx.T)] + monomial_matrix(z, exponent_array(d, P.degree)) @ poly

        coef = fine.reference_coeffs(f)
        num = _box_lp(mono @ coef, w, p)
        den = _box_lp(f(x), w, p)
        best = max(best, num / den)
    return best


__all__ = [
    "QuadratureOrderError",
    "LocalProjector",
    "gauss_rule",
    "projection_matrix",
    "project_boxes",
    "local_project",
    "stability_probe",
    "min_points",
]
