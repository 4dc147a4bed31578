"""Multivariate polynomials of bounded total degree in the monomial basis.

Monomials are indexed by multi-indices ``lam`` with ``sum(lam) <= degree`` and
are always enumerated in lexicographic order; dense coefficient vectors in
this module follow that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import comb, prod
from typing import Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


@lru_cache(maxsize=None)
def multi_indices(d: int, degree: int) -> tuple[MultiIndex, ...]:
    """All ``lam`` in Z_+^d with ``|lam| <= degree``, lexicographically sorted."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if degree < 0:
        return ()
    out = [lam for lam in product(range(degree + 1), repeat=d) if sum(lam) <= degree]
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def exponent_array(d: int, degree: int) -> np.ndarray:
    arr = np.array(multi_indices(d, degree), dtype=np.int64).reshape(-1, d)
    arr.setflags(write=False)
    return arr


def n_monomials(d: int, degree: int) -> int:
    return comb(degree + d, d) if degree >= 0 else 0


def monomial_matrix(x: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """Matrix ``V[i, t] = x_i ** exps[t]`` for points ``x`` of shape (n, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, d = x.shape
    if exps.shape[1] != d:
        raise ValueError(f"points have dimension {d}, monomials have {exps.shape[1]}")
    top = int(exps.max(initial=0))
    powers = np.ones((n, d, top + 1))
    for p in range(1, top + 1):
        powers[:, :, p] = powers[:, :, p - 1] * x
    out = np.ones((n, exps.shape[0]))
    for j in range(d):
        out *= powers[:, j, exps[:, j]]
    return out


@lru_cache(maxsize=None)
def derivative_matrix(d: int, degree: int, lam: MultiIndex) -> np.ndarray:
    """Matrix ``M`` with ``coef(D^lam p) = M @ coef(p)``, both in the degree-``degree`` basis."""
    exps = multi_indices(d, degree)
    pos = {e: i for i, e in enumerate(exps)}
    mat = np.zeros((len(exps), len(exps)))
    for i, e in enumerate(exps):
        if any(ej < lj for ej, lj in zip(e, lam)):
            continue
        target = tuple(ej - lj for ej, lj in zip(e, lam))
        factor = prod(
            prod(range(ej - lj + 1, ej + 1)) for ej, lj in zip(e, lam)
        )
        mat[pos[target], i] = factor
    mat.setflags(write=False)
    return mat


def affine_matrix(d: int, degree: int, scale: Sequence[float], shift: Sequence[float]) -> np.ndarray:
    """Matrix ``M`` with ``coef(q) = M @ coef(p)`` where ``q(y) = p(scale * y + shift)``."""
    exps = multi_indices(d, degree)
    pos = {e: i for i, e in enumerate(exps)}
    mat = np.zeros((len(exps), len(exps)))
    for src, e in enumerate(exps):
        # expand prod_j (a_j y_j + b_j)^{e_j}
        per_axis = [
            [(r, comb(ej, r) * scale[j] ** r * shift[j] ** (ej - r)) for r in range(ej + 1)]
            for j, ej in enumerate(e)
        ]
        for combo in product(*per_axis):
            target = tuple(r for r, _ in combo)
            mat[pos[target], src] += prod(c for _, c in combo)
    return mat


@dataclass(frozen=True)
class Polynomial:
    """Element of P^{degree,d}: ``sum a_lam x^lam`` over ``|lam| <= degree``.

    ``coeffs`` holds only nonzero entries; the zero polynomial has an empty map.
    ``degree`` is carried metadata (``-1`` encodes the space {0}).
    """

    d: int
    degree: int
    coeffs: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for lam, a in self.coeffs.items():
            lam = tuple(int(v) for v in lam)
            if len(lam) != self.d or min(lam) < 0:
                raise ValueError(f"bad multi-index {lam} for d={self.d}")
            if sum(lam) > self.degree:
                raise ValueError(f"monomial {lam} exceeds degree bound {self.degree}")
            if a != 0:
                clean[lam] = float(a)
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_vector(cls, d: int, degree: int, vec: Sequence[float]) -> "Polynomial":
        exps = multi_indices(d, degree)
        if len(vec) != len(exps):
            raise ValueError(f"expected {len(exps)} coefficients, got {len(vec)}")
        return cls(d, degree, dict(zip(exps, map(float, vec))))

    @classmethod
    def constant(cls, d: int, value: float, degree: int = 0) -> "Polynomial":
        return cls(d, degree, {(0,) * d: value})

    def vector(self, degree: int | None = None) -> np.ndarray:
        degree = self.degree if degree is None else degree
        exps = multi_indices(self.d, degree)
        out = np.zeros(len(exps))
        for i, e in enumerate(exps):
            out[i] = self.coeffs.get(e, 0.0)
        if len(self.coeffs) and sum(max(self.coeffs, key=sum)) > degree:
            raise ValueError("requested degree is below the polynomial's support")
        return out

    def __call__(self, x) -> np.ndarray | float:
        return poly_eval(self, x)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        out = dict(self.coeffs)
        for lam, a in other.coeffs.items():
            out[lam] = out.get(lam, 0.0) + a
        return Polynomial(self.d, max(self.degree, other.degree), out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "Polynomial":
        return Polynomial(self.d, self.degree, {k: c * v for k, v in self.coeffs.items()})


def poly_eval(p: Polynomial, x) -> np.ndarray | float:
    """Evaluate at one point (shape (d,)) or many (shape (n, d)).

    Terms are summed in lexicographic order of the multi-index.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.shape[-1] != p.d:
        raise ValueError(f"point dimension {pts.shape[-1]} does not match polynomial dimension {p.d}")
    if not p.coeffs:
        out = np.zeros(pts.shape[0])
    else:
        exps = np.array(list(p.coeffs), dtype=np.int64)
        out = monomial_matrix(pts, exps) @ np.fromiter(p.coeffs.values(), float)
    return float(out[0]) if single else out


def poly_derivative(p: Polynomial, lam: Sequence[int]) -> Polynomial:
    lam = tuple(int(v) for v in lam)
    if len(lam) != p.d:
        raise ValueError("multi-index dimension mismatch")
    new_degree = max(p.degree - sum(lam), -1)
    out = {}
    for e, a in p.coeffs.items():
        if any(ej < lj for ej, lj in zip(e, lam)):
            continue
        factor = prod(prod(range(ej - lj + 1, ej + 1)) for ej, lj in zip(e, lam))
        out[tuple(ej - lj for ej, lj in zip(e, lam))] = a * factor
    return Polynomial(p.d, new_degree, out)


@lru_cache(maxsize=None)
def _lattice_lu(d: int, degree: int):
    import scipy.linalg

    exps = exponent_array(d, degree)
    vander = monomial_matrix(exps.astype(float), exps)
    lu, piv = scipy.linalg.lu_factor(vander)
    if np.any(np.abs(np.diag(lu)) < 1e-12 * np.abs(lu).max()):
        raise RuntimeError(f"lattice Vandermonde system singular for d={d}, degree={degree}")
    return lu, piv


def lattice_solve(d: int, degree: int, values: np.ndarray) -> np.ndarray:
    """Coefficients of the interpolants through lattice values.

    ``values`` has shape (card, ...) with rows in ``multi_indices`` order; the
    result has the same trailing shape (batched solve).
    """
    import scipy.linalg

    lu, piv = _lattice_lu(d, degree)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(values, dtype=float))


def lattice_interpolate(d: int, degree: int, values: Mapping[MultiIndex, float]) -> Polynomial:
    """The unique p in P^{degree,d} with ``p(lam) = values[lam]`` on the lattice ``|lam| <= degree``."""
    exps = multi_indices(d, degree)
    if set(map(tuple, values)) != set(exps):
        raise ValueError(
            f"need values at exactly the {len(exps)} lattice points with |lam| <= {degree}"
        )
    y = np.array([values[e] for e in exps], dtype=float)
    return Polynomial.from_vector(d, degree, lattice_solve(d, degree, y))


@lru_cache(maxsize=None)
def lagrange_matrix(d: int, degree: int) -> np.ndarray:
    """Column ``mu`` holds the coefficients of the Lagrange polynomial pi_mu."""
    lu_piv = _lattice_lu(d, degree)
    import scipy.linalg

    mat = scipy.linalg.lu_solve(lu_piv, np.eye(n_monomials(d, degree)))
    mat.setflags(write=False)
    return mat


def lagrange_basis(d: int, degree: int) -> list[Polynomial]:
    mat = lagrange_matrix(d, degree)
    return [Polynomial.from_vector(d, degree, mat[:, i]) for i in range(mat.shape[1])]
