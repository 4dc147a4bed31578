"""Spline fields, the quasi-interpolant, two-scale refinement and details.

A :class:`SplineField` at level ``k`` is ``sum_nu P_nu(x) g_{k,nu}(x)``.
Each coefficient polynomial is stored in the local variable
``y = 2^k x - nu`` (so ``g_{k,nu}`` is ``psi(y)``); this keeps coefficients
of size O(1) at every level and makes refinement a fixed small matrix
product.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .bsplines import derivative_tables, refinement_coeffs
from .domains import Domain
from .geometry import active_cells, color_classes, interior_cells, lex_sort, nearest_interior
from .polynomials import (
    Polynomial,
    affine_matrix,
    exponent_array,
    lattice_solve,
    monomial_matrix,
    n_monomials,
)
from .projection import gauss_rule, min_points, project_boxes

DUMP_VERSION = 1


def _row_keys(cells: np.ndarray) -> list[tuple[int, ...]]:
    return [tuple(int(v) for v in row) for row in cells]


@dataclass(frozen=True, eq=False)
class SplineField:
    """Element of the spline space at level ``k``.

    Parameters
    ----------
    k : int
        Level.
    m : int
        B-spline order.
    degree : int
        Total degree bound of the coefficient polynomials.
    cells : ndarray, shape (n, d)
        Shifts ``nu``, lexicographically sorted and unique.
    coeffs : ndarray, shape (n, n_mono)
        Monomial coefficients of ``P_nu`` in ``y = 2^k x - nu``.
    """

    k: int
    m: int
    degree: int
    cells: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        cells = np.ascontiguousarray(np.atleast_2d(self.cells), dtype=np.int64)
        coeffs = np.ascontiguousarray(self.coeffs, dtype=float).reshape(cells.shape[0], -1)
        if coeffs.shape[1] != n_monomials(cells.shape[1], self.degree):
            raise ValueError("coefficient rows do not match the degree bound")
        if self.m < 0 or self.k < 0:
            raise ValueError("level and order must be nonnegative")
        cells.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def d(self) -> int:
        return self.cells.shape[1]

    def __len__(self) -> int:
        return self.cells.shape[0]

    @cached_property
    def _dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nmono = self.coeffs.shape[1]
        if len(self) == 0:
            return np.zeros((1, nmono)), np.zeros(self.d, np.int64), np.ones(self.d, np.int64)
        origin = self.cells.min(axis=0)
        shape = self.cells.max(axis=0) - origin + 1
        dense = np.zeros((int(np.prod(shape)), nmono))
        strides = np.ones(self.d, dtype=np.int64)
        for j in range(self.d - 2, -1, -1):
            strides[j] = strides[j + 1] * shape[j + 1]
        dense[(self.cells - origin) @ strides] = self.coeffs
        return dense, origin, shape

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {key: i for i, key in enumerate(_row_keys(self.cells))}

    def eval(self, x, lam: Sequence[int] | None = None, backend: str | None = None) -> np.ndarray:
        """``D^lam`` of the field at points ``x`` of shape (n, d)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.d:
            raise ValueError(f"points have dimension {x.shape[1]}, field has {self.d}")
        lam = (0,) * self.d if lam is None else tuple(int(v) for v in lam)
        if len(lam) != self.d or min(lam) < 0:
            raise ValueError(f"bad multi-index {lam}")
        if max(lam) > self.m:
            raise ValueError(f"derivative {lam} exceeds spline order {self.m} on some axis")
        dense, origin, shape = self._dense
        tables = derivative_tables(self.m, self.m)
        return kernels.field_eval(
            dense, origin, shape, exponent_array(self.d, self.degree), tables, x, self.k, lam, backend
        )

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def coefficient(self, nu: Sequence[int]) -> Polynomial:
        """``P_nu`` as a polynomial in global coordinates (zero if absent)."""
        nu = tuple(int(v) for v in nu)
        i = self._index.get(nu)
        if i is None:
            return Polynomial(self.d, self.degree, {})
        scale = [2.0**self.k] * self.d
        mat = affine_matrix(self.d, self.degree, scale, [-float(v) for v in nu])
        return Polynomial.from_vector(self.d, self.degree, mat @ self.coeffs[i])

    def local_coefficient(self, nu: Sequence[int]) -> np.ndarray:
        i = self._index.get(tuple(int(v) for v in nu))
        return np.zeros(self.coeffs.shape[1]) if i is None else self.coeffs[i].copy()

    def _combine(self, other: "SplineField", sign: float) -> "SplineField":
        if (self.k, self.m, self.degree, self.d) != (other.k, other.m, other.degree, other.d):
            raise ValueError("fields live in different spline spaces")
        cells = lex_sort(np.unique(np.concatenate([self.cells, other.cells]), axis=0))
        coeffs = np.zeros((cells.shape[0], self.coeffs.shape[1]))
        pos = {key: i for i, key in enumerate(_row_keys(cells))}
        coeffs[[pos[c] for c in _row_keys(self.cells)]] += self.coeffs
        coeffs[[pos[c] for c in _row_keys(other.cells)]] += sign * other.coeffs
        return SplineField(self.k, self.m, self.degree, cells, coeffs)

    def __add__(self, other: "SplineField") -> "SplineField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "SplineField") -> "SplineField":
        return self._combine(other, -1.0)

    def scale(self, c: float) -> "SplineField":
        return SplineField(self.k, self.m, self.degree, self.cells, c * self.coeffs)

    def restrict(self, cells: np.ndarray) -> "SplineField":
        """Keep only the given shifts (absent ones are dropped)."""
        keep = [self._index[c] for c in _row_keys(lex_sort(cells)) if c in self._index]
        return SplineField(self.k, self.m, self.degree, self.cells[keep], self.coeffs[keep])

    def support_cells(self) -> np.ndarray:
        """Level-k cells on which the field can be nonzero."""
        if len(self) == 0:
            return np.zeros((0, self.d), dtype=np.int64)
        offs = np.array(list(product(range(self.m + 1), repeat=self.d)), dtype=np.int64)
        allc = (self.cells[:, None, :] + offs[None]).reshape(-1, self.d)
        return lex_sort(np.unique(allc, axis=0))

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))


def zero_field(d: int, k: int, m: int, degree: int) -> SplineField:
    return SplineField(k, m, degree, np.zeros((0, d), np.int64), np.zeros((0, n_monomials(d, degree))))


def field_eval(F: SplineField, x, lam: Sequence[int] | None = None) -> np.ndarray:
    """``D^lam F`` at ``x`` by the product rule over the supported shifts."""
    return F.eval(x, lam)


# ---------------------------------------------------------------------------
# quasi-interpolant


def _check_orders(l: int, m: int) -> None:
    if l < 1:
        raise ValueError("polynomial order l must be at least 1")
    if m < l:
        raise ValueError(f"spline order m={m} must satisfy m >= l={l}")


@lru_cache(maxsize=None)
def _shift_matrix(d: int, degree: int, delta: tuple[int, ...]) -> np.ndarray:
    return affine_matrix(d, degree, [1.0] * d, [float(v) for v in delta])


def _reframe(coeffs: np.ndarray, offsets: np.ndarray, degree: int) -> np.ndarray:
    """Rewrite ``q(z)`` as ``q(y + offset)`` row by row."""
    d = offsets.shape[1]
    out = np.empty_like(coeffs)
    keys, inverse = np.unique(offsets, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    for g, key in enumerate(keys):
        sel = inverse == g
        out[sel] = coeffs[sel] @ _shift_matrix(d, degree, tuple(int(v) for v in key)).T
    return out


def quasi_interpolant(
    f: Callable[[np.ndarray], np.ndarray],
    D: Domain,
    k: int,
    l: int,
    m: int | None = None,
    points: int | None = None,
) -> SplineField:
    """``E_k f``: each active shift takes the projection of ``f`` on its nearest interior cell.

    Parameters
    ----------
    f : callable
        Vectorized function, ``(n, d) -> (n,)``; only evaluated inside D.
    D : Domain
    k : int
        Level; the domain needs at least one closed interior cell at this level.
    l : int
        Polynomial order; coefficient polynomials have degree ``l - 1``.
    m : int, optional
        Spline order, ``m >= l``; defaults to ``l``.
    points : int, optional
        Gauss points per axis for the local projections.
    """
    m = l if m is None else m
    _check_orders(l, m)
    degree = l - 1
    active = active_cells(D, k, m)
    targets = nearest_interior(D, k, active)
    uniq, inverse = np.unique(targets, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    n = min_points(degree) if points is None else points
    local = project_boxes(f, np.ldexp(uniq.astype(float), -k), 2.0**-k, degree, n)
    coeffs = _reframe(local[inverse], active - targets, degree)
    return SplineField(k, m, degree, active, coeffs)


# ---------------------------------------------------------------------------
# two-scale refinement


@lru_cache(maxsize=None)
def _refine_matrices(d: int, m: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Stencil offsets ``frak_m`` and the matrices ``A_m * T_m``."""
    a = refinement_coeffs(m)
    offs = np.array(list(product(range(m + 2), repeat=d)), dtype=np.int64)
    mats = np.stack(
        [
            np.prod(a[o]) * affine_matrix(d, degree, [0.5] * d, [0.5 * float(v) for v in o])
            for o in offs
        ]
    )
    return offs, mats


def parity_stencil(nu: Sequence[int], m: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs ``(frak_m, parent)`` with ``frak_m in {0..m+1}^d`` and ``nu - frak_m`` even."""
    out = []
    for fm in product(range(m + 2), repeat=len(nu)):
        if all((v - w) % 2 == 0 for v, w in zip(nu, fm)):
            out.append((fm, tuple((v - w) // 2 for v, w in zip(nu, fm))))
    return out


def two_scale_refine(F: SplineField, D: Domain | None = None) -> SplineField:
    """``H_k F``: the same function written at level ``k + 1``.

    With a domain, only children in ``N_{k+1}(D)`` are kept (the result then
    agrees with ``F`` on D); without one every child is kept and the result
    agrees with ``F`` on all of R^d.
    """
    d = F.d
    offs, mats = _refine_matrices(d, F.m, F.degree)
    if len(F) == 0:
        return zero_field(d, F.k + 1, F.m, F.degree)
    children = (2 * F.cells[:, None, :] + offs[None]).reshape(-1, d)
    contrib = np.einsum("oij,nj->noi", mats, F.coeffs).reshape(-1, F.coeffs.shape[1])
    cells, inverse = np.unique(children, axis=0, return_inverse=True)
    coeffs = np.zeros((cells.shape[0], F.coeffs.shape[1]))
    np.add.at(coeffs, inverse.ravel(), contrib)
    # np.unique sorts rows lexicographically
    out = SplineField(F.k + 1, F.m, F.degree, cells, coeffs)
    if D is not None:
        out = out.restrict(active_cells(D, F.k + 1, F.m))
    return out


def refine_to(F: SplineField, level: int, D: Domain | None = None) -> SplineField:
    while F.k < level:
        F = two_scale_refine(F, D)
    return F


def detail(
    f: Callable[[np.ndarray], np.ndarray],
    D: Domain,
    k: int,
    l: int,
    m: int | None = None,
    points: int | None = None,
) -> SplineField:
    """``E_k f - H_{k-1} E_{k-1} f`` as a level-k field."""
    m = l if m is None else m
    if k < 1 or interior_cells(D, k - 1).shape[0] == 0:
        raise ValueError(f"level {k - 1} has no interior cells; the detail at level {k} is undefined")
    fine = quasi_interpolant(f, D, k, l, m, points)
    coarse = two_scale_refine(quasi_interpolant(f, D, k - 1, l, m, points), D)
    return fine - coarse


def split_colors(F: SplineField) -> dict[tuple[int, ...], SplineField]:
    """Per-colour parts ``F_sigma`` (shifts congruent to sigma mod ``m + 1``)."""
    return {sigma: F.restrict(cells) for sigma, cells in color_classes(F.cells, F.m).items()}


# ---------------------------------------------------------------------------
# discretization by lattice values


def discretize_color(F: SplineField) -> np.ndarray:
    """Values ``P_nu(2^-k (nu + lam))`` for ``|lam| <= degree``, ordered by ``(nu, lam)``."""
    if len(F):
        res = np.mod(F.cells, F.m + 1)
        if np.any(res != res[0]):
            raise ValueError("field mixes several colour classes")
    lattice = exponent_array(F.d, F.degree).astype(float)
    vander = monomial_matrix(lattice, exponent_array(F.d, F.degree))
    return (F.coeffs @ vander.T).ravel()


def undiscretize_color(vec: np.ndarray, cells: np.ndarray, k: int, m: int, degree: int) -> SplineField:
    """Inverse of :func:`discretize_color` for the given shifts."""
    cells = np.atleast_2d(np.asarray(cells, dtype=np.int64))
    d = cells.shape[1]
    vals = np.asarray(vec, dtype=float).reshape(cells.shape[0], n_monomials(d, degree))
    coeffs = lattice_solve(d, degree, vals.T).T
    return SplineField(k, m, degree, cells, coeffs)


# ---------------------------------------------------------------------------
# norms on R^d


def field_lp_norm(F: SplineField, p: float, lam: Sequence[int] | None = None, points: int | None = None) -> float:
    """``||D^lam F||_{L_p(R^d)}`` by Gauss quadrature on the level-k cells of the support.

    On each level-k cell the field is a polynomial of degree ``degree + m``,
    so with enough points the value is exact for ``p = 2``.
    """
    cells = F.support_cells()
    if cells.shape[0] == 0:
        return 0.0
    n = points if points is not None else (F.degree + F.m) + 2
    z, w = gauss_rule(F.d, n)
    x = np.ldexp((cells[:, None, :] + z[None]).reshape(-1, F.d), -F.k)
    vals = F.eval(x, lam)
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    wt = np.tile(w, cells.shape[0]) * 2.0 ** (-F.k * F.d)
    return float(np.sum(wt * np.abs(vals) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# serialization


def dumps_field(F: SplineField) -> str:
    """Versioned text dump; records are sorted, so the output is byte-stable."""
    buf = io.StringIO()
    buf.write(f"quasispline-field {DUMP_VERSION}\n")
    buf.write(f"d {F.d} m {F.m} degree {F.degree} k {F.k} n {len(F)}\n")
    for nu, row in zip(F.cells, F.coeffs):
        buf.write(" ".join(str(int(v)) for v in nu))
        buf.write(" | ")
        buf.write(" ".join(float(c).hex() for c in row))
        buf.write("\n")
    return buf.getvalue()


def loads_field(text: str) -> SplineField:
    return _parse_field(text.splitlines())[0]


def loads_fields(text: str) -> list[SplineField]:
    """Parse a concatenation of :func:`dumps_field` records."""
    lines = text.splitlines()
    out = []
    while lines:
        F, used = _parse_field(lines)
        out.append(F)
        lines = lines[used:]
    return out


def _parse_field(lines: list[str]) -> tuple[SplineField, int]:
    head = lines[0].split()
    if head[:1] != ["quasispline-field"] or int(head[1]) != DUMP_VERSION:
        raise ValueError("not a field dump of a supported version")
    meta = lines[1].split()
    vals = dict(zip(meta[::2], map(int, meta[1::2])))
    d, n = vals["d"], vals["n"]
    cells = np.zeros((n, d), dtype=np.int64)
    coeffs = np.zeros((n, n_monomials(d, vals["degree"])))
    for i, line in enumerate(lines[2 : 2 + n]):
        left, right = line.split("|")
        cells[i] = [int(v) for v in left.split()]
        coeffs[i] = [float.fromhex(v) for v in right.split()]
    return SplineField(vals["k"], vals["m"], vals["degree"], cells, coeffs), 2 + n


__all__ = [
    "SplineField",
    "zero_field",
    "field_eval",
    "quasi_interpolant",
    "two_scale_refine",
    "refine_to",
    "parity_stencil",
    "detail",
    "split_colors",
    "discretize_color",
    "undiscretize_color",
    "field_lp_norm",
    "dumps_field",
    "loads_field",
    "loads_fields",
]
