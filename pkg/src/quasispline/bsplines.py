"""Cardinal B-splines, their tensor products and the two-scale relation.

``psi^{m,1}`` is the m-fold self-convolution of the indicator of (0, 1): a
piecewise polynomial of degree m supported on [0, m + 1].  Each piece lives on
``[j, j + 1)`` and is stored in the local variable ``u = x - j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Sequence

import numpy as np

from . import kernels

MAX_ORDER = 8


def _integrate(coeffs: list[Fraction]) -> list[Fraction]:
    return [Fraction(0)] + [c / (i + 1) for i, c in enumerate(coeffs)]


def _definite(coeffs: list[Fraction], lo: Fraction, hi: Fraction) -> Fraction:
    prim = _integrate(coeffs)
    val = lambda t: sum(c * t**i for i, c in enumerate(prim))  # noqa: E731
    return val(hi) - val(lo)


@dataclass(frozen=True)
class CardinalBSpline:
    """``psi^{m,1}`` with exact rational pieces.

    ``pieces[j][i]`` is the coefficient of ``u**i`` on ``[j, j + 1)``.
    """

    m: int
    pieces: tuple[tuple[Fraction, ...], ...]

    @property
    def support(self) -> tuple[int, int]:
        return (0, self.m + 1)

    def piece_table(self, deriv: int = 0) -> np.ndarray:
        return _piece_table(self.m, deriv)

    def __call__(self, t, deriv: int = 0) -> np.ndarray:
        if deriv > self.m:
            raise ValueError(f"derivative order {deriv} exceeds spline order {self.m}")
        t = np.asarray(t, dtype=float)
        out = kernels.bspline_eval(self.piece_table(deriv), t.ravel())
        return out.reshape(t.shape)

    def integral(self) -> Fraction:
        return sum(_definite(list(p), Fraction(0), Fraction(1)) for p in self.pieces)


@lru_cache(maxsize=None)
def bspline_build(m: int) -> CardinalBSpline:
    """Build ``psi^{m,1}`` by repeated convolution with the indicator of (0, 1)."""
    if not 0 <= m <= MAX_ORDER:
        raise ValueError(f"order m={m} outside the supported range 0..{MAX_ORDER}")
    pieces = [[Fraction(1)]]
    for order in range(1, m + 1):
        # piece j of psi^order at x = j + u is
        #   int_u^1 P_{j-1}(s) ds + int_0^u P_j(s) ds
        new = []
        zero = [Fraction(0)]
        for j in range(order + 1):
            left = pieces[j - 1] if j >= 1 else zero
            right = pieces[j] if j < order else zero
            prim_left = _integrate(left)
            total_left = sum(prim_left)
            prim_right = _integrate(right)
            coeffs = [Fraction(0)] * (order + 1)
            coeffs[0] += total_left
            for i, c in enumerate(prim_left):
                coeffs[i] -= c
            for i, c in enumerate(prim_right):
                coeffs[i] += c
            new.append(coeffs)
        pieces = new
    return CardinalBSpline(m, tuple(tuple(p) for p in pieces))


@lru_cache(maxsize=None)
def _piece_table(m: int, deriv: int) -> np.ndarray:
    spline = bspline_build(m)
    table = np.zeros((m + 1, m + 1))
    for j, piece in enumerate(spline.pieces):
        coeffs = list(piece)
        for _ in range(deriv):
            coeffs = [i * c for i, c in enumerate(coeffs)][1:] or [Fraction(0)]
        for i, c in enumerate(coeffs):
            table[j, i] = float(c)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def derivative_tables(m: int, max_deriv: int) -> np.ndarray:
    """Stacked piece tables for derivative orders ``0..max_deriv``."""
    out = np.stack([_piece_table(m, r) for r in range(max_deriv + 1)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def refinement_coeffs_exact(m: int) -> tuple[Fraction, ...]:
    if m < 0:
        raise ValueError("order must be nonnegative")
    return tuple(Fraction(comb(m + 1, mu), 2**m) for mu in range(m + 2))


def refinement_coeffs(m: int) -> np.ndarray:
    """``a_mu = 2^{-m} C(m+1, mu)`` for ``mu = 0..m+1``."""
    return np.array([float(a) for a in refinement_coeffs_exact(m)])


def tensor_weight_exact(m: int, frak_m: Sequence[int]) -> Fraction:
    a = refinement_coeffs_exact(m)
    out = Fraction(1)
    for mj in frak_m:
        out *= a[mj]
    return out


def psi(m: int, y, lam: Sequence[int] | None = None) -> np.ndarray:
    """``D^lam psi^{m,d}`` at points ``y`` of shape (n, d)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = y.shape[1]
    lam = (0,) * d if lam is None else tuple(lam)
    if len(lam) != d:
        raise ValueError("multi-index dimension mismatch")
    spline = bspline_build(m)
    out = np.ones(y.shape[0])
    for j in range(d):
        out *= spline(y[:, j], deriv=lam[j])
    return out


def basis_eval(m: int, d: int, k: int, nu: Sequence[int], x, lam: Sequence[int] | None = None) -> np.ndarray:
    """``D^lam g_{k,nu}^{m,d}(x) = 2^{k|lam|} (D^lam psi^{m,d})(2^k x - nu)``."""
    lam = (0,) * d if lam is None else tuple(int(v) for v in lam)
    if len(lam) != d or len(nu) != d:
        raise ValueError("dimension mismatch")
    if any(v > m or v < 0 for v in lam):
        raise ValueError(f"derivative {lam} exceeds spline order {m} on some axis")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.ldexp(x, k) - np.asarray(nu, dtype=float)
    return np.ldexp(psi(m, y, lam), k * sum(lam))


def refinement_check(m: int, d: int, x) -> np.ndarray:
    """Residual ``psi(x) - sum_mu A_mu psi(2x - mu)`` at points ``x`` (n, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a = refinement_coeffs(m)
    lhs = psi(m, x)
    rhs = np.zeros_like(lhs)
    for mu in product(range(m + 2), repeat=d):
        weight = np.prod([a[v] for v in mu])
        rhs += weight * psi(m, 2.0 * x - np.asarray(mu, dtype=float))
    return lhs - rhs
