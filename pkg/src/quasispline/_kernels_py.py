"""Pure numpy implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly; see
``quasispline.kernels`` for the dispatch.
"""

from __future__ import annotations

from itertools import product
from math import comb, prod

import numpy as np


def _horner(table_row_coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    for c in table_row_coeffs[::-1]:
        out = out * u + c
    return out


def bspline_eval(table: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate a piecewise polynomial on ``[j, j+1)``, ``j = 0..rows-1``; zero elsewhere."""
    t = np.asarray(t, dtype=float)
    j = np.floor(t)
    u = t - j
    j = j.astype(np.int64)
    out = np.zeros_like(t)
    for piece in range(table.shape[0]):
        sel = j == piece
        if np.any(sel):
            out[sel] = _horner(table[piece], u[sel])
    return out


def field_eval(
    dense: np.ndarray,
    origin: np.ndarray,
    shape: np.ndarray,
    exps: np.ndarray,
    tables: np.ndarray,
    points: np.ndarray,
    k: int,
    lam: np.ndarray,
) -> np.ndarray:
    """``D^lam`` of ``sum_nu P_nu(2^k x - nu) psi(2^k x - nu)`` at ``points``.

    ``dense`` rows are the local coefficient vectors of ``P_nu`` stored
    row-major over the index box ``origin + [0, shape)``; rows of absent
    indices are zero.
    """
    points = np.ascontiguousarray(points, dtype=float)
    n, d = points.shape
    m = tables.shape[1] - 1
    z = np.ldexp(points, k)
    cell = np.floor(z)
    u = z - cell
    cell = cell.astype(np.int64)
    strides = np.ones(d, dtype=np.int64)
    for j in range(d - 2, -1, -1):
        strides[j] = strides[j + 1] * shape[j + 1]
    lam = tuple(int(v) for v in lam)
    mus = list(product(*(range(v + 1) for v in lam)))
    out = np.zeros(n)
    for off in product(range(m + 1), repeat=d):
        off_arr = np.asarray(off, dtype=np.int64)
        idx = cell - off_arr - origin
        ok = np.all((idx >= 0) & (idx < shape), axis=1)
        if not np.any(ok):
            continue
        rows = idx[ok] @ strides
        coef = dense[rows]
        y = u[ok] + off_arr
        acc = np.zeros(rows.shape[0])
        for mu in mus:
            weight = prod(comb(lj, mj) for lj, mj in zip(lam, mu))
            # D^mu P at y
            valid = np.all(exps >= np.asarray(mu), axis=1)
            fall = np.array(
                [prod(prod(range(ej - mj + 1, ej + 1)) for ej, mj in zip(e, mu)) if ok_t else 0 for e, ok_t in zip(exps, valid)],
                dtype=float,
            )
            if not np.any(valid):
                continue
            mono = np.ones((rows.shape[0], exps.shape[0]))
            for j in range(d):
                p = np.where(valid, exps[:, j] - mu[j], 0)
                mono *= y[:, j : j + 1] ** p[None, :]
            poly = (mono * coef) @ fall
            basis = np.ones(rows.shape[0])
            for j in range(d):
                basis *= _horner(tables[lam[j] - mu[j], off[j]], u[ok][:, j])
            acc += weight * poly * basis
        out[ok] += acc
    return np.ldexp(out, k * sum(lam))
