# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; behaviour matches ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, ldexp

cnp.import_array()


cdef inline double _horner(const double[:, :] table, Py_ssize_t row, double u) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(table.shape[1] - 1, -1, -1):
        acc = acc * u + table[row, i]
    return acc


def bspline_eval(const double[:, :] table, const double[:] t):
    cdef Py_ssize_t n = t.shape[0], i, j
    cdef Py_ssize_t rows = table.shape[0]
    cdef double fj
    out = np.zeros(n)
    cdef double[:] res = out
    with nogil:
        for i in range(n):
            fj = floor(t[i])
            j = <Py_ssize_t>fj
            if 0 <= j < rows:
                res[i] = _horner(table, j, t[i] - fj)
    return out


cdef inline double _falling(long e, long r) noexcept nogil:
    cdef double out = 1.0
    cdef long i
    for i in range(e - r + 1, e + 1):
        out *= i
    return out


def field_eval(
    const double[:, :] dense,
    const long long[:] origin,
    const long long[:] shape,
    const long long[:, :] exps,
    const double[:, :, :] tables,
    const double[:, :] points,
    int k,
    const long long[:] lam,
):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1]
    cdef Py_ssize_t T = exps.shape[0]
    cdef Py_ssize_t m = tables.shape[1] - 1
    cdef Py_ssize_t i, j, t, s, row, n_off, n_mu, q, r
    cdef long long idx
    cdef double acc, poly, basis, term, weight, val
    cdef int maxdeg = 0
    for t in range(T):
        for j in range(d):
            if exps[t, j] > maxdeg:
                maxdeg = <int>exps[t, j]

    strides_a = np.ones(d, dtype=np.int64)
    for j in range(d - 2, -1, -1):
        strides_a[j] = strides_a[j + 1] * shape[j + 1]
    cdef long long[:] strides = strides_a

    n_off = 1
    for j in range(d):
        n_off *= (m + 1)
    n_mu = 1
    for j in range(d):
        n_mu *= (lam[j] + 1)

    # binomial products for each mu, enumerated with axis 0 slowest
    mu_a = np.zeros((n_mu, d), dtype=np.int64)
    wt_a = np.ones(n_mu)
    from math import comb
    for q in range(n_mu):
        r = q
        for j in range(d - 1, -1, -1):
            mu_a[q, j] = r % (lam[j] + 1)
            r //= (lam[j] + 1)
        for j in range(d):
            wt_a[q] *= comb(int(lam[j]), int(mu_a[q, j]))
    cdef long long[:, :] mus = mu_a
    cdef double[:] wts = wt_a

    # falling factor for each (mu, monomial)
    fall_a = np.zeros((n_mu, T))
    for q in range(n_mu):
        for t in range(T):
            val = 1.0
            for j in range(d):
                if exps[t, j] < mus[q, j]:
                    val = 0.0
                    break
                val *= _falling(exps[t, j], mus[q, j])
            fall_a[q, t] = val
    cdef double[:, :] fall = fall_a

    out = np.zeros(n)
    cdef double[:] res = out
    cell_a = np.zeros(d, dtype=np.int64)
    u_a = np.zeros(d)
    off_a = np.zeros(d, dtype=np.int64)
    pw_a = np.zeros((d, maxdeg + 1))
    cdef long long[:] cell = cell_a
    cdef long long[:] off = off_a
    cdef double[:] u = u_a
    cdef double[:, :] pw = pw_a
    cdef double z, y
    cdef bint inside
    cdef int lam_sum = 0
    for j in range(d):
        lam_sum += <int>lam[j]

    with nogil:
        for i in range(n):
            for j in range(d):
                z = ldexp(points[i, j], k)
                cell[j] = <long long>floor(z)
                u[j] = z - floor(z)
            acc = 0.0
            for s in range(n_off):
                r = s
                for j in range(d - 1, -1, -1):
                    off[j] = r % (m + 1)
                    r //= (m + 1)
                row = 0
                inside = True
                for j in range(d):
                    idx = cell[j] - off[j] - origin[j]
                    if idx < 0 or idx >= shape[j]:
                        inside = False
                        break
                    row += idx * strides[j]
                if not inside:
                    continue
                for j in range(d):
                    y = u[j] + off[j]
                    pw[j, 0] = 1.0
                    for r in range(1, maxdeg + 1):
                        pw[j, r] = pw[j, r - 1] * y
                for q in range(n_mu):
                    poly = 0.0
                    for t in range(T):
                        if fall[q, t] == 0.0 or dense[row, t] == 0.0:
                            continue
                        term = dense[row, t] * fall[q, t]
                        for j in range(d):
                            term *= pw[j, exps[t, j] - mus[q, j]]
                        poly += term
                    if poly == 0.0:
                        continue
                    basis = 1.0
                    for j in range(d):
                        basis *= _horner(tables[lam[j] - mus[q, j]], off[j], u[j])
                    acc += wts[q] * poly * basis
            res[i] = ldexp(acc, k * lam_sum)
    return out
