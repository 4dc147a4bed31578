"""Dispatch between the compiled kernels and the numpy fallback.

The compiled extension is used when it imports cleanly, unless the
environment variable ``QUASISPLINE_PURE_PYTHON`` is set to a non-empty value
other than ``0``.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("QUASISPLINE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined,no-redef]
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _impl(name: str, backend: str | None):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this installation")
        return getattr(_compiled, name)
    if backend == "python":
        return getattr(_kernels_py, name)
    raise ValueError(f"unknown backend {backend!r}")


def bspline_eval(table: np.ndarray, t: np.ndarray, backend: str | None = None) -> np.ndarray:
    table = np.ascontiguousarray(table, dtype=float)
    t = np.ascontiguousarray(t, dtype=float).ravel()
    return _impl("bspline_eval", backend)(table, t)


def field_eval(
    dense: np.ndarray,
    origin: np.ndarray,
    shape: np.ndarray,
    exps: np.ndarray,
    tables: np.ndarray,
    points: np.ndarray,
    k: int,
    lam,
    backend: str | None = None,
) -> np.ndarray:
    return _impl("field_eval", backend)(
        np.ascontiguousarray(dense, dtype=float),
        np.ascontiguousarray(origin, dtype=np.int64),
        np.ascontiguousarray(shape, dtype=np.int64),
        np.ascontiguousarray(exps, dtype=np.int64),
        np.ascontiguousarray(tables, dtype=float),
        np.ascontiguousarray(np.atleast_2d(points), dtype=float),
        int(k),
        np.ascontiguousarray(lam, dtype=np.int64),
    )
