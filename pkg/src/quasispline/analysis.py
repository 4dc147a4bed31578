"""Norms, finite differences, moduli of smoothness and rate fitting.

Integrals over a domain use a dyadic tiling of its bounding box: tiles whose
open interior lies in D get a tensor Gauss rule, tiles on the boundary are
bisected ``depth`` times and the Gauss nodes of the remaining boundary tiles
are kept only where they fall inside D.  Boxes are integrated exactly by a
uniform subdivision of the box itself.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache
from math import comb, floor
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .domains import Box, Domain
from .functions import Function, Pullback, as_function
from .polynomials import multi_indices
from .projection import gauss_rule


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical integration settings; with a fixed seed every result is deterministic.

    Attributes
    ----------
    order : int
        Gauss points per axis on each tile.
    level : int
        Tiles have side ``2**-level`` (for boxes: the box is cut into
        ``2**level`` pieces per axis).
    depth : int
        Bisection depth for tiles cut by the boundary.
    xi_samples : int
        Number of shift vectors for the averaged modulus.
    xi_rule : str
        ``"sobol"``, ``"gauss"`` or ``"auto"`` (Gauss in one dimension).
    xi_panels : int
        Gauss panels per half-axis when ``xi_rule`` resolves to Gauss.
    sup_grid : int
        Extra grid points per axis in ``tB`` for the sup modulus.
    guard_samples : int
        Segment samples checked for ``x + s l xi in D``.
    level_offset : int
        Moduli at scale t integrate on tiles of side about ``t 2**-level_offset``.
    max_level : int
        Moduli use at most ``2**max_level`` tiles, i.e. a tiling level of at
        most ``max_level // d``.
    seed : int
    """

    order: int = 6
    level: int = 5
    depth: int = 3
    xi_samples: int = 1024
    xi_rule: str = "auto"
    xi_panels: int = 4
    sup_grid: int = 8
    guard_samples: int = 8
    level_offset: int = 3
    max_level: int = 14
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("order", "xi_samples", "xi_panels", "sup_grid", "guard_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"quadrature field {name!r} must be at least 1")
        if self.level < 0 or self.depth < 0:
            raise ValueError("quadrature level and depth must be nonnegative")
        if self.xi_rule not in ("auto", "sobol", "gauss"):
            raise ValueError(f"unknown shift rule {self.xi_rule!r}")

    def with_level(self, level: int) -> "QuadratureSpec":
        return QuadratureSpec(**{**asdict(self), "level": int(level)})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_QUAD = QuadratureSpec()


# ---------------------------------------------------------------------------
# quadrature rules


def box_rule(lower, upper, level: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on the box ``[lower, upper]`` (``2**level`` pieces per axis)."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    z, w = gauss_rule(lower.shape[0], order, level)
    width = np.maximum(upper - lower, 0.0)
    return lower + z * width, w * float(np.prod(width))


def _tile_nodes(lo: np.ndarray, h: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    d = lo.shape[1]
    z, w = gauss_rule(d, order)
    x = (lo[:, None, :] + h * z[None]).reshape(-1, d)
    return x, np.tile(w * h**d, lo.shape[0])


@lru_cache(maxsize=64)
def domain_rule(D: Domain, level: int, depth: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating over D (see module docstring)."""
    if isinstance(D, Box):
        x, w = box_rule(*D.bbox, level, order)
    else:
        lo, hi = D.bbox
        d = lo.shape[0]
        h = 2.0**-level
        a = np.floor(lo / h).astype(np.int64)
        b = np.ceil(hi / h).astype(np.int64)
        axes = [np.arange(s, e) for s, e in zip(a, b)]
        tiles = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1) * h
        xs, ws = [], []
        for step in range(depth + 1):
            eps = 1e-9 * h
            full = D.boxes_inside(tiles + eps, tiles + h - eps)
            meet = D.boxes_meet(tiles, tiles + h)
            if np.any(full):
                x, w = _tile_nodes(tiles[full], h, order)
                xs.append(x)
                ws.append(w)
            edge = tiles[meet & ~full]
            if step == depth or edge.shape[0] == 0:
                break
            offs = np.stack(
                [g.ravel() for g in np.meshgrid(*([np.array([0.0, 0.5])] * d), indexing="ij")], axis=1
            )
            tiles = (edge[:, None, :] + h * offs[None]).reshape(-1, d)
            h /= 2
        if edge.shape[0]:
            x, w = _tile_nodes(edge, h, order)
            keep = D.contains(x)
            xs.append(x[keep])
            ws.append(w[keep])
        x = np.concatenate(xs) if xs else np.zeros((0, d))
        w = np.concatenate(ws) if ws else np.zeros(0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _rule(D: Domain, quad: QuadratureSpec, level: int | None = None):
    return domain_rule(D, quad.level if level is None else level, quad.depth, quad.order)


def _norm(vals: np.ndarray, w: np.ndarray, p: float) -> float:
    if vals.size == 0:
        return 0.0
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    return float(np.dot(w, np.abs(vals) ** p) ** (1.0 / p))


def _check_p(p: float) -> float:
    p = float(p)
    if p < 1:
        raise ValueError(f"L_p exponent must be at least 1, got {p}")
    return p


def lp_norm(f, D: Domain, p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``||f||_{L_p(D)}``; for ``p = inf`` the maximum over the same nodes."""
    p = _check_p(p)
    x, w = _rule(D, quad)
    return _norm(np.asarray(f(x), dtype=float), w, p)


def sobolev_norm(f, D: Domain, q: float, order: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``max(||f||_q, max_{|lam| = order} ||D^lam f||_q)``; needs exact derivatives."""
    q = _check_p(q)
    fn = as_function(f)
    out = lp_norm(fn, D, q, quad)
    if order == 0:
        return out
    d = D.d
    for lam in multi_indices(d, order):
        if sum(lam) != order:
            continue
        out = max(out, lp_norm(fn.derivative(lam), D, q, quad))
    return out


# ---------------------------------------------------------------------------
# differences and moduli


def _binomial_weights(l: int) -> np.ndarray:
    return np.array([comb(l, i) * (-1) ** (l - i) for i in range(l + 1)], dtype=float)


def _guard(D: Domain, x: np.ndarray, step: np.ndarray, samples: int) -> np.ndarray:
    """``x + s step in D`` for ``samples`` equispaced s in [0, 1]."""
    ok = np.ones(x.shape[0], dtype=bool)
    for s in np.linspace(0.0, 1.0, samples):
        ok &= D.contains(x + s * step)
    return ok


def difference(f, xi, l: int, x, D: Domain | None = None, guard_samples: int = 8) -> np.ndarray:
    """``(Delta_xi^l f)(x)``; points outside ``D_{l xi}`` give NaN when D is given."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(x.shape[0])
    for i, c in enumerate(_binomial_weights(l)):
        out += c * np.asarray(f(x + i * xi), dtype=float)
    if D is not None:
        out[~_guard(D, x, l * xi, guard_samples)] = np.nan
    return out


def _shift_rule(d: int, t: float, quad: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Shift vectors in ``t B`` and normalized weights (summing to one)."""
    rule = quad.xi_rule
    if rule == "auto":
        rule = "gauss" if d == 1 else "sobol"
    if rule == "gauss":
        # the integrand is not smooth at xi = 0, so split each axis there
        panels = quad.xi_panels
        z, w = gauss_rule(1, 8, 0)
        edges = np.linspace(-1.0, 1.0, 2 * panels + 1)
        nodes = ((edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * z[:, 0][None])).ravel()
        weights = np.tile(w, 2 * panels) * np.repeat(np.diff(edges), len(w))
        grids = np.meshgrid(*([nodes] * d), indexing="ij")
        xi = np.stack([g.ravel() for g in grids], axis=1)
        wg = np.meshgrid(*([weights] * d), indexing="ij")
        wt = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    else:
        sampler = qmc.Sobol(d, scramble=True, seed=quad.seed)
        m = max(0, int(np.ceil(np.log2(quad.xi_samples))))
        xi = 2.0 * sampler.random_base2(m) - 1.0
        wt = np.ones(xi.shape[0])
    return t * xi, wt / wt.sum()


def _modulus_level(t: float, quad: QuadratureSpec, d: int) -> int:
    # max_level bounds the tile count 2^(level d), so the per-axis cap shrinks with d
    lvl = int(np.ceil(np.log2(1.0 / t))) + quad.level_offset if t < 1 else quad.level_offset
    return int(min(max(lvl, quad.level), max(quad.max_level // d, quad.level)))


def _shift_integrals(f, D: Domain, l: int, xis: np.ndarray, p: float, quad: QuadratureSpec, level: int) -> np.ndarray:
    """``||Delta_xi^l f||_{L_p(D_{l xi})}^p`` (or the sup norm) for each shift."""
    weights = _binomial_weights(l)
    out = np.zeros(xis.shape[0])
    if isinstance(D, Box):
        a, b = D.bbox
        for i, xi in enumerate(xis):
            lo = np.maximum(a, a - l * xi)
            hi = np.minimum(b, b - l * xi)
            if np.any(hi <= lo):
                continue
            x, w = box_rule(lo, hi, level, quad.order)
            vals = sum(c * np.asarray(f(x + j * xi), dtype=float) for j, c in enumerate(weights))
            out[i] = np.max(np.abs(vals)) if np.isinf(p) else np.dot(w, np.abs(vals) ** p)
        return out
    x, w = domain_rule(D, level, quad.depth, quad.order)
    for i, xi in enumerate(xis):
        ok = _guard(D, x, l * xi, quad.guard_samples)
        if not np.any(ok):
            continue
        xx = x[ok]
        vals = sum(c * np.asarray(f(xx + j * xi), dtype=float) for j, c in enumerate(weights))
        out[i] = np.max(np.abs(vals)) if np.isinf(p) else np.dot(w[ok], np.abs(vals) ** p)
    return out


def _root(v: float, p: float) -> float:
    return float(v) if np.isinf(p) else float(v) ** (1.0 / p)


def modulus_avg(f, D: Domain, l: int, t: float, p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Averaged modulus ``((2t)^-d int_{tB} ||Delta_xi^l f||_p^p dxi)^(1/p)``."""
    if t <= 0:
        raise ValueError("t must be positive")
    p = _check_p(p)
    if np.isinf(p):
        raise ValueError("the averaged modulus needs p < inf")
    xis, wt = _shift_rule(D.d, t, quad)
    vals = _shift_integrals(f, D, l, xis, p, quad, _modulus_level(t, quad, D.d))
    return _root(np.dot(wt, vals), p)


def _sup_shifts(d: int, t: float, quad: QuadratureSpec) -> np.ndarray:
    xis, _ = _shift_rule(d, t, quad)
    g = np.linspace(-t, t, quad.sup_grid + 1)
    grid = np.stack([a.ravel() for a in np.meshgrid(*([g] * d), indexing="ij")], axis=1)
    return np.concatenate([xis, grid])


def modulus_sup(f, D: Domain, l: int, t: float, p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``sup_{h in tB} ||Delta_h^l f||_{L_p(D_{lh})}`` over a finite set of shifts.

    The shift set contains every shift used by :func:`modulus_avg`, so the
    computed value never falls below the averaged one.  It is a lower bound
    for the true supremum.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    p = _check_p(p)
    xis = _sup_shifts(D.d, t, quad)
    vals = _shift_integrals(f, D, l, xis, p, quad, _modulus_level(t, quad, D.d))
    return _root(np.max(vals), p)


def moduli(f, D: Domain, l: int, t: float, p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Averaged and sup moduli from one shared set of shift integrals."""
    p = _check_p(p)
    xis, wt = _shift_rule(D.d, t, quad)
    allxi = _sup_shifts(D.d, t, quad)
    vals = _shift_integrals(f, D, l, allxi, p, quad, _modulus_level(t, quad, D.d))
    avg = np.dot(wt, vals[: xis.shape[0]])
    return _root(avg, p), _root(np.max(vals), p)


# ---------------------------------------------------------------------------
# scaling


def affine_pullback(f, delta: float, shift: Sequence[float], inverse: bool = False) -> Function:
    """``(h f)(x) = f(shift + delta x)``, or its inverse ``f((x - shift) / delta)``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return Pullback(as_function(f), float(delta), tuple(float(v) for v in shift), inverse)


# ---------------------------------------------------------------------------
# smoothness classes


def order_for(alpha: float) -> int:
    """``l(alpha)``: the least integer strictly above ``alpha``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return floor(alpha) + 1


@dataclass(frozen=True)
class SmoothnessClass:
    """``(alpha, p, theta)``; ``theta = inf`` is the Nikolskii case."""

    alpha: float
    p: float
    theta: float = float("inf")

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 1 < self.p < np.inf:
            raise ValueError("class norms need 1 < p < inf")
        if self.theta < 1:
            raise ValueError("theta must be at least 1")

    @property
    def l(self) -> int:
        return order_for(self.alpha)

    @property
    def nikolskii(self) -> bool:
        return bool(np.isinf(self.theta))


@dataclass
class ClassNorm:
    value: float
    lp: float
    modulus_term: float
    levels: list[int]
    moduli: list[float]
    tail: float = 0.0


def class_norm_detail(
    f,
    D: Domain,
    cls: SmoothnessClass,
    quad: QuadratureSpec = DEFAULT_QUAD,
    j_range: tuple[int, int] = (0, 10),
) -> ClassNorm:
    """Nikolskii or Besov norm with averaged moduli on the grid ``t = 2^-j``.

    Besov: each block ``[2^-(j+1), 2^-j]`` of the t-integral uses the modulus
    at its left end; the range ``t > 2^-j_min`` is bounded analytically with
    ``Omega' <= 2^l ||f||_p``.
    """
    j0, j1 = j_range
    levels = list(range(j0, j1 + 1))
    lp = lp_norm(f, D, cls.p, quad)
    omegas = [modulus_avg(f, D, cls.l, 2.0**-j, cls.p, quad) for j in levels]
    a = cls.alpha
    if cls.nikolskii:
        term = max(2.0 ** (j * a) * om for j, om in zip(levels, omegas))
        return ClassNorm(max(lp, term), lp, term, levels, omegas)
    th = cls.theta
    total = 0.0
    for j, om in zip(levels[:-1], omegas[1:]):
        block = (2.0 ** ((j + 1) * th * a) - 2.0 ** (j * th * a)) / (th * a)
        total += block * om**th
    tail = (2.0**cls.l * lp) ** th * 2.0 ** (j0 * th * a) / (th * a)
    term = (total + tail) ** (1.0 / th)
    return ClassNorm(max(lp, term), lp, term, levels, omegas, tail)


def class_norm(f, D: Domain, cls: SmoothnessClass, quad: QuadratureSpec = DEFAULT_QUAD, j_range=(0, 10)) -> float:
    return class_norm_detail(f, D, cls, quad, j_range).value


# ---------------------------------------------------------------------------
# rates


@dataclass(frozen=True)
class RateFit:
    """Least-squares line ``log2(value) = slope * level + intercept``."""

    levels: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    max_residual: float

    def as_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "values": list(self.values),
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
        }


def fit_rate(levels: Sequence[float], values: Sequence[float]) -> RateFit:
    x = np.asarray(levels, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape or x.size < 3:
        raise ValueError("need at least three (level, value) pairs")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("rate fitting needs finite positive values")
    y = np.log2(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(tuple(map(float, x)), tuple(map(float, v)), float(slope), float(intercept), resid)


class DegenerateModulusError(ValueError):
    """The modulus vanishes on the grid (e.g. a polynomial of degree below l)."""


def measure_smoothness(
    f,
    D: Domain,
    p: float,
    l: int,
    t_levels: Sequence[int] = tuple(range(4, 11)),
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> RateFit:
    """Fit ``Omega'^l(f, t) ~ t^alpha`` on ``t = 2^-j``; ``alpha`` is ``-slope``.

    The returned fit is in the variable ``j``, so the smoothness estimate is
    ``-fit.slope``.
    """
    scale = lp_norm(f, D, p, quad)
    omegas = [modulus_avg(f, D, l, 2.0**-j, p, quad) for j in t_levels]
    if scale == 0 or min(omegas) <= 1e-12 * max(scale, 1e-300):
        raise DegenerateModulusError("modulus vanishes on the grid; smoothness is undefined")
    return fit_rate(list(t_levels), omegas)


__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "box_rule",
    "domain_rule",
    "lp_norm",
    "sobolev_norm",
    "difference",
    "modulus_avg",
    "modulus_sup",
    "moduli",
    "affine_pullback",
    "order_for",
    "SmoothnessClass",
    "ClassNorm",
    "class_norm",
    "class_norm_detail",
    "RateFit",
    "fit_rate",
    "measure_smoothness",
    "DegenerateModulusError",
]
