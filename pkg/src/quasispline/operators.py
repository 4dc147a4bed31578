"""Extension, sampling recovery and derivative approximation operators.

All three are assembled from the quasi-interpolant machinery: extension is
the truncated telescoping series of details, recovery replaces the local
projections by Lagrange interpolation at a fixed point lattice per interior
cell, and the derivative operator differentiates the quasi-interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analysis import DEFAULT_QUAD, QuadratureSpec, lp_norm
from .domains import Domain
from .functions import FieldFunction, Function, as_function
from .geometry import active_cells, interior_cells, nearest_interior
from .multiscale import SplineField, _reframe, quasi_interpolant, two_scale_refine
from .polynomials import affine_matrix, exponent_array, lattice_solve, monomial_matrix


def first_admissible_level(D: Domain, k_max: int = 20) -> int:
    """Smallest level with a closed cell inside D."""
    for k in range(k_max + 1):
        if interior_cells(D, k).shape[0]:
            return k
    raise ValueError(f"no interior cells up to level {k_max}")


# ---------------------------------------------------------------------------
# extension


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    """``E_{K0} f + sum_{k = K0+1}^{k_max} (E_k f - H_{k-1} E_{k-1} f)`` on R^d."""

    base: SplineField
    details: tuple[SplineField, ...]
    K0: int
    k_max: int

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def fields(self) -> tuple[SplineField, ...]:
        return (self.base,) + self.details

    def eval(self, x, lam: Sequence[int] | None = None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = self.base.eval(x, lam)
        for F in self.details:
            out = out + F.eval(x, lam)
        return out

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def support_box(self, D: Domain) -> tuple[np.ndarray, np.ndarray]:
        """Box outside which the extension vanishes: the bounding box inflated by ``(m+1) 2^-K0``."""
        lo, hi = D.bbox
        pad = (self.base.m + 1) * 2.0**-self.K0
        return lo - pad, hi + pad


def extend(
    f: Callable[[np.ndarray], np.ndarray],
    D: Domain,
    l: int,
    k_max: int,
    m: int | None = None,
    K0: int | None = None,
    points: int | None = None,
) -> ExtensionResult:
    """Truncated extension series from level ``K0`` (default: first admissible level) to ``k_max``.

    On D the result equals ``E_{k_max} f``; outside it is the spline
    continuation, supported in :meth:`ExtensionResult.support_box`.
    """
    K0 = first_admissible_level(D) if K0 is None else K0
    if interior_cells(D, K0).shape[0] == 0:
        raise ValueError(f"level K0={K0} has no interior cells")
    if k_max < K0:
        raise ValueError("k_max must be at least K0")
    levels = {k: quasi_interpolant(f, D, k, l, m, points) for k in range(K0, k_max + 1)}
    details = tuple(levels[k] - two_scale_refine(levels[k - 1], D) for k in range(K0 + 1, k_max + 1))
    return ExtensionResult(levels[K0], details, K0, k_max)


# ---------------------------------------------------------------------------
# sampling recovery


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sample points ``2^-k (nu + 1/4 + mu / (2l))`` for interior ``nu`` and ``|mu| <= l - 1``.

    ``points`` has shape (n_cells, n_mu, d); ``values`` (same leading shape)
    is None for a bare skeleton.
    """

    k: int
    l: int
    cells: np.ndarray
    points: np.ndarray
    values: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.cells.shape[1]

    @property
    def count(self) -> int:
        return int(self.points.shape[0] * self.points.shape[1])

    def with_values(self, values: np.ndarray) -> "SampleSet":
        values = np.asarray(values, dtype=float).reshape(self.points.shape[:2])
        return SampleSet(self.k, self.l, self.cells, self.points, values)


def sample_points(D: Domain, k: int, l: int) -> SampleSet:
    cells = interior_cells(D, k)
    if cells.shape[0] == 0:
        raise ValueError(f"level {k} has no interior cells")
    d = cells.shape[1]
    mus = exponent_array(d, l - 1).astype(float)
    z = 0.25 + mus / (2 * l)
    pts = np.ldexp(cells[:, None, :] + z[None], -k)
    return SampleSet(k, l, cells, pts)


def sample(f: Callable[[np.ndarray], np.ndarray], skeleton: SampleSet) -> SampleSet:
    """Evaluate ``f`` at every sample point (this is the information map)."""
    d = skeleton.d
    vals = np.asarray(f(skeleton.points.reshape(-1, d)), dtype=float)
    return skeleton.with_values(vals)


def local_interpolants(samples: SampleSet) -> np.ndarray:
    """Per interior cell, the interpolant's coefficients in ``z = 2^k x - nu``."""
    if samples.values is None:
        raise ValueError("sample set carries no values")
    if not np.all(np.isfinite(samples.values)):
        raise ValueError("missing sample values")
    d, l = samples.d, samples.l
    # lattice coordinates w = 2l (z - 1/4)
    coef_w = lattice_solve(d, l - 1, samples.values.T).T
    to_z = affine_matrix(d, l - 1, [2.0 * l] * d, [-0.5 * l] * d)
    return coef_w @ to_z.T


def interpolation_residual(samples: SampleSet) -> float:
    """Largest ``|R_nu t (x) - f(x)|`` over the sample points of each interior cell."""
    coef = local_interpolants(samples)
    z = np.ldexp(samples.points, samples.k) - samples.cells[:, None, :]
    exps = exponent_array(samples.d, samples.l - 1)
    vals = np.einsum("cij,cj->ci", monomial_matrix(z.reshape(-1, samples.d), exps).reshape(z.shape[0], z.shape[1], -1), coef)
    return float(np.max(np.abs(vals - samples.values)))


def recovery(samples: SampleSet, D: Domain, m: int | None = None) -> SplineField:
    """Spline built only from the sample values: each active shift uses its nearest interior cell's interpolant."""
    m = samples.l if m is None else m
    k = samples.k
    local = local_interpolants(samples)
    pos = {tuple(int(v) for v in c): i for i, c in enumerate(samples.cells)}
    active = active_cells(D, k, m)
    targets = nearest_interior(D, k, active)
    rows = np.array([pos[tuple(int(v) for v in t)] for t in targets], dtype=np.int64)
    coeffs = _reframe(local[rows], active - targets, samples.l - 1)
    return SplineField(k, m, samples.l - 1, active, coeffs)


def recover(f: Callable[[np.ndarray], np.ndarray], D: Domain, k: int, l: int, m: int | None = None) -> tuple[SplineField, SampleSet]:
    samples = sample(f, sample_points(D, k, l))
    return recovery(samples, D, m), samples


# ---------------------------------------------------------------------------
# derivative approximation


def _positive_part(v: float) -> float:
    return max(v, 0.0)


@dataclass(frozen=True, eq=False)
class StechkinOperator:
    """``V f = D^lam (E_k f)`` restricted to D."""

    D: Domain
    k: int
    l: int
    m: int
    lam: tuple[int, ...]
    points: int | None = None

    def __post_init__(self) -> None:
        lam = tuple(int(v) for v in self.lam)
        object.__setattr__(self, "lam", lam)
        if len(lam) != self.D.d or min(lam) < 0:
            raise ValueError(f"multi-index {lam} does not match dimension {self.D.d}")
        if sum(lam) > self.m or max(lam) > self.m:
            raise ValueError(f"derivative {lam} is out of range for spline order {self.m}")

    def field(self, f) -> SplineField:
        return quasi_interpolant(f, self.D, self.k, self.l, self.m, self.points)

    def apply(self, f) -> Function:
        return FieldFunction(self.field(f), self.lam)

    def exponent(self, s: float, q: float) -> float:
        """``tau = |lam| + (d/s - d/q)_+``."""
        d = self.D.d
        return sum(self.lam) + _positive_part(d / s - (0.0 if np.isinf(q) else d / q))

    def ceiling(self, s: float, q: float) -> float:
        """``2^(k tau)``: the level dependence of the operator norm bound."""
        return 2.0 ** (self.k * self.exponent(s, q))


def rough_inputs(D: Domain, level: int, count: int, seed: int) -> list[Function]:
    """Piecewise-constant random functions on the level-``level`` grid over D's bounding box."""
    rng = np.random.default_rng(seed)
    lo, hi = D.bbox
    scale = 2.0**level
    shape = tuple(int(v) for v in np.ceil((hi - lo) * scale).astype(np.int64))
    out = []
    for _ in range(count):
        table = rng.standard_normal(shape)

        def f(x, table=table):
            idx = np.floor((np.atleast_2d(x) - lo) * scale).astype(np.int64)
            idx = np.clip(idx, 0, np.array(shape) - 1)
            return table[tuple(idx.T)]

        out.append(as_function(f))
    return out


def norm_probe(
    V: StechkinOperator,
    s: float,
    q: float,
    trials: int = 24,
    seed: int = 0,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Lower bound for ``||V||_{L_s -> L_q}``: the largest ratio over random rough inputs."""
    quad = quad.with_level(max(quad.level, V.k + 2))
    best = 0.0
    for f in rough_inputs(V.D, V.k + 1, trials, seed):
        num = lp_norm(V.apply(f), V.D, q, quad)
        den = lp_norm(f, V.D, s, quad)
        best = max(best, num / den)
    return best


def error_probe(V: StechkinOperator, family: Sequence[Function], q: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``max_f ||D^lam f - V f||_{L_q(D)}`` over a test family."""
    worst = 0.0
    for f in family:
        fn = as_function(f)
        err = fn.derivative(V.lam) - V.apply(fn)
        worst = max(worst, lp_norm(err, V.D, q, quad))
    return worst


__all__ = [
    "first_admissible_level",
    "ExtensionResult",
    "extend",
    "SampleSet",
    "sample_points",
    "sample",
    "local_interpolants",
    "interpolation_residual",
    "recovery",
    "recover",
    "StechkinOperator",
    "rough_inputs",
    "norm_probe",
    "error_probe",
]
