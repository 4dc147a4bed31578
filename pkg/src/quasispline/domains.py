"""Bounded open domains with exact box oracles where geometry allows.

Every domain answers three vectorized queries:

* ``contains(x)`` for points of shape (n, d);
* ``boxes_meet(lo, hi)``: does the closed box ``[lo, hi]`` intersect D;
* ``boxes_inside(lo, hi)``: is the closed box contained in D.

Boxes are given by arrays of lower and upper corners, shape (n, d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class Domain:
    d: int
    tag: str

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boxes_meet(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boxes_inside(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        return True

    def diameter(self) -> float:
        lo, hi = self.bbox
        return float(np.max(hi - lo))

    def describe(self) -> dict[str, Any]:
        return {"domain": self.tag}


def _boxes(lo, hi, d):
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or lo.shape[1] != d:
        raise ValueError(f"boxes must have shape (n, {d})")
    return lo, hi


@dataclass(frozen=True, eq=False)
class Box(Domain):
    """Open axis-parallel box ``(lower, upper)``; the unit cube by default."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    tag: str = "unit-cube"

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def bbox(self):
        return np.array(self.lower, float), np.array(self.upper, float)

    def contains(self, x):
        x = np.atleast_2d(x)
        a, b = self.bbox
        return np.all((x > a) & (x < b), axis=1)

    def boxes_meet(self, lo, hi):
        lo, hi = _boxes(lo, hi, self.d)
        a, b = self.bbox
        return np.all((lo < b) & (hi > a), axis=1)

    def boxes_inside(self, lo, hi):
        lo, hi = _boxes(lo, hi, self.d)
        a, b = self.bbox
        return np.all((lo > a) & (hi < b), axis=1)

    def describe(self):
        if self.tag == "unit-cube":
            return {"domain": "unit-cube", "dim": self.d}
        return {"domain": "box", "lower": list(self.lower), "upper": list(self.upper)}


def unit_cube(d: int) -> Box:
    return Box((0.0,) * d, (1.0,) * d)


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    """Open Euclidean ball."""

    center: tuple[float, ...]
    radius: float
    tag: str = "ball"

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def bbox(self):
        c = np.array(self.center, float)
        return c - self.radius, c + self.radius

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.sum((x - np.array(self.center)) ** 2, axis=1) < self.radius**2

    def boxes_meet(self, lo, hi):
        lo, hi = _boxes(lo, hi, self.d)
        c = np.array(self.center)
        nearest = np.clip(c, lo, hi)
        return np.sum((nearest - c) ** 2, axis=1) < self.radius**2

    def boxes_inside(self, lo, hi):
        lo, hi = _boxes(lo, hi, self.d)
        c = np.array(self.center)
        far = np.maximum(np.abs(lo - c), np.abs(hi - c))
        return np.sum(far**2, axis=1) < self.radius**2

    def describe(self):
        return {"domain": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class LShape(Domain):
    """``(0,1)^2`` minus the closed square ``[1/2, 1] x [1/2, 1]``."""

    tag: str = "l-shape"
    d: int = 2

    @property
    def bbox(self):
        return np.zeros(2), np.ones(2)

    def contains(self, x):
        x = np.atleast_2d(x)
        in_square = np.all((x > 0) & (x < 1), axis=1)
        return in_square & ((x[:, 0] < 0.5) | (x[:, 1] < 0.5))

    def boxes_meet(self, lo, hi):
        lo, hi = _boxes(lo, hi, 2)
        # D = (0,1)x(0,1/2) U (0,1/2)x(0,1)
        r1 = (lo[:, 0] < 1) & (hi[:, 0] > 0) & (lo[:, 1] < 0.5) & (hi[:, 1] > 0)
        r2 = (lo[:, 0] < 0.5) & (hi[:, 0] > 0) & (lo[:, 1] < 1) & (hi[:, 1] > 0)
        return r1 | r2

    def boxes_inside(self, lo, hi):
        lo, hi = _boxes(lo, hi, 2)
        in_square = np.all((lo > 0) & (hi < 1), axis=1)
        hits_notch = (hi[:, 0] >= 0.5) & (hi[:, 1] >= 0.5)
        return in_square & ~hits_notch

    def describe(self):
        return {"domain": "l-shape"}


def _staircase_height(x: np.ndarray) -> np.ndarray:
    """Height of the staircase over abscissa ``x`` in (0, 2); 2^-k on (2^-k, 2^(1-k)]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    mant, expo = np.frexp(x[pos])
    # x in [2^(e-1), 2^e); the closed right endpoint 2^(1-k) belongs to step k
    k = np.where(mant == 0.5, 2 - expo, 1 - expo)
    out[pos] = np.ldexp(1.0, -np.maximum(k, 0))
    out[pos & (x >= 2)] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class Staircase(Domain):
    """Interior of the union of squares ``2^-k e_1 + 2^-k [0,1]^2``, k >= 0.

    Not Lipschitz at the origin; used as the standard non-Lipschitz test case.
    """

    tag: str = "staircase"
    d: int = 2

    @property
    def bbox(self):
        return np.zeros(2), np.array([2.0, 1.0])

    def contains(self, x):
        x = np.atleast_2d(x)
        h = _staircase_height(x[:, 0])
        return (x[:, 0] > 0) & (x[:, 0] < 2) & (x[:, 1] > 0) & (x[:, 1] < h)

    def boxes_meet(self, lo, hi):
        lo, hi = _boxes(lo, hi, 2)
        xr = np.minimum(hi[:, 0], 2.0)
        # height is nondecreasing in x, so the best column is the right edge
        h = np.where(hi[:, 0] >= 2.0, 1.0, _staircase_height(xr))
        return (hi[:, 0] > 0) & (lo[:, 0] < 2) & (hi[:, 1] > 0) & (lo[:, 1] < h)

    def boxes_inside(self, lo, hi):
        lo, hi = _boxes(lo, hi, 2)
        h = _staircase_height(lo[:, 0])
        return (lo[:, 0] > 0) & (hi[:, 0] < 2) & (lo[:, 1] > 0) & (hi[:, 1] < h)

    def describe(self):
        return {"domain": "staircase"}


@dataclass(frozen=True, eq=False)
class Scaled(Domain):
    """``shift + delta * base``."""

    base: Domain
    delta: float
    shift: tuple[float, ...]
    tag: str = "scaled-translate"

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def exact(self) -> bool:
        return self.base.exact

    @property
    def bbox(self):
        lo, hi = self.base.bbox
        s = np.array(self.shift)
        return s + self.delta * lo, s + self.delta * hi

    def _pull(self, x):
        return (np.atleast_2d(x) - np.array(self.shift)) / self.delta

    def contains(self, x):
        return self.base.contains(self._pull(x))

    def boxes_meet(self, lo, hi):
        return self.base.boxes_meet(self._pull(lo), self._pull(hi))

    def boxes_inside(self, lo, hi):
        return self.base.boxes_inside(self._pull(lo), self._pull(hi))

    def describe(self):
        return {
            "domain": "scaled-translate",
            "delta": self.delta,
            "shift": list(self.shift),
            "base": self.base.describe(),
        }


@dataclass(frozen=True, eq=False)
class PredicateDomain(Domain):
    """Domain known only through a membership predicate.

    Box queries sample a ``2^samples_log2`` grid per axis (corners included).
    A sampled hit is definitive for ``boxes_meet``; ``boxes_inside`` rejects
    on any sampled miss, which is conservative only up to the sampling.
    """

    predicate: Callable[[np.ndarray], np.ndarray]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    samples_log2: int = 4
    tag: str = "predicate"
    _grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = 2**self.samples_log2 + 1
        ref = np.linspace(0.0, 1.0, n)
        grid = np.stack(np.meshgrid(*([ref] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
        object.__setattr__(self, "_grid", grid)

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def exact(self) -> bool:
        return False

    @property
    def bbox(self):
        return np.array(self.lower, float), np.array(self.upper, float)

    def contains(self, x):
        return np.asarray(self.predicate(np.atleast_2d(x)), dtype=bool)

    def _sample(self, lo, hi):
        lo, hi = _boxes(lo, hi, self.d)
        pts = lo[:, None, :] + (hi - lo)[:, None, :] * self._grid[None]
        return self.contains(pts.reshape(-1, self.d)).reshape(lo.shape[0], -1)

    def boxes_meet(self, lo, hi):
        return self._sample(lo, hi).any(axis=1)

    def boxes_inside(self, lo, hi):
        return self._sample(lo, hi).all(axis=1)


def make_domain(spec: dict[str, Any]) -> Domain:
    """Build a catalog domain from a config mapping such as ``{"domain": "ball", ...}``."""
    kind = spec.get("domain")
    if kind == "unit-cube":
        return unit_cube(int(spec.get("dim", 2)))
    if kind == "box":
        return Box(tuple(map(float, spec["lower"])), tuple(map(float, spec["upper"])), tag="box")
    if kind == "ball":
        center = tuple(map(float, spec.get("center", [0.5, 0.5])))
        return Ball(center, float(spec.get("radius", 0.5)))
    if kind == "l-shape":
        return LShape()
    if kind == "staircase":
        return Staircase()
    if kind == "scaled-translate":
        base = make_domain(spec["base"])
        shift = tuple(map(float, spec.get("shift", [0.0] * base.d)))
        return Scaled(base, float(spec["delta"]), shift)
    raise ValueError(f"unknown domain {kind!r}")


def is_catalog_name(name: str) -> bool:
    return name in {"unit-cube", "box", "ball", "l-shape", "staircase", "scaled-translate"}


__all__ = [
    "Domain",
    "Box",
    "Ball",
    "LShape",
    "Staircase",
    "Scaled",
    "PredicateDomain",
    "unit_cube",
    "make_domain",
]
