"""Closed-form test functions with exact derivatives.

Every object here is a :class:`Function`: callable on arrays of points of
shape (n, d), with ``derivative(lam)`` returning another ``Function``.
Linear combinations keep derivatives available, which lets Sobolev-type
error norms such as ``||f - A f||_{W^1}`` be computed without numerical
differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Any, Sequence

import numpy as np

from .polynomials import Polynomial, poly_derivative, poly_eval


def _falling(beta: float, r: int) -> float:
    return float(prod(beta - i for i in range(r)))


class Function:
    """Vectorized real function on R^d with exact derivatives."""

    d: int

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, lam: Sequence[int]) -> "Function":
        raise TypeError(f"{type(self).__name__} does not provide derivatives")

    def describe(self) -> dict[str, Any]:
        return {"kind": type(self).__name__}

    def __add__(self, other: "Function") -> "Function":
        return Combination(((1.0, self), (1.0, as_function(other))))

    def __sub__(self, other: "Function") -> "Function":
        return Combination(((1.0, self), (-1.0, as_function(other))))

    def __rmul__(self, c: float) -> "Function":
        return Combination(((float(c), self),))


@dataclass(frozen=True, eq=False)
class Combination(Function):
    terms: tuple[tuple[float, Function], ...]

    @property
    def d(self) -> int:
        return self.terms[0][1].d

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        for c, f in self.terms:
            out += c * f(x)
        return out

    def derivative(self, lam):
        return Combination(tuple((c, f.derivative(lam)) for c, f in self.terms))


@dataclass(frozen=True, eq=False)
class FieldFunction(Function):
    """Adapter for anything with ``eval(x, lam)`` (spline fields, extensions)."""

    field: Any
    lam: tuple[int, ...] | None = None

    @property
    def d(self) -> int:
        return self.field.d

    def __call__(self, x):
        return self.field.eval(np.atleast_2d(np.asarray(x, dtype=float)), self.lam)

    def derivative(self, lam):
        base = self.lam or (0,) * self.d
        return FieldFunction(self.field, tuple(a + b for a, b in zip(base, lam)))


def as_function(obj) -> Function:
    if isinstance(obj, Function):
        return obj
    if isinstance(obj, Polynomial):
        return PolynomialFunction(obj)
    if hasattr(obj, "eval") and hasattr(obj, "d"):
        return FieldFunction(obj)
    if callable(obj):
        return Plain(obj, int(getattr(obj, "d", 0)))
    raise TypeError(f"cannot use {type(obj).__name__} as a function")


@dataclass(frozen=True, eq=False)
class Plain(Function):
    """A bare callable; derivatives are unavailable."""

    fn: Any
    d: int = 0

    def __call__(self, x):
        return np.asarray(self.fn(np.atleast_2d(np.asarray(x, dtype=float))), dtype=float)


@dataclass(frozen=True, eq=False)
class PolynomialFunction(Function):
    poly: Polynomial

    @property
    def d(self) -> int:
        return self.poly.d

    def __call__(self, x):
        return np.atleast_1d(poly_eval(self.poly, np.atleast_2d(np.asarray(x, dtype=float))))

    def derivative(self, lam):
        return PolynomialFunction(poly_derivative(self.poly, lam))

    def describe(self):
        return {"kind": "polynomial", "degree": self.poly.degree, "d": self.d}


@dataclass(frozen=True, eq=False)
class TensorTrig(Function):
    """``prod_j cos(2 pi freq_j x_j + phase_j)``."""

    freq: tuple[float, ...]
    phase: tuple[float, ...]
    order: tuple[int, ...] | None = None
    factor: float = 1.0

    @property
    def d(self) -> int:
        return len(self.freq)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        order = self.order or (0,) * self.d
        out = np.full(x.shape[0], self.factor)
        for j in range(self.d):
            w = 2 * np.pi * self.freq[j]
            out *= w ** order[j] * np.cos(w * x[:, j] + self.phase[j] + order[j] * np.pi / 2)
        return out

    def derivative(self, lam):
        base = self.order or (0,) * self.d
        return TensorTrig(self.freq, self.phase, tuple(a + b for a, b in zip(base, lam)), self.factor)

    def describe(self):
        return {"kind": "tensor-trig", "freq": list(self.freq), "phase": list(self.phase)}


@dataclass(frozen=True, eq=False)
class Ridge(Function):
    """Ridge singularities of the ridge variable ``s = direction . x - anchor``.

    ``kind = "cusp"`` gives ``max(s, 0)^beta``; ``kind = "step"`` gives
    ``sign(s) |s|^beta``.  Both have L_p smoothness ``beta + 1/p`` for
    non-integer ``beta``.
    """

    beta: float
    anchor: float
    direction: tuple[float, ...]
    kind: str = "cusp"
    order: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("cusp", "step"):
            raise ValueError(f"unknown ridge kind {self.kind!r}")

    @property
    def d(self) -> int:
        return len(self.direction)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        order = self.order or (0,) * self.d
        r = sum(order)
        s = x @ np.asarray(self.direction, dtype=float) - self.anchor
        scale = _falling(self.beta, r) * prod(a**o for a, o in zip(self.direction, order))
        a = np.abs(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            power = np.where(a > 0, a ** (self.beta - r), 0.0 if self.beta > r else np.inf)
        if self.kind == "cusp":
            return np.where(s > 0, scale * power, 0.0)
        return scale * power * np.sign(s) ** (r + 1)

    def derivative(self, lam):
        base = self.order or (0,) * self.d
        return Ridge(self.beta, self.anchor, self.direction, self.kind, tuple(a + b for a, b in zip(base, lam)))

    def smoothness(self, p: float) -> float:
        return self.beta + 1.0 / p

    def describe(self):
        return {
            "kind": self.kind,
            "beta": self.beta,
            "anchor": self.anchor,
            "direction": list(self.direction),
        }


@dataclass(frozen=True, eq=False)
class Pullback(Function):
    """``x -> f(shift + delta * x)``; ``inverse=True`` gives ``x -> f((x - shift) / delta)``."""

    f: Function
    delta: float
    shift: tuple[float, ...]
    inverse: bool = False

    @property
    def d(self) -> int:
        return self.f.d

    def _map(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s = np.asarray(self.shift, dtype=float)
        return (x - s) / self.delta if self.inverse else s + self.delta * x

    def __call__(self, x):
        return self.f(self._map(x))

    def derivative(self, lam):
        factor = (1.0 / self.delta if self.inverse else self.delta) ** sum(lam)
        return factor * Pullback(self.f.derivative(lam), self.delta, self.shift, self.inverse)


# irrational anchors keep singularities off every dyadic grid
ANCHORS = (0.5 * np.sqrt(2) - 0.2, np.pi / 10 + 0.1, 0.5 * (np.sqrt(5) - 1), np.e / 5, 1 / np.sqrt(3), 0.9 / np.sqrt(2))


def ridge_family(d: int, beta: float, count: int = 6, kind: str = "cusp") -> list[Ridge]:
    """A fixed family of ridge functions with non-dyadic anchors.

    In one dimension the members differ by anchor; in higher dimensions the
    ridge direction is tilted as well.
    """
    out = []
    for i in range(count):
        anchor = float(ANCHORS[i % len(ANCHORS)])
        if d == 1:
            direction = (1.0,) if i % 2 == 0 else (-1.0,)
            if direction[0] < 0:
                anchor = -anchor
        else:
            angle = 0.35 + 0.9 * i / max(count, 1)
            direction = (np.cos(angle), np.sin(angle)) + (0.25,) * (d - 2)
            anchor = anchor * sum(direction) / 1.5
        out.append(Ridge(beta, anchor, tuple(float(v) for v in direction), kind))
    return out


def make_function(spec: dict[str, Any], d: int) -> Function:
    """Build a catalog function from a config mapping."""
    kind = spec.get("kind", "cusp")
    if kind in ("cusp", "step"):
        direction = tuple(float(v) for v in spec.get("direction", [1.0] + [0.0] * (d - 1)))
        return Ridge(float(spec["beta"]), float(spec.get("anchor", ANCHORS[0])), direction, kind)
    if kind == "tensor-trig":
        freq = tuple(float(v) for v in spec.get("freq", [1.0] * d))
        phase = tuple(float(v) for v in spec.get("phase", [0.3] * d))
        return TensorTrig(freq, phase)
    if kind == "polynomial":
        coeffs = spec["coeffs"]
        return PolynomialFunction(Polynomial.from_vector(d, int(spec["degree"]), coeffs))
    raise ValueError(f"unknown function kind {kind!r}")


__all__ = [
    "Function",
    "Combination",
    "FieldFunction",
    "Plain",
    "PolynomialFunction",
    "TensorTrig",
    "Ridge",
    "Pullback",
    "ridge_family",
    "make_function",
    "as_function",
    "ANCHORS",
]
