"""Experiment configuration: JSON schema (version 1) and validation.

Every validation failure raises :class:`ConfigError` whose message starts
with the dotted path of the offending field, e.g.
``smoothness.p: must satisfy 1 < p < inf``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .analysis import QuadratureSpec
from .domains import Domain, is_catalog_name, make_domain

SCHEMA_VERSION = 1

COMMANDS = ("selftest", "verify-domain", "rates-approx", "rates-recovery", "stechkin", "extend")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _num(value: Any, path: str, *, allow_inf: bool = False) -> float:
    if isinstance(value, str) and allow_inf and value.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(path, "must be finite")
    return value


def _int(value: Any, path: str, lo: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(path, f"must be >= {lo}")
    return value


def _positive_part(v: float) -> float:
    return max(v, 0.0)


def _recip(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass
class ExperimentConfig:
    """Validated experiment parameters.

    ``alpha`` is ``None`` when the smoothness is to be measured from the
    test family.  ``levels`` is an inclusive range.
    """

    domain: Domain
    domain_spec: dict
    alpha: float | None
    p: float
    q: float
    s: float
    theta: float
    l: int
    m: int
    mm: int
    lam: tuple[int, ...]
    levels: tuple[int, int]
    functions: dict | list
    quadrature: QuadratureSpec
    tolerance: float
    seed: int
    kappa_max: int
    K0: int | None
    probe_pairs: int
    trials: int
    dump_field: bool
    raw: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.domain.d

    def level_range(self) -> list[int]:
        return list(range(self.levels[0], self.levels[1] + 1))

    def echo(self) -> dict:
        """Normalized config for reports (JSON-safe, deterministic)."""

        def enc(v: float) -> float | str:
            return "inf" if math.isinf(v) else v

        return {
            "version": SCHEMA_VERSION,
            "domain": self.domain_spec,
            "smoothness": {
                "alpha": "measure" if self.alpha is None else self.alpha,
                "p": enc(self.p),
                "q": enc(self.q),
                "s": enc(self.s),
                "theta": enc(self.theta),
            },
            "orders": {"l": self.l, "m": self.m, "mm": self.mm, "lambda": list(self.lam)},
            "levels": list(self.levels),
            "functions": self.functions,
            "quadrature": self.quadrature.as_dict(),
            "tolerance": self.tolerance,
            "seed": self.seed,
            "kappa_max": self.kappa_max,
            "K0": self.K0,
            "probe_pairs": self.probe_pairs,
            "trials": self.trials,
            "dump_field": self.dump_field,
        }


def approximation_condition(alpha: float, lam_order: int, d: int, p: float, q: float) -> float:
    """``alpha - |lam| - (d/p - d/q)_+``; approximation rates need it positive."""
    return alpha - lam_order - _positive_part(d * _recip(p) - d * _recip(q))


def recovery_condition(alpha: float, mm: int, d: int, p: float, q: float) -> float:
    """``alpha - mm - (d/p - d/q)_+``; recovery rates need it positive."""
    return alpha - mm - _positive_part(d * _recip(p) - d * _recip(q))


def check_rate_condition(command: str, cfg: ExperimentConfig, alpha: float) -> None:
    """Reject parameter sets outside the range where the rate statements hold."""
    if command in ("rates-approx", "stechkin"):
        lam = sum(cfg.lam) if command == "stechkin" else 0
        gap = approximation_condition(alpha, lam, cfg.d, cfg.p, cfg.q)
        if gap <= 0:
            raise ConfigError(
                "smoothness.alpha",
                f"approximation-rate condition alpha - |lambda| - (d/p - d/q)_+ > 0 is violated "
                f"(value {gap:.6g})",
            )
    if command == "stechkin":
        tau = sum(cfg.lam) + _positive_part(cfg.d * _recip(cfg.s) - cfg.d * _recip(cfg.q))
        if tau <= 0:
            raise ConfigError("orders.lambda", "|lambda| + (d/s - d/q)_+ must be positive")
    if command == "rates-recovery":
        gap = recovery_condition(alpha, cfg.mm, cfg.d, cfg.p, cfg.q)
        if gap <= 0:
            raise ConfigError(
                "smoothness.alpha",
                f"recovery-rate condition alpha - mm - (d/p - d/q)_+ > 0 is violated (value {gap:.6g})",
            )


def _domain(spec: Any) -> tuple[Domain, dict]:
    if not isinstance(spec, dict):
        raise ConfigError("domain", "expected an object such as {\"domain\": \"unit-cube\", \"dim\": 2}")
    name = spec.get("domain")
    if not isinstance(name, str) or not is_catalog_name(name):
        raise ConfigError("domain.domain", f"unknown domain {name!r}")
    if name == "unit-cube":
        _int(spec.get("dim", 2), "domain.dim", 1)
    if name == "ball":
        if _num(spec.get("radius", 0.5), "domain.radius") <= 0:
            raise ConfigError("domain.radius", "must be positive")
    if name == "scaled-translate":
        if "base" not in spec:
            raise ConfigError("domain.base", "missing base domain")
        if _num(spec.get("delta", None), "domain.delta") <= 0:
            raise ConfigError("domain.delta", "must be positive")
    try:
        return make_domain(spec), spec
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("domain", str(exc)) from exc


def _quadrature(spec: Any) -> QuadratureSpec:
    if spec is None:
        return QuadratureSpec()
    if not isinstance(spec, dict):
        raise ConfigError("quadrature", "expected an object")
    known = set(QuadratureSpec.__dataclass_fields__)
    for key in spec:
        if key not in known:
            raise ConfigError(f"quadrature.{key}", "unknown field")
    vals = {}
    for key, value in spec.items():
        if key == "xi_rule":
            vals[key] = value
        else:
            vals[key] = _int(value, f"quadrature.{key}", 0)
    try:
        return QuadratureSpec(**vals)
    except ValueError as exc:
        raise ConfigError("quadrature", str(exc)) from exc


def _functions(spec: Any, d: int) -> dict | list:
    if spec is None:
        return {"family": "cusp", "beta": 0.75, "count": 6}
    if isinstance(spec, dict):
        fam = spec.get("family")
        if fam not in ("cusp", "step", "mixed"):
            raise ConfigError("functions.family", f"unknown family {fam!r}")
        beta = _num(spec.get("beta", 0.75), "functions.beta")
        if beta <= 0:
            raise ConfigError("functions.beta", "must be positive")
        count = _int(spec.get("count", 6), "functions.count", 1)
        return {"family": fam, "beta": beta, "count": count}
    if isinstance(spec, list):
        if not spec:
            raise ConfigError("functions", "list must not be empty")
        for i, item in enumerate(spec):
            if not isinstance(item, dict) or item.get("kind") not in ("cusp", "step", "tensor-trig", "polynomial"):
                raise ConfigError(f"functions[{i}].kind", "expected cusp, step, tensor-trig or polynomial")
            if item["kind"] in ("cusp", "step"):
                _num(item.get("beta"), f"functions[{i}].beta")
        return spec
    raise ConfigError("functions", "expected a family object or a list of functions")


def parse_config(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    version = raw.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("version", f"unsupported schema version {version!r}")
    known = {
        "version", "domain", "smoothness", "orders", "levels", "functions", "quadrature",
        "tolerance", "seed", "kappa_max", "K0", "probe_pairs", "trials", "outputs",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")
    domain, dspec = _domain(raw.get("domain", {"domain": "unit-cube", "dim": 1}))
    d = domain.d

    sm = raw.get("smoothness", {})
    if not isinstance(sm, dict):
        raise ConfigError("smoothness", "expected an object")
    alpha_raw = sm.get("alpha", "measure")
    alpha = None if alpha_raw == "measure" else _num(alpha_raw, "smoothness.alpha")
    if alpha is not None and alpha <= 0:
        raise ConfigError("smoothness.alpha", "must be positive")
    p = _num(sm.get("p", 2), "smoothness.p", allow_inf=True)
    if not 1 < p < math.inf:
        raise ConfigError("smoothness.p", "must satisfy 1 < p < inf")
    q = _num(sm.get("q", p), "smoothness.q", allow_inf=True)
    if q < 1:
        raise ConfigError("smoothness.q", "must be >= 1")
    s = _num(sm.get("s", p), "smoothness.s", allow_inf=True)
    if s < 1:
        raise ConfigError("smoothness.s", "must be >= 1")
    theta = _num(sm.get("theta", "inf"), "smoothness.theta", allow_inf=True)
    if theta < 1:
        raise ConfigError("smoothness.theta", "must be >= 1")

    orders = raw.get("orders", {})
    if not isinstance(orders, dict):
        raise ConfigError("orders", "expected an object")
    l = _int(orders.get("l", 2), "orders.l", 1)
    m = _int(orders.get("m", l), "orders.m", 0)
    if m < l:
        raise ConfigError("orders.m", f"spline order must satisfy m >= l (got m={m}, l={l})")
    mm = _int(orders.get("mm", 0), "orders.mm", 0)
    if mm > m:
        raise ConfigError("orders.mm", "derivative order must not exceed m")
    lam_raw = orders.get("lambda", [0] * d)
    if not isinstance(lam_raw, list) or len(lam_raw) != d:
        raise ConfigError("orders.lambda", f"expected a list of {d} nonnegative integers")
    lam = tuple(_int(v, f"orders.lambda[{i}]", 0) for i, v in enumerate(lam_raw))
    if max(lam) > m:
        raise ConfigError("orders.lambda", "derivative order exceeds the spline order m")

    levels = raw.get("levels", [3, 6])
    if not isinstance(levels, list) or len(levels) != 2:
        raise ConfigError("levels", "expected [first, last]")
    k0 = _int(levels[0], "levels[0]", 0)
    k1 = _int(levels[1], "levels[1]", 0)
    if k1 < k0:
        raise ConfigError("levels", "last level must not precede the first")

    tol = _num(raw.get("tolerance", 0.25), "tolerance")
    if tol <= 0:
        raise ConfigError("tolerance", "must be positive")
    seed = _int(raw.get("seed", 0), "seed", 0) if seed_override is None else seed_override
    if seed < 0 or seed >= 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    K0 = raw.get("K0")
    if K0 is not None:
        K0 = _int(K0, "K0", 0)
    outputs = raw.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("outputs", "expected an object")
    quad = _quadrature(raw.get("quadrature"))
    quad = QuadratureSpec(**{**quad.as_dict(), "seed": seed % 2**32})
    return ExperimentConfig(
        domain=domain,
        domain_spec=dspec,
        alpha=alpha,
        p=p,
        q=q,
        s=s,
        theta=theta,
        l=l,
        m=m,
        mm=mm,
        lam=lam,
        levels=(k0, k1),
        functions=_functions(raw.get("functions"), d),
        quadrature=quad,
        tolerance=tol,
        seed=seed,
        kappa_max=_int(raw.get("kappa_max", 3), "kappa_max", 0),
        K0=K0,
        probe_pairs=_int(raw.get("probe_pairs", 20), "probe_pairs", 1),
        trials=_int(raw.get("trials", 24), "trials", 1),
        dump_field=bool(outputs.get("field_dump", False)),
        raw=raw,
    )


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw, seed_override)


__all__ = [
    "SCHEMA_VERSION",
    "COMMANDS",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "approximation_condition",
    "recovery_condition",
    "check_rate_condition",
]
