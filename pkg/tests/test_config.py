import json
import math

import pytest

from quasispline.config import ConfigError, check_rate_condition, load_config, parse_config

BASE = {"domain": {"domain": "unit-cube", "dim": 1}}


def cfg(**extra):
    return parse_config({**BASE, **extra})


def error_path(raw):
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    return exc.value.path


def test_defaults():
    c = cfg()
    assert c.l == 2 and c.m == 2 and c.mm == 0 and c.lam == (0,)
    assert c.alpha is None and c.q == c.p == 2.0 and math.isinf(c.theta)
    assert c.level_range() == [3, 4, 5, 6]


@pytest.mark.parametrize(
    "raw,path",
    [
        ({**BASE, "smoothness": {"p": 1}}, "smoothness.p"),
        ({**BASE, "smoothness": {"p": "inf"}}, "smoothness.p"),
        ({**BASE, "smoothness": {"alpha": -1}}, "smoothness.alpha"),
        ({**BASE, "smoothness": {"q": 0.5}}, "smoothness.q"),
        ({**BASE, "orders": {"l": 3, "m": 2}}, "orders.m"),
        ({**BASE, "orders": {"l": 0}}, "orders.l"),
        ({**BASE, "orders": {"lambda": [0, 0]}}, "orders.lambda"),
        ({**BASE, "orders": {"lambda": [-1]}}, "orders.lambda[0]"),
        ({**BASE, "levels": [5, 2]}, "levels"),
        ({**BASE, "levels": [1.5, 2]}, "levels[0]"),
        ({**BASE, "quadrature": {"order": 0}}, "quadrature"),
        ({**BASE, "quadrature": {"bogus": 1}}, "quadrature.bogus"),
        ({**BASE, "functions": {"family": "spiky"}}, "functions.family"),
        ({**BASE, "functions": [{"kind": "cusp"}]}, "functions[0].beta"),
        ({**BASE, "seed": -1}, "seed"),
        ({**BASE, "colour": 1}, "colour"),
        ({"domain": {"domain": "torus"}}, "domain.domain"),
        ({"domain": {"domain": "ball", "radius": -1}}, "domain.radius"),
        ({**BASE, "version": 2}, "version"),
    ],
)
def test_validation_errors_name_the_field(raw, path):
    assert error_path(raw) == path


def test_recovery_condition_is_rejected_by_name():
    c = cfg(orders={"l": 2, "mm": 1}, smoothness={"alpha": 0.9, "p": 2, "q": 2})
    with pytest.raises(ConfigError, match="recovery-rate condition") as exc:
        check_rate_condition("rates-recovery", c, c.alpha)
    assert exc.value.path == "smoothness.alpha"


def test_approximation_condition_is_rejected_by_name():
    c = cfg(smoothness={"alpha": 0.4, "p": 2, "q": "inf"})
    with pytest.raises(ConfigError, match="approximation-rate condition"):
        check_rate_condition("rates-approx", c, c.alpha)
    check_rate_condition("rates-approx", c, 0.6)


def test_seed_override_and_echo_are_json_safe():
    c = parse_config({**BASE, "seed": 3, "smoothness": {"q": "inf"}}, seed_override=2**64 - 1)
    assert c.seed == 2**64 - 1
    assert c.quadrature.seed == (2**64 - 1) % 2**32
    json.dumps(c.echo(), allow_nan=False)


def test_load_config_reports_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError) as exc:
        load_config(bad)
    assert exc.value.path == "<file>"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_shipped_configs_are_valid():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(root.glob("*.json"))
    assert paths
    for path in paths:
        load_config(path)
