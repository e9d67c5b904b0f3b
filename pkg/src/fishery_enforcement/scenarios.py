"""Built-in scenarios and the YAML scenario-file reader.

A scenario file mirrors :class:`~fishery_enforcement.model.Scenario`::

    defaults: baseline          # optional: start from a built-in scenario
    stock: {growth_rate: 1.0, carrying_capacity: 1.0}
    market: {mode: constant, price: 10.0}       # or mode: linear, choke_price, slope
    fleet:
      identical: {count: 10, cost_coefficient: 110.0, quota: 0.02}
      # or: firms: [{cost_coefficient: 100.0, quota: 0.02}, ...]
    penalty: {max_fine: 20.0, severity: 1.0}
    enforcement: {effort_price_scale: 0.5}
    discount_rate: 0.4

With ``defaults`` every section is optional and the keys given override the
named scenario's; without it every section is required. Unknown keys are
errors.
"""

from __future__ import annotations

import copy
import math

import yaml

from .errors import DomainError
from .fleet import Fleet
from .model import (
    EnforcementTech,
    FirmCostParams,
    MarketParams,
    PenaltySchedule,
    Scenario,
    StockParams,
)

PRESETS = {
    "baseline": {
        "stock": {"growth_rate": 1.0, "carrying_capacity": 1.0},
        "market": {"mode": "constant", "price": 10.0},
        "fleet": {"identical": {"count": 10, "cost_coefficient": 110.0, "quota": 0.02}},
        "penalty": {"max_fine": 20.0, "severity": 1.0},
        "enforcement": {"effort_price_scale": 0.5},
        "discount_rate": 0.4,
    },
    # same fleet capacity (sum of 1/c) spread over distinct cost coefficients
    "heterogeneous": {
        "stock": {"growth_rate": 1.0, "carrying_capacity": 1.0},
        "market": {"mode": "constant", "price": 10.0},
        "fleet": {
            "firms": [
                {"cost_coefficient": c, "quota": 0.02}
                for c in (80.0, 88.0, 95.0, 102.0, 108.0, 114.0, 120.0, 128.0, 137.0, 150.0)
            ]
        },
        "penalty": {"max_fine": 20.0, "severity": 1.0},
        "enforcement": {"effort_price_scale": 0.5},
        "discount_rate": 0.4,
    },
}

SECTION_KEYS = {
    "stock": {"growth_rate", "carrying_capacity"},
    "market": {"mode", "price", "choke_price", "slope"},
    "penalty": {"max_fine", "severity"},
    "enforcement": {"effort_price_scale"},
}
TOP_KEYS = {"defaults", "stock", "market", "fleet", "penalty", "enforcement", "discount_rate"}
MARKET_MODE_KEYS = {"constant": {"mode", "price"}, "linear": {"mode", "choke_price", "slope"}}


class ScenarioFileError(DomainError):
    """Invalid scenario document; ``path`` names the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _number(doc, key, path, positive=False, nonnegative=False):
    if key not in doc:
        raise ScenarioFileError(f"{path}.{key}" if path else key, "missing required key")
    value = doc[key]
    where = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioFileError(where, f"expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ScenarioFileError(where, f"must be > 0, got {value!r}")
    if nonnegative and not value >= 0:
        raise ScenarioFileError(where, f"must be >= 0, got {value!r}")
    return float(value)


def _mapping(doc, path):
    if not isinstance(doc, dict):
        raise ScenarioFileError(path, f"expected a mapping, got {type(doc).__name__}")
    return doc


def _unknown(doc, allowed, path):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ScenarioFileError(where, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _build_fleet(doc, path="fleet"):
    _mapping(doc, path)
    _unknown(doc, {"identical", "firms"}, path)
    if ("identical" in doc) == ("firms" in doc):
        raise ScenarioFileError(path, "give exactly one of 'identical' or 'firms'")
    if "identical" in doc:
        sub = _mapping(doc["identical"], f"{path}.identical")
        _unknown(sub, {"count", "cost_coefficient", "quota"}, f"{path}.identical")
        count = sub.get("count")
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ScenarioFileError(f"{path}.identical.count", f"must be an integer >= 1, got {count!r}")
        c = _number(sub, "cost_coefficient", f"{path}.identical", positive=True)
        quota = _number(sub, "quota", f"{path}.identical", nonnegative=True)
        return Fleet.identical(count, c, quota)
    firms = doc["firms"]
    if not isinstance(firms, list) or not firms:
        raise ScenarioFileError(f"{path}.firms", "expected a non-empty list")
    out = []
    for i, firm in enumerate(firms):
        where = f"{path}.firms[{i}]"
        _mapping(firm, where)
        _unknown(firm, {"cost_coefficient", "quota"}, where)
        c = _number(firm, "cost_coefficient", where, positive=True)
        quota = _number(firm, "quota", where, nonnegative=True)
        out.append((FirmCostParams(c), quota))
    return Fleet(tuple(out))


def _build_market(doc):
    _mapping(doc, "market")
    _unknown(doc, SECTION_KEYS["market"], "market")
    mode = doc.get("mode", "constant")
    if mode not in MARKET_MODE_KEYS:
        raise ScenarioFileError("market.mode", f"expected 'constant' or 'linear', got {mode!r}")
    for key in doc:
        if key not in MARKET_MODE_KEYS[mode]:
            raise ScenarioFileError(f"market.{key}", f"not valid in {mode} mode")
    if mode == "constant":
        return MarketParams.constant(_number(doc, "price", "market", positive=True))
    return MarketParams.linear(
        _number(doc, "choke_price", "market", positive=True),
        _number(doc, "slope", "market", positive=True),
    )


def scenario_from_dict(doc) -> Scenario:
    """Validate a scenario document and build the Scenario it describes."""
    doc = _mapping(doc, "")
    _unknown(doc, TOP_KEYS, "")
    if "defaults" in doc:
        name = doc["defaults"]
        if name not in PRESETS:
            raise ScenarioFileError("defaults", f"unknown preset {name!r} (known: {', '.join(PRESETS)})")
        merged = copy.deepcopy(PRESETS[name])
        for key, value in doc.items():
            if key == "defaults":
                continue
            if key in SECTION_KEYS and isinstance(value, dict):
                if key == "market" and "mode" in value and value["mode"] != merged[key].get("mode"):
                    merged[key] = dict(value)
                else:
                    _unknown(value, SECTION_KEYS[key], key)
                    merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        doc = merged
    for key in TOP_KEYS - {"defaults"}:
        if key not in doc:
            raise ScenarioFileError(key, "missing required section")

    stock = _mapping(doc["stock"], "stock")
    _unknown(stock, SECTION_KEYS["stock"], "stock")
    penalty = _mapping(doc["penalty"], "penalty")
    _unknown(penalty, SECTION_KEYS["penalty"], "penalty")
    enforcement = _mapping(doc["enforcement"], "enforcement")
    _unknown(enforcement, SECTION_KEYS["enforcement"], "enforcement")

    # the file drives infinite-horizon computations, so a zero rate is refused here
    delta = _number(doc, "discount_rate", "", positive=True)
    return Scenario(
        stock=StockParams(
            _number(stock, "growth_rate", "stock", positive=True),
            _number(stock, "carrying_capacity", "stock", positive=True),
        ),
        market=_build_market(doc["market"]),
        fleet=_build_fleet(doc["fleet"]),
        penalty=PenaltySchedule(
            _number(penalty, "max_fine", "penalty", nonnegative=True),
            _number(penalty, "severity", "penalty", positive=True),
        ),
        enforcement=EnforcementTech(_number(enforcement, "effort_price_scale", "enforcement", positive=True)),
        discount_rate=delta,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ScenarioFileError("", f"cannot read scenario file {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioFileError("", f"malformed YAML in {path}: {exc}") from exc
    if doc is None:
        raise ScenarioFileError("", f"scenario file {path} is empty")
    return scenario_from_dict(doc)


def preset(name="baseline") -> Scenario:
    return scenario_from_dict({"defaults": name})


def default_scenario() -> Scenario:
    return preset("baseline")
