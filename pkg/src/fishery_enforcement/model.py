"""Parameter records and the concrete functional forms of the fishery model.

Every solver in the package reaches the biology, the cost structure, the fee
schedule, demand and the enforcement technology through the functions defined
here, so an alternative functional form only has to be swapped in this module.

Forms used:

* growth           F(x)   = r x (1 - x/K)
* firm cost        c(q,x) = (c/2) q^2 / x
* penalty fee      f(v)   = F_max (1 - exp(-a v)) for v > 0, else 0
* inverse demand   p(q)   = p, or max(A - b q, 0)
* enforcement cost e(t)   = w t / (1 - t)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import DomainError

if TYPE_CHECKING:
    from .fleet import Fleet

CONSTANT = "constant"
LINEAR = "linear"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _finite(value) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


@dataclass(frozen=True)
class StockParams:
    growth_rate: float
    carrying_capacity: float

    def __post_init__(self):
        _require(_finite(self.growth_rate) and self.growth_rate > 0, "growth_rate must be > 0")
        _require(
            _finite(self.carrying_capacity) and self.carrying_capacity > 0,
            "carrying_capacity must be > 0",
        )


@dataclass(frozen=True)
class PenaltySchedule:
    max_fine: float
    severity: float

    def __post_init__(self):
        _require(_finite(self.max_fine) and self.max_fine >= 0, "max_fine must be >= 0")
        _require(_finite(self.severity) and self.severity > 0, "severity must be > 0")


@dataclass(frozen=True)
class FirmCostParams:
    cost_coefficient: float

    def __post_init__(self):
        _require(
            _finite(self.cost_coefficient) and self.cost_coefficient > 0,
            "cost_coefficient must be > 0",
        )


@dataclass(frozen=True)
class MarketParams:
    """Constant price (``mode="constant"``) or linear inverse demand A - b q."""

    mode: str = CONSTANT
    price: float | None = None
    choke_price: float | None = None
    slope: float | None = None

    def __post_init__(self):
        if self.mode == CONSTANT:
            _require(_finite(self.price) and self.price > 0, "price must be > 0")
        elif self.mode == LINEAR:
            _require(_finite(self.choke_price) and self.choke_price > 0, "choke_price must be > 0")
            _require(_finite(self.slope) and self.slope > 0, "slope must be > 0")
        else:
            raise DomainError(f"unknown market mode {self.mode!r}; expected 'constant' or 'linear'")

    @classmethod
    def constant(cls, price: float) -> MarketParams:
        return cls(mode=CONSTANT, price=price)

    @classmethod
    def linear(cls, choke_price: float, slope: float) -> MarketParams:
        return cls(mode=LINEAR, choke_price=choke_price, slope=slope)


@dataclass(frozen=True)
class EnforcementTech:
    effort_price_scale: float

    def __post_init__(self):
        _require(
            _finite(self.effort_price_scale) and self.effort_price_scale > 0,
            "effort_price_scale must be > 0",
        )


@dataclass(frozen=True)
class Scenario:
    stock: StockParams
    market: MarketParams
    fleet: Fleet
    penalty: PenaltySchedule
    enforcement: EnforcementTech
    discount_rate: float

    def __post_init__(self):
        _require(_finite(self.discount_rate) and self.discount_rate >= 0, "discount_rate must be >= 0")
        _require(len(self.fleet.firms) >= 1, "fleet must contain at least one firm")

    def replace(self, **changes) -> Scenario:
        from dataclasses import replace

        return replace(self, **changes)


# -- growth -----------------------------------------------------------------


def growth(sp: StockParams, x: float) -> float:
    _require(x >= 0, f"stock must be >= 0, got {x!r}")
    return sp.growth_rate * x * (1.0 - x / sp.carrying_capacity)


def growth_derivative(sp: StockParams, x: float) -> float:
    _require(x >= 0, f"stock must be >= 0, got {x!r}")
    return sp.growth_rate * (1.0 - 2.0 * x / sp.carrying_capacity)


# -- penalty ----------------------------------------------------------------


def penalty_fee(ps: PenaltySchedule, v: float) -> float:
    if v <= 0:
        return 0.0
    # -expm1 keeps full relative precision for tiny violations
    return -ps.max_fine * math.expm1(-ps.severity * v)


def penalty_marginal(ps: PenaltySchedule, v: float) -> float:
    if v <= 0:
        return 0.0
    return ps.max_fine * ps.severity * math.exp(-ps.severity * v)


# -- costs ------------------------------------------------------------------


def firm_cost(fc: FirmCostParams, q: float, x: float) -> float:
    _require(x > 0, f"stock must be > 0 for the cost function, got {x!r}")
    _require(q >= 0, f"catch must be >= 0, got {q!r}")
    return 0.5 * fc.cost_coefficient * q * q / x


def harvest_cost(coefficient: float, q: float, x: float) -> float:
    """Aggregate cost of catch ``q`` when it is split across the fleet at least cost.

    With firm costs (c_i/2) q_i^2 / x, the cheapest split equalises marginal
    cost and yields (C/2) q^2 / x with 1/C = sum(1/c_i).
    """
    _require(x > 0, f"stock must be > 0 for the cost function, got {x!r}")
    return 0.5 * coefficient * q * q / x


def harvest_cost_partials(coefficient: float, q: float, x: float) -> tuple[float, float]:
    """(dc/dq, dc/dx) of :func:`harvest_cost`."""
    _require(x > 0, f"stock must be > 0 for the cost function, got {x!r}")
    return coefficient * q / x, -0.5 * coefficient * q * q / (x * x)


# -- demand -----------------------------------------------------------------


def inverse_demand(mp: MarketParams, q: float) -> float:
    _require(q >= 0, f"catch must be >= 0, got {q!r}")
    if mp.mode == CONSTANT:
        return mp.price
    return max(mp.choke_price - mp.slope * q, 0.0)


def gross_benefit(mp: MarketParams, q: float) -> float:
    """Area under the inverse demand curve from 0 to ``q``."""
    _require(q >= 0, f"catch must be >= 0, got {q!r}")
    if mp.mode == CONSTANT:
        return mp.price * q
    choke_q = mp.choke_price / mp.slope
    qq = min(q, choke_q)
    return mp.choke_price * qq - 0.5 * mp.slope * qq * qq


# -- enforcement ------------------------------------------------------------


def enforcement_effort_cost(et: EnforcementTech, theta: float) -> float:
    _require(0 <= theta < 1, f"detection probability must lie in [0, 1), got {theta!r}")
    return et.effort_price_scale * theta / (1.0 - theta)


def enforcement_effort_marginal(et: EnforcementTech, theta: float) -> float:
    _require(0 <= theta < 1, f"detection probability must lie in [0, 1), got {theta!r}")
    return et.effort_price_scale / (1.0 - theta) ** 2
