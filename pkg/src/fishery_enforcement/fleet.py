"""Fleet aggregation and the enforcement cost function E(q, x).

The fleet catch q(theta, x) is the sum of the firms' best responses. It is
weakly decreasing in the detection probability, so for a catch target we can
find the cheapest probability that delivers it by bisection, and price that
probability with the effort cost e(theta).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from . import model
from .errors import DomainError, NonDifferentiableError, SolverError, UnattainableError
from .firm import VIOLATING, FirmDecision, best_response
from .model import EnforcementTech, FirmCostParams, MarketParams, PenaltySchedule

# stand-in for "theta -> 1" when measuring the attainable infimum
THETA_CAP = 1.0 - 1e-12

PRICE_TOL = 1e-10
PRICE_MAX_ITER = 10_000


@dataclass(frozen=True)
class Fleet:
    firms: tuple[tuple[FirmCostParams, float], ...]

    def __post_init__(self):
        firms = tuple((fc, float(quota)) for fc, quota in self.firms)
        object.__setattr__(self, "firms", firms)
        if not firms:
            raise DomainError("fleet must contain at least one firm")
        for i, (fc, quota) in enumerate(firms):
            if not isinstance(fc, FirmCostParams):
                raise DomainError(f"firm {i}: expected FirmCostParams, got {type(fc).__name__}")
            if not quota >= 0:
                raise DomainError(f"firm {i}: quota must be >= 0, got {quota!r}")

    @classmethod
    def identical(cls, n: int, cost_coefficient: float, quota: float) -> Fleet:
        fc = FirmCostParams(cost_coefficient)
        return cls(tuple((fc, quota) for _ in range(n)))

    @classmethod
    def from_lists(cls, costs, quotas) -> Fleet:
        if len(costs) != len(quotas):
            raise DomainError("costs and quotas must have equal length")
        return cls(tuple((FirmCostParams(float(c)), float(q)) for c, q in zip(costs, quotas)))

    @property
    def size(self) -> int:
        return len(self.firms)

    @property
    def total_quota(self) -> float:
        return sum(quota for _, quota in self.firms)

    @property
    def harvest_cost_coefficient(self) -> float:
        """C with 1/C = sum(1/c_i): the least-cost aggregate cost coefficient."""
        return 1.0 / sum(1.0 / fc.cost_coefficient for fc, _ in self.firms)

    def scaled_quotas(self, factor: float) -> Fleet:
        return Fleet(tuple((fc, quota * factor) for fc, quota in self.firms))

    @functools.cached_property
    def _groups(self):
        # identical firms share one solve
        index = {}
        members = []
        for pos, firm in enumerate(self.firms):
            key = (firm[0].cost_coefficient, firm[1])
            if key not in index:
                index[key] = len(members)
                members.append((firm, []))
            members[index[key]][1].append(pos)
        return tuple((firm, tuple(pos)) for firm, pos in members)


@dataclass(frozen=True)
class FleetResponse:
    price: float
    decisions: tuple[FirmDecision, ...]

    @property
    def catch(self) -> float:
        return sum(d.catch for d in self.decisions)

    @property
    def violation(self) -> float:
        return sum(d.violation for d in self.decisions)

    @property
    def compliant_firms(self) -> int:
        return sum(1 for d in self.decisions if d.regime != VIOLATING)

    @property
    def regimes(self) -> tuple[str, ...]:
        return tuple(d.regime for d in self.decisions)


def _check(theta, x):
    if not 0 <= theta <= THETA_CAP:
        raise DomainError(f"detection probability must lie in [0, 1), got {theta!r}")
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")


def _respond_at_price(fleet: Fleet, price, ps, theta, x) -> tuple[FirmDecision, ...]:
    out = [None] * fleet.size
    for (fc, quota), positions in fleet._groups:
        d = best_response(price, fc, ps, theta, x, quota)
        for pos in positions:
            out[pos] = d
    return tuple(out)


def _clearing_price(fleet, mp: MarketParams, ps, theta, x):
    """Fixed point of price -> p(Q(price)) by damped iteration.

    The damping factor is re-estimated each step from the observed slope of
    the map, which keeps the iteration contractive for steep demand.
    """

    def image(price):
        decisions = _respond_at_price(fleet, price, ps, theta, x)
        return model.inverse_demand(mp, sum(d.catch for d in decisions)), decisions

    price = mp.choke_price
    img, decisions = image(price)
    res = img - price
    alpha = 0.5
    for _ in range(PRICE_MAX_ITER):
        if abs(res) <= PRICE_TOL:
            return price, decisions
        new_price = min(max(price + alpha * res, 0.0), mp.choke_price)
        if new_price == price:
            return price, decisions
        new_img, new_decisions = image(new_price)
        slope = (new_img - img) / (new_price - price)
        alpha = 1.0 / (1.0 - slope) if slope < 0 else 0.5
        alpha = min(max(alpha, 1e-3), 1.0)
        price, img, decisions = new_price, new_img, new_decisions
        res = img - price
    # img(price) - price is strictly decreasing, so bisection either finds
    # the clearing price or isolates a jump in the fleet response
    lo, hi = 0.0, mp.choke_price
    while hi - lo > PRICE_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        img, decisions = image(mid)
        if abs(img - mid) <= PRICE_TOL:
            return mid, decisions
        if img > mid:
            lo = mid
        else:
            hi = mid
    raise SolverError(
        f"market-clearing price did not converge after {PRICE_MAX_ITER} iterations "
        f"(theta={theta!r}, x={x!r}, last residual {res!r}); the fleet catch jumps "
        f"across the demand curve near price {0.5 * (lo + hi):.10g}, so no clearing price exists"
    )


def fleet_response(fleet: Fleet, mp: MarketParams, ps: PenaltySchedule, theta, x) -> FleetResponse:
    _check(theta, x)
    if mp.mode == model.CONSTANT:
        return FleetResponse(mp.price, _respond_at_price(fleet, mp.price, ps, theta, x))
    price, decisions = _clearing_price(fleet, mp, ps, theta, x)
    return FleetResponse(price, decisions)


def aggregate_catch(fleet, mp, ps, theta, x) -> float:
    return fleet_response(fleet, mp, ps, theta, x).catch


def aggregate_violation(fleet, mp, ps, theta, x) -> float:
    return fleet_response(fleet, mp, ps, theta, x).violation


def open_access_aggregate(fleet, mp, ps, x) -> float:
    return aggregate_catch(fleet, mp, ps, 0.0, x)


def attainable_infimum(fleet, mp, ps, x) -> float:
    """Fleet catch as detection approaches certainty; the bounded fee keeps it positive."""
    return aggregate_catch(fleet, mp, ps, THETA_CAP, x)


@functools.lru_cache(maxsize=200_000)
def _invert(fleet, mp, ps, q_target, x, tol):
    if fleet_response(fleet, mp, ps, 0.0, x).catch <= q_target:
        return 0.0
    floor = aggregate_catch(fleet, mp, ps, THETA_CAP, x)
    if floor > q_target:
        raise UnattainableError(q_target, floor, x)
    lo, hi = 0.0, THETA_CAP
    # invariant: catch(lo) > target >= catch(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if aggregate_catch(fleet, mp, ps, mid, x) <= q_target:
            hi = mid
        else:
            lo = mid
    return hi


def invert_detection(fleet, mp, ps, q_target, x, tol=1e-10) -> float:
    """Smallest detection probability whose fleet catch does not exceed ``q_target``.

    ``tol=0`` bisects until the bracket cannot shrink in floating point.
    Raises UnattainableError when the target lies below the catch that
    near-certain detection still leaves.
    """
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    if not q_target > 0:
        raise DomainError(f"catch target must be > 0, got {q_target!r}")
    return _invert(fleet, mp, ps, float(q_target), float(x), float(tol))


def enforcement_cost(fleet, et: EnforcementTech, mp, ps, q, x, tol=1e-10) -> float:
    theta = invert_detection(fleet, mp, ps, q, x, tol)
    return model.enforcement_effort_cost(et, theta)


def _signature(fleet, mp, ps, q, x):
    theta = invert_detection(fleet, mp, ps, q, x, 0.0)
    if theta == 0.0:
        return theta, None
    return theta, fleet_response(fleet, mp, ps, theta, x).regimes


def enforcement_cost_partials(fleet, et, mp, ps, q, x, rel_step=1e-5) -> tuple[float, float]:
    """Central-difference (E_q, E_x).

    Where no enforcement is needed (q at or above the open-access catch) E
    vanishes on the neighbourhood above and (0, 0) is returned. Otherwise the
    firms' regimes must agree at every stencil point.
    """
    theta0, regimes0 = _signature(fleet, mp, ps, q, x)
    if theta0 == 0.0:
        return 0.0, 0.0
    e = et.effort_price_scale
    out = []
    for axis in ("q", "x"):
        base = q if axis == "q" else x
        h = rel_step * abs(base)
        vals = []
        for point in (base - h, base + h):
            qq, xx = (point, x) if axis == "q" else (q, point)
            theta, regimes = _signature(fleet, mp, ps, qq, xx)
            if regimes != regimes0:
                raise NonDifferentiableError(
                    f"enforcement regime changes across the {axis} stencil at q={q!r}, x={x!r}"
                )
            vals.append(e * theta / (1.0 - theta))
        out.append((vals[1] - vals[0]) / (2 * h))
    return out[0], out[1]
