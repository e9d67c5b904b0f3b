"""Steady-state golden rules with and without enforcement costs.

Along a steady state the catch equals natural growth, q = F(x), and the
current-value necessary conditions reduce to one equation in the stock:

    delta - F'(x) = -(c_x + E_x) / (p - c_q - E_q)

With E identically zero this is the Clark-Munro modified golden rule. We
solve G(x) = delta - F'(x) + (c_x + E_x) / (p - c_q - E_q) = 0 by scanning
for sign changes and bisecting each bracket.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fleet as fleet_mod
from . import model
from .errors import (
    NegativeDenominatorError,
    NoRootError,
    NonDifferentiableError,
    UnattainableError,
)
from .model import Scenario, StockParams

SCAN_POINTS = 200
SCAN_LO = 0.02
SCAN_HI = 0.999
X_TOL = 1e-10
KINK_RETRIES = 5
KINK_SHIFT = 1e-7


@dataclass(frozen=True)
class SteadyState:
    stock: float
    catch: float
    price: float
    shadow_price: float
    welfare_flow: float
    residual: float
    detection: float = 0.0
    enforcement_cost: float = 0.0
    include_enforcement: bool = True
    roots: tuple[float, ...] = ()

    @property
    def multiple_roots(self) -> bool:
        return len(self.roots) > 1


@dataclass(frozen=True)
class PolicyComparison:
    enforced: SteadyState
    costless: SteadyState
    msy_stock: float
    msy_catch: float
    stock_gap: float
    both_below_msy: bool
    catch_ordering: str
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def enforced_stock_smaller(self) -> bool:
        return self.stock_gap > 0

    @property
    def enforced_catch_lower(self) -> bool:
        return self.enforced.catch < self.costless.catch


def msy(sp: StockParams) -> tuple[float, float]:
    return sp.carrying_capacity / 2.0, sp.growth_rate * sp.carrying_capacity / 4.0


def _harvest_terms(scn: Scenario, q, x):
    coefficient = scn.fleet.harvest_cost_coefficient
    return model.harvest_cost(coefficient, q, x), model.harvest_cost_partials(coefficient, q, x)


def _enforcement_terms(scn: Scenario, q, x):
    """(theta, E, E_q, E_x) at a steady-state point."""
    args = (scn.fleet, scn.market, scn.penalty)
    theta = fleet_mod.invert_detection(*args, q, x, 0.0)
    e = model.enforcement_effort_cost(scn.enforcement, theta)
    e_q, e_x = fleet_mod.enforcement_cost_partials(
        scn.fleet, scn.enforcement, scn.market, scn.penalty, q, x
    )
    return theta, e, e_q, e_x


def steady_welfare(scn: Scenario, x, include_enforcement=True) -> float:
    """Net benefit flow at the steady state with stock ``x``; fees are transfers and excluded."""
    K = scn.stock.carrying_capacity
    if not 0 < x <= K:
        raise model.DomainError(f"stock must lie in (0, K], got {x!r}")
    q = model.growth(scn.stock, x)
    cost, _ = _harvest_terms(scn, q, x)
    value = model.gross_benefit(scn.market, q) - cost
    if include_enforcement and q > 0:
        value -= fleet_mod.enforcement_cost(
            scn.fleet, scn.enforcement, scn.market, scn.penalty, q, x, tol=0.0
        )
    return value


@dataclass(frozen=True)
class _Point:
    x: float
    value: float
    denominator: float


def _evaluate(scn: Scenario, x, include_enforcement):
    """Golden-rule residual at x, or None where the steady catch is unattainable."""
    K = scn.stock.carrying_capacity
    for attempt in range(KINK_RETRIES + 1):
        xx = x + attempt * KINK_SHIFT * K
        q = model.growth(scn.stock, xx)
        if q <= 0:
            return None
        _, (c_q, c_x) = _harvest_terms(scn, q, xx)
        e_q = e_x = 0.0
        if include_enforcement:
            try:
                _, _, e_q, e_x = _enforcement_terms(scn, q, xx)
            except UnattainableError:
                return None
            except NonDifferentiableError:
                continue
        price = model.inverse_demand(scn.market, q)
        denominator = price - c_q - e_q
        value = scn.discount_rate - model.growth_derivative(scn.stock, xx)
        if denominator != 0:
            value += (c_x + e_x) / denominator
        else:
            value = math.copysign(math.inf, -(c_x + e_x)) if (c_x + e_x) else 0.0
        return _Point(xx, value, denominator)
    return None


def _bisect(scn, lo: _Point, hi: _Point, include_enforcement):
    a, b = lo, hi
    while b.x - a.x > X_TOL:
        mid_x = 0.5 * (a.x + b.x)
        m = _evaluate(scn, mid_x, include_enforcement)
        if m is None:
            raise NonDifferentiableError(f"golden-rule residual undefined inside bracket at x={mid_x!r}")
        if m.value == 0:
            return m
        if (m.value < 0) == (a.value < 0):
            a = m
        else:
            b = m
    return a if abs(a.value) <= abs(b.value) else b


def _pole_bracket(scn, a: _Point, b: _Point, include_enforcement):
    """Bracket between a zero of p - c_q - E_q and the neighbouring sample on its positive side.

    Near the pole the residual diverges, so a root can hide between the pole
    and a scan point without any sign change across the scan cell.
    """
    outer = a if a.denominator > 0 else b
    lo, hi = a, b
    while hi.x - lo.x > X_TOL:
        m = _evaluate(scn, 0.5 * (lo.x + hi.x), include_enforcement)
        if m is None:
            return None
        if (m.denominator > 0) == (lo.denominator > 0):
            lo = m
        else:
            hi = m
    inner = lo if lo.denominator > 0 else hi
    if inner.value != 0 and (inner.value < 0) != (outer.value < 0):
        return (inner, outer) if inner.x < outer.x else (outer, inner)
    return None


def _solve(scn: Scenario, include_enforcement: bool) -> SteadyState:
    K = scn.stock.carrying_capacity
    grid = np.linspace(SCAN_LO * K, SCAN_HI * K, SCAN_POINTS)
    samples = [(float(x), _evaluate(scn, float(x), include_enforcement)) for x in grid]
    brackets = []
    poles = 0
    prev = None
    for _, pt in samples:
        if pt is None:
            prev = None
            continue
        if pt.value == 0 and pt.denominator > 0:
            brackets.append((pt, pt))
        elif prev is not None and prev.value != 0:
            if prev.denominator > 0 and pt.denominator > 0:
                if (prev.value < 0) != (pt.value < 0):
                    brackets.append((prev, pt))
            elif (prev.denominator > 0) != (pt.denominator > 0):
                bracket = _pole_bracket(scn, prev, pt, include_enforcement)
                if bracket is not None:
                    brackets.append(bracket)
                elif (prev.value < 0) != (pt.value < 0):
                    poles += 1
        prev = pt

    summary = [(x, None if pt is None else pt.value) for x, pt in samples]
    if not brackets:
        if poles:
            raise NegativeDenominatorError(
                "golden-rule residual changes sign only where p - c_q - E_q <= 0 "
                "(no interior optimum)"
            )
        raise NoRootError("golden-rule residual has no sign change on the scanned interval", summary)

    roots = [a if a is b else _bisect(scn, a, b, include_enforcement) for a, b in brackets]
    states = [_steady_state(scn, r, include_enforcement) for r in roots]
    if len(states) > 1:
        warnings.warn(
            f"golden rule has {len(states)} roots at stocks "
            + ", ".join(f"{s.stock:.6g}" for s in states)
            + "; returning the one with the highest welfare",
            RuntimeWarning,
            stacklevel=3,
        )
    best = max(states, key=lambda s: s.welfare_flow)
    return SteadyState(**{**best.__dict__, "roots": tuple(s.stock for s in states)})


def _steady_state(scn: Scenario, pt: _Point, include_enforcement) -> SteadyState:
    x = pt.x
    if pt.denominator <= 0:
        raise NegativeDenominatorError(
            f"p - c_q - E_q = {pt.denominator!r} <= 0 at the golden-rule root x={x!r}"
        )
    q = model.growth(scn.stock, x)
    price = model.inverse_demand(scn.market, q)
    cost, (c_q, _) = _harvest_terms(scn, q, x)
    theta = e = e_q = 0.0
    if include_enforcement:
        theta, e, e_q, _ = _enforcement_terms(scn, q, x)
    welfare = model.gross_benefit(scn.market, q) - cost - e
    return SteadyState(
        stock=x,
        catch=q,
        price=price,
        shadow_price=price - c_q - e_q,
        welfare_flow=welfare,
        residual=abs(pt.value),
        detection=theta,
        enforcement_cost=e,
        include_enforcement=include_enforcement,
        roots=(x,),
    )


def golden_rule_enforced(scn: Scenario) -> SteadyState:
    return _solve(scn, True)


def golden_rule_costless(scn: Scenario) -> SteadyState:
    return _solve(scn, False)


def golden_rule_residual(scn: Scenario, x, include_enforcement=True):
    """Residual G(x) of the golden-rule equation (None where undefined)."""
    pt = _evaluate(scn, x, include_enforcement)
    return None if pt is None else pt.value


def compare_policies(scn: Scenario) -> PolicyComparison:
    enforced = golden_rule_enforced(scn)
    costless = golden_rule_costless(scn)
    x_msy, q_msy = msy(scn.stock)
    gap = costless.stock - enforced.stock
    notes = []
    if gap <= 0:
        notes.append("enforced stock is not below the costless stock")
    below = enforced.stock < x_msy and costless.stock < x_msy
    relation = "<" if enforced.catch < costless.catch else (">" if enforced.catch > costless.catch else "=")
    if below:
        ordering = f"both stocks below MSY: enforced catch {relation} costless catch"
        if relation != "<":
            notes.append("enforced catch is not lower although both stocks are below MSY")
    elif enforced.stock < x_msy <= costless.stock:
        ordering = f"stocks straddle MSY: enforced catch {relation} costless catch"
    else:
        ordering = f"both stocks at or above MSY: enforced catch {relation} costless catch"
    return PolicyComparison(
        enforced=enforced,
        costless=costless,
        msy_stock=x_msy,
        msy_catch=q_msy,
        stock_gap=gap,
        both_below_msy=below,
        catch_ordering=ordering,
        notes=tuple(notes),
    )
