"""A single firm's catch choice under imperfect detection.

The firm maximises  p q - c(q, x) - theta f(q - quota).  Beyond the quota the
fee is concave, so the objective need not be concave there and the first-order
condition can have two roots. We enumerate every candidate and keep the best.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from . import model
from .errors import DomainError, NonDifferentiableError, SolverError
from .model import FirmCostParams, MarketParams, PenaltySchedule

UNDER_QUOTA = "under-quota"
EXACTLY_COMPLIANT = "exactly-compliant"
VIOLATING = "violating"

REGIME_TOL = 1e-12


@dataclass(frozen=True)
class FirmDecision:
    catch: float
    violation: float
    expected_profit: float
    regime: str

    @property
    def complies(self) -> bool:
        return self.regime != VIOLATING


def firm_price(mp) -> float:
    """Price faced by a price-taking firm.

    ``mp`` may be a plain number (a market-clearing price computed elsewhere)
    or constant-price :class:`MarketParams`.
    """
    if isinstance(mp, MarketParams):
        if mp.mode != model.CONSTANT:
            raise DomainError(
                "a firm in a linear-demand market needs the clearing price; pass it as a number"
            )
        return mp.price
    price = float(mp)
    if not price >= 0:
        raise DomainError(f"price must be >= 0, got {mp!r}")
    return price


def _check(theta, x, quota, q=0.0):
    if not 0 <= theta < 1:
        raise DomainError(f"detection probability must lie in [0, 1), got {theta!r}")
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    if not quota >= 0:
        raise DomainError(f"quota must be >= 0, got {quota!r}")
    if not q >= 0:
        raise DomainError(f"catch must be >= 0, got {q!r}")


def regime_of(catch: float, quota: float) -> str:
    if abs(catch - quota) <= REGIME_TOL:
        return EXACTLY_COMPLIANT
    return UNDER_QUOTA if catch < quota else VIOLATING


def expected_profit(mp, fc: FirmCostParams, ps: PenaltySchedule, theta, x, quota, q) -> float:
    _check(theta, x, quota, q)
    p = firm_price(mp)
    return p * q - model.firm_cost(fc, q, x) - theta * model.penalty_fee(ps, q - quota)


def open_access_catch(mp, fc: FirmCostParams, x) -> float:
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    return firm_price(mp) * x / fc.cost_coefficient


def foc_residual(mp, fc, ps, theta, x, quota, q) -> float:
    """Marginal profit minus expected marginal fee at ``q``.

    Zero at an interior optimum; at the compliance corner it is the gap the
    fee's kink absorbs.
    """
    p = firm_price(mp)
    return p - fc.cost_coefficient * q / x - theta * model.penalty_marginal(ps, q - quota)


def _root(g, dg, lo, hi):
    try:
        v = brentq(g, lo, hi, xtol=1e-15, rtol=4 * 2.220446049250313e-16, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise SolverError(
            f"first-order condition root not found in [{lo!r}, {hi!r}] "
            f"(g(lo)={g(lo)!r}, g(hi)={g(hi)!r}): {exc}"
        ) from exc
    # Newton polish to the last ulp, kept inside the bracket
    for _ in range(3):
        d = dg(v)
        if d == 0:
            break
        nv = v - g(v) / d
        if not lo <= nv <= hi or nv == v:
            break
        v = nv
    return v


def _foc_roots(p, k, m, a, quota, q_open):
    """Violation sizes v > 0 where p - k(quota+v) = m exp(-a v).

    g(v) = p - k(quota+v) - m exp(-a v) is concave, so it has at most two
    roots in (0, q_open - quota] and its peak separates them.
    """
    v_end = q_open - quota

    def g(v):
        return p - k * (quota + v) - m * math.exp(-a * v)

    def dg(v):
        return -k + m * a * math.exp(-a * v)

    def far_root(lo):
        # g(v_end) = -m exp(-a v_end) exactly; rounding in p - k q_open can
        # hide that when m is tiny, and then the root is v_end to rounding
        return v_end if g(v_end) >= 0 else _root(g, dg, lo, v_end)

    g0 = g(0.0)
    if g0 > 0:
        return [far_root(0.0)]
    if m * a <= k:
        return [] if g0 < 0 else [0.0]
    v_peak = math.log(m * a / k) / a
    if v_peak >= v_end:
        return []
    g_peak = g(v_peak)
    if g_peak < 0:
        return []
    if g_peak == 0:
        return [v_peak]
    roots = [v_peak if g0 == 0 else _root(g, dg, 0.0, v_peak)]
    roots.append(far_root(v_peak))
    return roots


def best_response(mp, fc: FirmCostParams, ps: PenaltySchedule, theta, x, quota) -> FirmDecision:
    """Global maximiser of expected profit over catch >= 0.

    Ties between candidates go to the smaller catch.
    """
    _check(theta, x, quota)
    p = firm_price(mp)
    k = fc.cost_coefficient / x
    q_open = p / k

    def profit(q):
        # same expression as expected_profit, minus the argument checks
        return p * q - model.firm_cost(fc, q, x) - theta * model.penalty_fee(ps, q - quota)

    def decide(q, value=None):
        return FirmDecision(
            catch=q,
            violation=max(q - quota, 0.0),
            expected_profit=profit(q) if value is None else value,
            regime=regime_of(q, quota),
        )

    if q_open <= quota:
        return decide(q_open)
    m = theta * ps.max_fine * ps.severity
    if m == 0:
        return decide(q_open)

    candidates = [quota] + [quota + v for v in _foc_roots(p, k, m, ps.severity, quota, q_open)]
    best_q, best_v = None, -math.inf
    for q in sorted(candidates):
        v = profit(q)
        if best_q is None or v > best_v:
            best_q, best_v = q, v
    return decide(best_q, best_v)


def _step(value):
    return 1e-5 * abs(value) if value != 0 else 1e-5


def response_partials(mp, fc, ps, theta, x, quota) -> tuple[float, float, float]:
    """Finite-difference (dq/dtheta, dq/dx, dq/dquota) of the best-response catch.

    Central differences with relative step 1e-5, one-sided where the point sits
    on the boundary of the domain. Raises NonDifferentiableError if the decision
    regime differs anywhere on a stencil.
    """
    base = best_response(mp, fc, ps, theta, x, quota)
    args = {"theta": theta, "x": x, "quota": quota}
    lower = {"theta": 0.0, "x": 0.0, "quota": 0.0}
    out = []
    for name in ("theta", "x", "quota"):
        v = args[name]
        h = _step(v)
        lo = v - h
        hi = v + h
        if name == "theta" and hi >= 1:
            hi = v
        if lo < lower[name] or (name == "x" and lo <= 0):
            lo = v
        pts = []
        for point in (lo, hi):
            kw = dict(args)
            kw[name] = point
            pts.append(best_response(mp, fc, ps, kw["theta"], kw["x"], kw["quota"]))
        regimes = {base.regime, pts[0].regime, pts[1].regime}
        if len(regimes) > 1:
            raise NonDifferentiableError(
                f"decision regime changes across the {name} stencil at "
                f"theta={theta!r}, x={x!r}, quota={quota!r}: {sorted(regimes)}"
            )
        out.append((pts[1].catch - pts[0].catch) / (hi - lo))
    return tuple(out)
