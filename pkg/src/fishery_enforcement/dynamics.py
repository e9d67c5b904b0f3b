"""Stock trajectories under enforcement policies, and a dynamic-programming oracle.

The oracle solves the discretised harvesting problem by value iteration on a
stock grid. Its stationary stock gives an independent check on the golden-rule
solutions in :mod:`fishery_enforcement.policy`, which work from first-order
conditions instead.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fleet as fleet_mod
from . import model
from .errors import DomainError, SolverError, UnattainableError
from .model import Scenario

FIXED_THETA = "fixed-theta"
CATCH_TARGET = "catch-target"
FEEDBACK = "feedback"

TRAJECTORY_COLUMNS = ("t", "x", "q", "theta", "welfare_flow")


@dataclass(frozen=True)
class EnforcementPolicy:
    mode: str
    theta: float | None = None
    catch: float | None = None
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.mode == FIXED_THETA:
            if self.theta is None or not 0 <= self.theta < 1:
                raise DomainError(f"fixed-theta policy needs theta in [0, 1), got {self.theta!r}")
        elif self.mode == CATCH_TARGET:
            if self.catch is None or not self.catch > 0:
                raise DomainError(f"catch-target policy needs a target > 0, got {self.catch!r}")
        elif self.mode == FEEDBACK:
            table = tuple(sorted((float(x), float(q)) for x, q in self.table))
            if not table:
                raise DomainError("feedback policy needs a non-empty table")
            if any(q <= 0 for _, q in table):
                raise DomainError("feedback targets must be strictly positive")
            if len({x for x, _ in table}) != len(table):
                raise DomainError("feedback table has duplicate stock entries")
            object.__setattr__(self, "table", table)
        else:
            raise DomainError(f"unknown policy mode {self.mode!r}")

    @classmethod
    def fixed_theta(cls, theta: float) -> EnforcementPolicy:
        return cls(FIXED_THETA, theta=theta)

    @classmethod
    def catch_target(cls, catch: float) -> EnforcementPolicy:
        return cls(CATCH_TARGET, catch=catch)

    @classmethod
    def feedback(cls, table) -> EnforcementPolicy:
        return cls(FEEDBACK, table=tuple(table))

    def target(self, x: float) -> float:
        if self.mode == CATCH_TARGET:
            return self.catch
        xs, qs = zip(*self.table)
        return float(np.interp(x, xs, qs))


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    q: np.ndarray
    theta: np.ndarray
    welfare_flow: np.ndarray
    policy: EnforcementPolicy
    events: list[str] = field(default_factory=list)

    def to_csv(self, stream=None) -> str:
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in zip(self.t, self.x, self.q, self.theta, self.welfare_flow):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue() if stream is None else ""


def _catch(scn: Scenario, pol: EnforcementPolicy, x: float) -> float:
    """Realised fleet catch at stock x; a target above open access is not binding."""
    if x <= 0:
        return 0.0
    args = (scn.fleet, scn.market, scn.penalty)
    if pol.mode == FIXED_THETA:
        return fleet_mod.aggregate_catch(*args, pol.theta, x)
    target = pol.target(x)
    floor = fleet_mod.attainable_infimum(*args, x)
    if target < floor:
        raise UnattainableError(target, floor, x)
    return min(target, fleet_mod.open_access_aggregate(*args, x))


def _record(scn: Scenario, pol: EnforcementPolicy, x: float):
    q = _catch(scn, pol, x)
    if x <= 0:
        return q, 0.0, 0.0
    if pol.mode == FIXED_THETA:
        theta = pol.theta
    else:
        theta = fleet_mod.invert_detection(scn.fleet, scn.market, scn.penalty, pol.target(x), x)
    flow = (
        model.gross_benefit(scn.market, q)
        - model.harvest_cost(scn.fleet.harvest_cost_coefficient, q, x)
        - model.enforcement_effort_cost(scn.enforcement, theta)
    )
    return q, theta, flow


def integrate(scn: Scenario, pol: EnforcementPolicy, x0, horizon, dt) -> Trajectory:
    """Classical RK4 on dx/dt = F(x) - q(x); the stock is clamped at zero."""
    K = scn.stock.carrying_capacity
    if not 0 < x0 <= K:
        raise DomainError(f"initial stock must lie in (0, K], got {x0!r}")
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt!r}")
    if not horizon >= dt:
        raise DomainError(f"horizon must be >= dt, got horizon={horizon!r}, dt={dt!r}")

    def rhs(x):
        x = max(x, 0.0)
        return model.growth(scn.stock, x) - _catch(scn, pol, x)

    n_full = int(math.floor(horizon / dt + 1e-9))
    steps = [dt] * n_full
    rest = horizon - n_full * dt
    if rest > 1e-12 * horizon:
        steps.append(rest)

    ts, xs = [0.0], [float(x0)]
    events = []
    x = float(x0)
    for i, h in enumerate(steps, start=1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        t = i * dt if i <= n_full else float(horizon)
        if not math.isfinite(x):
            raise SolverError(f"non-finite stock at t={t!r}")
        if x < 0:
            events.append(f"stock crossed zero at t={t!r}; clamped")
            x = 0.0
        ts.append(t)
        xs.append(x)

    recs = [_record(scn, pol, x) for x in xs]
    q, theta, flow = (np.array(col, dtype=float) for col in zip(*recs))
    return Trajectory(np.array(ts), np.array(xs), q, theta, flow, pol, events)


@dataclass(frozen=True)
class WelfareSummary:
    value: float
    tail: float
    tail_fraction: float


def _discount_integral(t, flow, delta):
    """Integral of the piecewise-linear flow against exp(-delta t), exact per interval."""
    h = np.diff(t)
    f0, f1 = flow[:-1], flow[1:]
    if delta == 0:
        return float(np.sum(h * (f0 + f1) / 2))
    dh = delta * h
    a = -np.expm1(-dh) / delta
    b = (-np.expm1(-dh) - dh * np.exp(-dh)) / delta**2
    return float(np.sum(np.exp(-delta * t[:-1]) * (f0 * a + (f1 - f0) * b / h)))


def discounted_welfare(scn: Scenario, traj: Trajectory) -> WelfareSummary:
    """Present value of the welfare flow, with a constant-flow tail beyond the horizon."""
    delta = scn.discount_rate
    if delta <= 0:
        raise DomainError("an infinite-horizon present value needs a positive discount rate")
    body = _discount_integral(traj.t, traj.welfare_flow, delta)
    T = traj.t[-1]
    tail = float(traj.welfare_flow[-1] * math.exp(-delta * T) / delta)
    total = body + tail
    frac = abs(tail) / abs(total) if total != 0 else 0.0
    if frac >= 0.01:
        warnings.warn(f"tail accounts for {frac:.3%} of discounted welfare; extend the horizon", RuntimeWarning)
    return WelfareSummary(total, tail, frac)


def default_horizon(scn: Scenario) -> float:
    delta = scn.discount_rate
    return max(200.0, 10.0 / delta) if delta > 0 else 200.0


@dataclass
class DPSolution:
    stock: np.ndarray
    value: np.ndarray
    policy: np.ndarray
    detection: np.ndarray
    growth: np.ndarray
    steady_stock: float | None
    stable_stocks: tuple[float, ...]
    sweeps: int
    residual: float
    include_enforcement: bool

    @property
    def cell(self) -> float:
        return float(self.stock[1] - self.stock[0])

    @property
    def drift(self) -> np.ndarray:
        return self.growth - self.policy


def _candidates(scn: Scenario, x: float, include_enforcement: bool, n_controls: int, theta_max: float):
    """Catch options at stock x and the enforcement spend each one needs."""
    args = (scn.fleet, scn.market, scn.penalty)
    if include_enforcement:
        thetas = np.linspace(0.0, theta_max, n_controls)
        qs = np.array([fleet_mod.aggregate_catch(*args, th, x) for th in thetas])
        spend = scn.enforcement.effort_price_scale * thetas / (1.0 - thetas)
        return qs, spend, thetas
    q_open = fleet_mod.open_access_aggregate(*args, x)
    qs = np.linspace(0.0, q_open, n_controls)
    return qs, np.zeros_like(qs), np.zeros_like(qs)


def dp_oracle(
    scn: Scenario,
    grid=400,
    dt=0.02,
    include_enforcement=True,
    n_controls=1500,
    theta_max=0.95,
    tol=1e-9,
    max_sweeps=100_000,
) -> DPSolution:
    """Value iteration for the discretised harvesting problem.

    V(x) = max_q { dt [B(q) - c(q,x) - E(q,x)] + exp(-delta dt) V(x + dt (F(x) - q)) }

    with V linearly interpolated between grid points. With enforcement, the
    catch options at each stock are the fleet responses to a grid of detection
    probabilities, each paid for at e(theta); without it, any catch up to open
    access is free to impose. Stocks below the grid floor take the floor's value.
    """
    K = scn.stock.carrying_capacity
    if isinstance(grid, int):
        if grid < 200:
            raise DomainError("the stock grid needs at least 200 points")
        xs = np.linspace(0.02 * K, K, grid)
    else:
        xs = np.asarray(grid, dtype=float)
        if xs.ndim != 1 or xs.size < 200 or np.any(np.diff(xs) <= 0):
            raise DomainError("the stock grid must be increasing with at least 200 points")
        if xs[0] < 0.02 * K * (1 - 1e-12):
            raise DomainError("the stock grid must start at or above 0.02 K")
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt!r}")
    delta = scn.discount_rate
    if delta <= 0:
        raise DomainError("the dynamic-programming oracle needs a positive discount rate")

    n = xs.size
    coefficient = scn.fleet.harvest_cost_coefficient
    growth = np.array([model.growth(scn.stock, x) for x in xs])
    Q = np.empty((n, n_controls))
    S = np.empty((n, n_controls))
    TH = np.empty((n, n_controls))
    for i, x in enumerate(xs):
        Q[i], S[i], TH[i] = _candidates(scn, float(x), include_enforcement, n_controls, theta_max)

    benefit = np.vectorize(lambda q: model.gross_benefit(scn.market, q))(Q)
    reward = dt * (benefit - 0.5 * coefficient * Q**2 / xs[:, None] - S)

    nxt = np.clip(xs[:, None] + dt * (growth[:, None] - Q), xs[0], xs[-1])
    idx = np.clip(np.searchsorted(xs, nxt, side="right") - 1, 0, n - 2)
    w = (nxt - xs[idx]) / (xs[idx + 1] - xs[idx])
    beta = math.exp(-delta * dt)

    V = reward.max(axis=1) / (1 - beta)
    diff = math.inf
    for sweep in range(1, max_sweeps + 1):
        cont = V[idx] * (1 - w) + V[idx + 1] * w
        V_new = (reward + beta * cont).max(axis=1)
        diff = float(np.max(np.abs(V_new - V)))
        V = V_new
        if diff <= tol:
            break
    else:
        raise SolverError(f"value iteration did not converge in {max_sweeps} sweeps (last change {diff:.3e})")

    cont = V[idx] * (1 - w) + V[idx + 1] * w
    best = np.argmax(reward + beta * cont, axis=1)
    rows = np.arange(n)
    pol = Q[rows, best]
    # several basins are possible (e.g. an open-access trap where quotas stop
    # enforcement from lowering catch); the induced steady state is the most valuable
    stable = _stable_points(xs, growth - pol, V)
    return DPSolution(
        stock=xs,
        value=V,
        policy=pol,
        detection=TH[rows, best],
        growth=growth,
        steady_stock=max(stable, key=lambda p: p[1])[0] if stable else None,
        stable_stocks=tuple(p[0] for p in stable),
        sweeps=sweep,
        residual=diff,
        include_enforcement=include_enforcement,
    )


def _stable_points(xs, drift, value):
    """Stocks where the policy drift turns from positive to non-positive.

    Returns (stock, value) pairs with the crossing linearly interpolated.
    """
    out = []
    for i in range(len(xs) - 1):
        if drift[i] > 0 and drift[i + 1] <= 0:
            d0, d1 = drift[i], drift[i + 1]
            s = d0 / (d0 - d1)
            out.append((float(xs[i] + (xs[i + 1] - xs[i]) * s), float(value[i] + (value[i + 1] - value[i]) * s)))
    return out
