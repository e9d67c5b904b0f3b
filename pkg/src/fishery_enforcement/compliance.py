"""Comparative experiments on the public authority's compliance levers.

Two levers have a counterpart in the model: the detection-and-conviction
probability and the size of the sanction. Each sweep evaluates the fleet at
a fixed stock across an increasing grid of one lever.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import fleet as fleet_mod
from . import model
from .errors import DomainError
from .model import PenaltySchedule, Scenario

SWEEP_COLUMNS = ("lever", "value", "violation", "catch", "enforcement_cost", "compliant_firms")

DETECTION = "theta"
SANCTION = "fmax"
LEVERS = (DETECTION, SANCTION)


def fmt(value) -> str:
    """Fixed 12-significant-digit rendering used for every numeric table cell."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


@dataclass(frozen=True)
class SweepResult:
    lever: str
    values: tuple[float, ...]
    violation: tuple[float, ...]
    catch: tuple[float, ...]
    enforcement_cost: tuple[float, ...]
    compliant_firms: tuple[int, ...]

    def __post_init__(self):
        n = len(self.values)
        cols = (self.violation, self.catch, self.enforcement_cost, self.compliant_firms)
        if any(len(c) != n for c in cols):
            raise ValueError("sweep columns must have equal length")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("lever values must be strictly increasing")

    def rows(self):
        for row in zip(self.values, self.violation, self.catch, self.enforcement_cost, self.compliant_firms):
            yield (self.lever,) + row

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in self.rows():
            writer.writerow([row[0]] + [fmt(v) for v in row[1:]])
        return buf.getvalue()


def _increasing(values, name):
    values = tuple(float(v) for v in values)
    if not values:
        raise DomainError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"{name} values must be strictly increasing")
    return values


def _sweep(lever, values, evaluations):
    viol, catch, cost, compliant = [], [], [], []
    for response, spend in evaluations:
        viol.append(response.violation)
        catch.append(response.catch)
        cost.append(spend)
        compliant.append(response.compliant_firms)
    return SweepResult(lever, values, tuple(viol), tuple(catch), tuple(cost), tuple(compliant))


def sweep_detection(scn: Scenario, thetas, x) -> SweepResult:
    values = _increasing(thetas, "theta")
    if values[0] < 0 or values[-1] >= 1:
        raise DomainError("theta values must lie in [0, 1)")
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    evals = (
        (
            fleet_mod.fleet_response(scn.fleet, scn.market, scn.penalty, th, x),
            model.enforcement_effort_cost(scn.enforcement, th),
        )
        for th in values
    )
    return _sweep(DETECTION, values, evals)


def sweep_sanction(scn: Scenario, fines, theta, x) -> SweepResult:
    values = _increasing(fines, "F_max")
    if values[0] < 0:
        raise DomainError("F_max values must be >= 0")
    if not 0 <= theta < 1:
        raise DomainError(f"detection probability must lie in [0, 1), got {theta!r}")
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    spend = model.enforcement_effort_cost(scn.enforcement, theta)
    evals = (
        (
            fleet_mod.fleet_response(
                scn.fleet, scn.market, PenaltySchedule(f, scn.penalty.severity), theta, x
            ),
            spend,
        )
        for f in values
    )
    return _sweep(SANCTION, values, evals)


@dataclass(frozen=True)
class TradeoffRow:
    theta: float
    max_fine: float
    marginal_penalty: float
    violation: float
    enforcement_cost: float


@dataclass(frozen=True)
class TradeoffReport:
    reference_theta: float
    reference_max_fine: float
    budget: float
    rows: tuple[TradeoffRow, ...]
    best: TradeoffRow | None
    notes: tuple[str, ...] = field(default_factory=tuple)


def expected_penalty_tradeoff(scn: Scenario, x, budget, thetas=None, reference_theta=0.5) -> TradeoffReport:
    """Probability versus magnitude at equal expected marginal penalty.

    Every pair (theta, F_max) keeps theta * F_max * a equal to the scenario's
    value at ``reference_theta``, i.e. the same expected marginal fee at the
    quota margin. Pairs whose effort cost exceeds ``budget`` are skipped. The
    best mix is the affordable pair with the least violation, cheaper first.
    """
    if not budget > 0:
        raise DomainError(f"budget must be > 0, got {budget!r}")
    if not x > 0:
        raise DomainError(f"stock must be > 0, got {x!r}")
    if thetas is None:
        thetas = np.linspace(0.05, 0.95, 19)
    thetas = _increasing(thetas, "theta")
    if thetas[0] <= 0 or thetas[-1] >= 1:
        raise DomainError("tradeoff theta values must lie in (0, 1)")
    a = scn.penalty.severity
    level = reference_theta * scn.penalty.max_fine * a
    rows, notes = [], []
    for th in thetas:
        spend = model.enforcement_effort_cost(scn.enforcement, th)
        if spend > budget:
            notes.append(f"theta={fmt(th)} skipped: effort cost {fmt(spend)} exceeds budget {fmt(budget)}")
            continue
        ps = replace(scn.penalty, max_fine=level / (th * a))
        response = fleet_mod.fleet_response(scn.fleet, scn.market, ps, th, x)
        rows.append(TradeoffRow(th, ps.max_fine, th * ps.max_fine * a, response.violation, spend))
    best = min(rows, key=lambda r: (r.violation, r.enforcement_cost)) if rows else None
    if best is None:
        notes.append("no pair fits the budget")
    return TradeoffReport(reference_theta, scn.penalty.max_fine, budget, tuple(rows), best, tuple(notes))
