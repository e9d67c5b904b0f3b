"""Fishing firms' compliance under costly, imperfect enforcement.

A Gordon-Schaefer fishery with individual quotas, a bounded penalty fee and a
detection probability bought at increasing cost. The package solves firm
behaviour, builds the enforcement cost function E(q, x) by inverting the fleet
catch, and compares the steady-state optimal policies with and without
enforcement costs.
"""

from .errors import (
    DomainError,
    NegativeDenominatorError,
    NoRootError,
    NonDifferentiableError,
    SolverError,
    UnattainableError,
)
from .firm import FirmDecision, best_response, expected_profit, open_access_catch, response_partials
from .fleet import (
    Fleet,
    aggregate_catch,
    aggregate_violation,
    enforcement_cost,
    enforcement_cost_partials,
    invert_detection,
)
from .model import (
    EnforcementTech,
    FirmCostParams,
    MarketParams,
    PenaltySchedule,
    Scenario,
    StockParams,
)
from .policy import compare_policies, golden_rule_costless, golden_rule_enforced, msy, steady_welfare
from .scenarios import default_scenario, load_scenario

__version__ = "0.1.0"
