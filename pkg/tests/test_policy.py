import math

import pytest

from fishery_enforcement import fleet, model, policy
from fishery_enforcement.errors import NoRootError
from fishery_enforcement.model import EnforcementTech, StockParams

from factories import make_scenario
from oracles import bisect_root, golden_section_max, identical_fleet_enforcement


@pytest.fixture(scope="module")
def comparison(scn):
    return policy.compare_policies(scn)


@pytest.mark.parametrize("r, K, expected", [(0.5, 1.0, (0.5, 0.125)), (1.0, 2.0, (1.0, 0.5))])
def test_msy_examples(r, K, expected):
    sp = StockParams(r, K)
    assert policy.msy(sp) == pytest.approx(expected)
    x, q = policy.msy(sp)
    for eps in (1e-3, 1e-1):
        assert model.growth(sp, x - eps) < q
        assert model.growth(sp, x + eps) < q


def test_steady_welfare_at_carrying_capacity(scn):
    assert policy.steady_welfare(scn, 1.0, include_enforcement=False) == 0.0
    assert policy.steady_welfare(scn, 1.0) == 0.0


def test_steady_welfare_near_open_access_stock(scn):
    # open-access steady stock: F(x) = N p x / c, i.e. x = 1 - 100/110 = 1/11
    x = 0.09
    assert policy.steady_welfare(scn, x) == policy.steady_welfare(scn, x, include_enforcement=False)


def test_steady_welfare_composition(scn):
    x = 0.6
    q = x * (1 - x)
    C = 11.0
    e, _, _ = identical_fleet_enforcement(10, 110, 10, 0.02, 20, 1, 0.5, q, x)
    expected = 10 * q - 0.5 * C * q * q / x - e
    assert policy.steady_welfare(scn, x) == pytest.approx(expected, rel=1e-9)
    assert policy.steady_welfare(scn, x, include_enforcement=False) == pytest.approx(expected + e, rel=1e-12)


def _check_steady(s: policy.SteadyState, scn):
    assert s.catch == pytest.approx(model.growth(scn.stock, s.stock), abs=1e-10)
    assert s.residual <= 1e-8
    assert s.shadow_price > 0
    assert s.multiple_roots is False


def test_default_ordering(comparison, scn):
    enf, cl = comparison.enforced, comparison.costless
    _check_steady(enf, scn)
    _check_steady(cl, scn)
    assert 0 < enf.stock < cl.stock
    assert comparison.stock_gap > 1e-6
    assert comparison.both_below_msy
    assert enf.catch < cl.catch
    assert comparison.enforced_catch_lower
    assert comparison.notes == ()


def test_costless_rule_against_bisection_oracle(comparison):
    # G(x) = delta - r(1 - 2x) + c_x/(p - c_q) with q = x(1 - x), C = 11
    def g(x):
        q = x * (1 - x)
        c_q = 11 * q / x
        c_x = -11 * q * q / (2 * x * x)
        return 0.4 - (1 - 2 * x) + c_x / (10 - c_q)

    assert comparison.costless.stock == pytest.approx(bisect_root(g, 0.3, 0.6), abs=1e-9)


def test_shadow_price_and_marginal_condition(comparison, scn):
    s = comparison.enforced
    x, q = s.stock, s.catch
    _, e_q, e_x = identical_fleet_enforcement(10, 110, 10, 0.02, 20, 1, 0.5, q, x)
    c_q = 11 * q / x
    c_x = -11 * q * q / (2 * x * x)
    lam = 10 - c_q - e_q
    assert s.shadow_price == pytest.approx(lam, rel=1e-6)
    # the stock's own return equals the discount rate
    assert 0.4 - (1 - 2 * x) == pytest.approx(-(c_x + e_x) / lam, abs=1e-6)
    assert s.detection == fleet.invert_detection(scn.fleet, scn.market, scn.penalty, q, x, 0.0)


def test_costless_marginal_condition(comparison):
    s = comparison.costless
    x, q = s.stock, s.catch
    lam = 10 - 11 * q / x
    assert s.shadow_price == pytest.approx(lam, rel=1e-12)
    assert 0.4 - (1 - 2 * x) == pytest.approx(11 * q * q / (2 * x * x) / lam, abs=1e-8)


def test_zero_discount_maximises_static_welfare():
    scn = make_scenario(delta=0.0)
    s = policy.golden_rule_costless(scn)

    def welfare(x):
        q = x * (1 - x)
        return 10 * q - 0.5 * 11 * q * q / x

    x_ref, _ = golden_section_max(welfare, 0.1, 0.99, tol=1e-12)
    assert s.stock == pytest.approx(x_ref, abs=1e-6)


def test_infinite_impatience_approaches_bionomic_stock():
    s = policy.golden_rule_costless(make_scenario(delta=1e4))
    # zero rent: p = C F(x)/x = 11 (1 - x)  =>  x = 1/11
    assert s.stock == pytest.approx(1 / 11, abs=1e-4)
    assert s.stock > 1 / 11


def test_costless_limit_of_enforced_rule(comparison):
    s = policy.golden_rule_enforced(make_scenario(w=1e-6))
    assert abs(s.stock - comparison.costless.stock) < 1e-3
    assert policy.compare_policies(make_scenario(w=1e-6)).stock_gap < 1e-3


def test_stock_nonincreasing_in_enforcement_price(scn):
    w0 = scn.enforcement.effort_price_scale
    stocks = []
    for factor in (0.25, 0.5, 1, 2, 4):
        s = policy.golden_rule_enforced(scn.replace(enforcement=EnforcementTech(w0 * factor)))
        assert s.residual <= 1e-8
        stocks.append(s.stock)
    assert all(b <= a for a, b in zip(stocks, stocks[1:]))


def test_expensive_enforcement_has_no_interior_root():
    # at w = 2 the residual stays positive on every attainable stock: a corner optimum
    with pytest.raises(NoRootError) as info:
        policy.golden_rule_enforced(make_scenario(w=2.0))
    sampled = [v for _, v in info.value.samples if v is not None]
    assert min(sampled) > 0


def test_residual_undefined_where_unattainable(scn):
    # between the bionomic stock and F(x) = 0.2 quotas cannot be enforced down to F(x)
    assert policy.golden_rule_residual(scn, 0.2) is None
    assert policy.golden_rule_residual(scn, 0.2, include_enforcement=False) is not None


def test_heterogeneous_ordering(hetero):
    cmp = policy.compare_policies(hetero)
    assert cmp.enforced.residual <= 1e-8 and cmp.costless.residual <= 1e-8
    assert cmp.stock_gap > 1e-6


def test_linear_demand_solves():
    from fishery_enforcement.model import MarketParams

    scn = make_scenario().replace(market=MarketParams.linear(14.0, 10.0))
    cmp = policy.compare_policies(scn)
    for s in (cmp.enforced, cmp.costless):
        assert s.price == pytest.approx(14.0 - 10.0 * s.catch)
        assert s.residual <= 1e-8
    assert math.isfinite(cmp.stock_gap)
