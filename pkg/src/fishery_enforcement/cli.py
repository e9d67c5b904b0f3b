"""Command-line front end.

    fishenf firm     SCENARIO --theta T [--stock X] [--firm-index I]
    fishenf steady   SCENARIO [--costless | --compare]
    fishenf simulate SCENARIO [--x0 X] [--horizon H] [--dt DT] [--policy SPEC] [--out CSV] [--step-halving]
    fishenf sweep    SCENARIO --lever {theta,fmax} --grid START:STOP:COUNT [--stock X] [--theta T] [--out CSV]
    fishenf oracle   SCENARIO [--grid N] [--dt DT] [--controls M]

SCENARIO is a YAML file, or ``@name`` for a built-in scenario. Exit status:
0 success, 2 invalid input, 3 solver failure, 4 unattainable catch target.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import compliance, dynamics, firm, fleet, model, policy
from .compliance import LEVERS, fmt
from .errors import DomainError, SolverError, UnattainableError
from .scenarios import PRESETS, load_scenario, preset

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_UNATTAINABLE = 4


class UsageError(DomainError):
    pass


def _scenario(spec):
    if spec.startswith("@"):
        name = spec[1:]
        if name not in PRESETS:
            raise UsageError(f"unknown built-in scenario {name!r} (known: {', '.join(PRESETS)})")
        return preset(name)
    return load_scenario(spec)


def _emit(out, pairs):
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        text = value if isinstance(value, str) else fmt(value)
        out.write(f"{key.ljust(width)}  {text}\n")


def _steady_pairs(prefix, s: policy.SteadyState):
    pairs = [
        (f"{prefix}stock", s.stock),
        (f"{prefix}catch", s.catch),
        (f"{prefix}price", s.price),
        (f"{prefix}shadow_price", s.shadow_price),
        (f"{prefix}welfare_flow", s.welfare_flow),
        (f"{prefix}residual", s.residual),
    ]
    if s.include_enforcement:
        pairs += [(f"{prefix}detection", s.detection), (f"{prefix}enforcement_cost", s.enforcement_cost)]
    if s.multiple_roots:
        pairs.append((f"{prefix}roots", " ".join(fmt(r) for r in s.roots)))
    return pairs


def cmd_firm(args, out):
    scn = _scenario(args.scenario)
    K = scn.stock.carrying_capacity
    x = args.stock if args.stock is not None else 0.5 * K
    if not 0 <= args.firm_index < scn.fleet.size:
        raise UsageError(f"--firm-index must lie in [0, {scn.fleet.size - 1}], got {args.firm_index}")
    fc, quota = scn.fleet.firms[args.firm_index]
    price = fleet.fleet_response(scn.fleet, scn.market, scn.penalty, args.theta, x).price
    d = firm.best_response(price, fc, scn.penalty, args.theta, x, quota)
    _emit(
        out,
        [
            ("firm", str(args.firm_index)),
            ("theta", args.theta),
            ("stock", x),
            ("quota", quota),
            ("price", price),
            ("catch", d.catch),
            ("violation", d.violation),
            ("regime", d.regime),
            ("expected_profit", d.expected_profit),
            ("foc_residual", firm.foc_residual(price, fc, scn.penalty, args.theta, x, quota, d.catch)),
        ],
    )


def cmd_steady(args, out):
    scn = _scenario(args.scenario)
    if args.compare:
        cmp = policy.compare_policies(scn)
        pairs = _steady_pairs("enforced.", cmp.enforced) + _steady_pairs("costless.", cmp.costless)
        pairs += [
            ("msy_stock", cmp.msy_stock),
            ("msy_catch", cmp.msy_catch),
            ("stock_gap", cmp.stock_gap),
            ("stock_ordering", "enforced < costless" if cmp.stock_gap > 0 else "enforced >= costless"),
            ("catch_ordering", cmp.catch_ordering),
        ]
        pairs += [("note", n) for n in cmp.notes]
        _emit(out, pairs)
    elif args.costless:
        _emit(out, [("rule", "costless")] + _steady_pairs("", policy.golden_rule_costless(scn)))
    else:
        _emit(out, [("rule", "enforced")] + _steady_pairs("", policy.golden_rule_enforced(scn)))


def _parse_policy(spec, scn):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "theta":
            return dynamics.EnforcementPolicy.fixed_theta(float(rest))
        if kind == "catch":
            if rest == "steady":
                x = policy.golden_rule_enforced(scn).stock
                return dynamics.EnforcementPolicy.catch_target(model.growth(scn.stock, x))
            return dynamics.EnforcementPolicy.catch_target(float(rest))
        if kind == "feedback":
            table = []
            for item in rest.split(","):
                xs, _, qs = item.partition("=")
                table.append((float(xs), float(qs)))
            return dynamics.EnforcementPolicy.feedback(table)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(f"malformed --policy {spec!r}: {exc}") from exc
    raise UsageError(f"unknown policy kind {kind!r} (expected theta:T, catch:Q, catch:steady, feedback:X=Q,...)")


def cmd_simulate(args, out):
    scn = _scenario(args.scenario)
    if args.x0 == "steady":
        x0 = policy.golden_rule_enforced(scn).stock
    elif args.x0 is None:
        x0 = scn.stock.carrying_capacity
    else:
        try:
            x0 = float(args.x0)
        except ValueError as exc:
            raise UsageError(f"--x0 must be a number or 'steady', got {args.x0!r}") from exc
    horizon = args.horizon if args.horizon is not None else dynamics.default_horizon(scn)
    pol = _parse_policy(args.policy, scn)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = dynamics.integrate(scn, pol, x0, horizon, args.dt)
        summary = dynamics.discounted_welfare(scn, traj)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            traj.to_csv(fh)
        report = out
    else:
        traj.to_csv(out)
        report = sys.stderr
    pairs = [
        ("discounted_welfare", summary.value),
        ("tail_fraction", summary.tail_fraction),
        ("terminal_stock", float(traj.x[-1])),
    ]
    if args.step_halving:
        half = dynamics.integrate(scn, pol, x0, horizon, args.dt / 2)
        quarter = dynamics.integrate(scn, pol, x0, horizon, args.dt / 4)
        d1 = float(traj.x[-1] - half.x[-1])
        d2 = float(half.x[-1] - quarter.x[-1])
        pairs += [
            ("halving_change", abs(d1)),
            ("convergence_ratio", d1 / d2 if d2 != 0 else float("nan")),
        ]
    pairs += [("event", e) for e in traj.events]
    pairs += [("warning", str(w.message)) for w in caught]
    _emit(report, pairs)


def _grid(spec):
    parts = spec.split(":")
    try:
        if len(parts) != 3:
            raise ValueError("expected START:STOP:COUNT")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"malformed --grid {spec!r}: {exc}") from exc
    if count < 1:
        raise UsageError("--grid COUNT must be >= 1")
    return np.linspace(start, stop, count)


def cmd_sweep(args, out):
    if args.lever not in LEVERS:
        raise UsageError(f"invalid lever {args.lever!r}; valid levers: {', '.join(LEVERS)}")
    scn = _scenario(args.scenario)
    x = args.stock if args.stock is not None else 0.5 * scn.stock.carrying_capacity
    grid = _grid(args.grid)
    if args.lever == compliance.DETECTION:
        result = compliance.sweep_detection(scn, grid, x)
    else:
        result = compliance.sweep_sanction(scn, grid, args.theta, x)
    text = result.to_csv()
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_oracle(args, out):
    scn = _scenario(args.scenario)
    pairs = []
    for label, include, solve in (
        ("enforced", True, policy.golden_rule_enforced),
        ("costless", False, policy.golden_rule_costless),
    ):
        gr = solve(scn)
        dp = dynamics.dp_oracle(scn, args.grid, args.dt, include_enforcement=include, n_controls=args.controls)
        if dp.steady_stock is None:
            raise SolverError(f"{label} dynamic-programming policy has no stable stock")
        gap = abs(dp.steady_stock - gr.stock)
        pairs += [
            (f"{label}.golden_rule_stock", gr.stock),
            (f"{label}.dp_stock", dp.steady_stock),
            (f"{label}.gap_cells", gap / dp.cell),
            (f"{label}.within_one_cell", "yes" if gap <= dp.cell else "no"),
            (f"{label}.sweeps", str(dp.sweeps)),
        ]
    _emit(out, pairs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fishenf", description="Fisheries enforcement and compliance solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("firm", help="a single firm's optimal catch")
    p.add_argument("scenario")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--stock", type=float)
    p.add_argument("--firm-index", type=int, default=0)
    p.set_defaults(func=cmd_firm)

    p = sub.add_parser("steady", help="steady-state golden rules")
    p.add_argument("scenario")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--enforced", action="store_true", help="with enforcement costs (default)")
    g.add_argument("--costless", action="store_true", help="costless, perfect enforcement")
    g.add_argument("--compare", action="store_true", help="both rules and their ordering")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("simulate", help="integrate the stock under a policy")
    p.add_argument("scenario")
    p.add_argument("--x0", help="initial stock, or 'steady' for the enforced golden-rule stock")
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--policy", default="catch:steady", help="theta:T | catch:Q | catch:steady | feedback:X=Q,...")
    p.add_argument("--out")
    p.add_argument("--step-halving", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="compliance-lever sweep")
    p.add_argument("scenario")
    p.add_argument("--lever", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--stock", type=float)
    p.add_argument("--theta", type=float, default=0.5, help="detection probability for the fmax lever")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="dynamic-programming check of the golden rules")
    p.add_argument("scenario")
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--controls", type=int, default=1500)
    p.set_defaults(func=cmd_oracle)
    return parser


def _fail(code, status, exc):
    message = " ".join(str(exc).split())
    sys.stderr.write(f"error[{code}]: {message}\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, sys.stdout)
    except UnattainableError as exc:
        return _fail("unattainable", EXIT_UNATTAINABLE, exc)
    except DomainError as exc:
        return _fail("validation", EXIT_VALIDATION, exc)
    except SolverError as exc:
        return _fail("solver", EXIT_SOLVER, exc)
    except OSError as exc:
        return _fail("validation", EXIT_VALIDATION, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
