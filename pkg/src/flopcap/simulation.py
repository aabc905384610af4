"""Multi-year simulation engine, emissions accounting, and figure sweeps.

A compliance year runs in a fixed order: compute the benchmark, apply
assistance factors, allocate allowances, convert to FLOP budgets (banked
balances add headroom), solve each firm's best response at the year's
price, settle trades, bank surplus, assess penalties, report. Years are
strictly sequential because banking links them; everything else is pure.

The sweep functions generate the two figure datasets: usage versus
cost-per-FLOP under fixed and scaled trade prices (usage is always lower
under cap-and-trade), and utility versus FLOP budget / cost (utility gain
is affine in the budget and crosses zero at a unique breakeven).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections.abc import Mapping, Sequence

import numpy as np

from . import allocation, equilibrium, market
from .model import (
    Company,
    CompanyYearRow,
    PolicyConfig,
    ValidationError,
    YearReport,
    validate_company,
    validate_policy,
)

#: Allowance units (Watt-seconds under this package's convention) per kWh.
ENERGY_UNITS_PER_KWH = 3.6e6

#: 0.81 lb CO2 per kWh (US grid average), converted to kilograms.
EMISSIONS_KG_PER_KWH = 0.81 * 0.45359237


@dataclass(frozen=True)
class Scenario:
    """A validated simulation input: firms, policy, seed, per-year overrides.

    ``schedule`` maps year -> company id -> field overrides; only ``output``
    and ``efficiency`` may vary across years. Output is exogenous (no
    feedback from chosen usage) and assistance factors stay constant.
    """

    companies: tuple[Company, ...]
    policy: PolicyConfig
    seed: int = 0
    schedule: Mapping[int, Mapping[str, Mapping[str, float]]] = field(default_factory=dict)


def validate_scenario(scenario: Scenario) -> Scenario:
    if not scenario.companies:
        raise ValidationError("companies", "scenario needs at least one company")
    seen: set[str] = set()
    for c in scenario.companies:
        validate_company(c)
        if c.id in seen:
            raise ValidationError("id", f"duplicate company id: {c.id!r}")
        seen.add(c.id)
    validate_policy(scenario.policy)
    for year, overrides in scenario.schedule.items():
        if not (1 <= int(year) <= scenario.policy.horizon):
            raise ValidationError("schedule", f"schedule year {year} outside horizon")
        for cid, fields in overrides.items():
            if cid not in seen:
                raise ValidationError("schedule", f"schedule references unknown company {cid!r}")
            for name in fields:
                if name not in ("output", "efficiency"):
                    raise ValidationError(
                        "schedule", f"schedule may only override output/efficiency, got {name!r}"
                    )
    return scenario


def companies_for_year(scenario: Scenario, year: int) -> tuple[Company, ...]:
    """Companies with the year's schedule overrides applied and revalidated."""
    overrides = scenario.schedule.get(year, {})
    result = []
    for c in scenario.companies:
        fields = overrides.get(c.id)
        if fields:
            c = Company(
                id=c.id,
                output=fields.get("output", c.output),
                efficiency=fields.get("efficiency", c.efficiency),
                cost_per_flop=c.cost_per_flop,
                assistance=c.assistance,
                historical=c.historical,
                loss_exponent=c.loss_exponent,
            )
            validate_company(c)
        result.append(c)
    return tuple(result)


def compute_emissions(
    usage_flops: float,
    efficiency: float,
    energy_units_per_kwh: float = ENERGY_UNITS_PER_KWH,
    kg_per_kwh: float = EMISSIONS_KG_PER_KWH,
) -> tuple[float, float]:
    """Energy drawn (allowance units) and CO2 emitted (kg) for a usage level."""
    energy = usage_flops * efficiency
    return energy, (energy / energy_units_per_kwh) * kg_per_kwh


def _effective_price(policy: PolicyConfig, company: Company) -> float:
    if policy.price_mode == "scaled_sqrt_a":
        return math.sqrt(company.cost_per_flop)
    return policy.buy_sell_price


def run_year(scenario: Scenario, year: int, bank: market.BankLedger | None = None) -> YearReport:
    """Simulate one compliance year and report every firm's outcome.

    ``bank`` carries balances between years; omit it for a standalone year.
    """
    validate_scenario(scenario)
    if bank is None:
        bank = market.BankLedger()
    companies = companies_for_year(scenario, year)
    policy = scenario.policy

    if policy.mode == "no_governance":
        return _run_unconstrained_year(companies, year, tax=0.0)
    if policy.mode == "pigouvian":
        return _run_unconstrained_year(companies, year, tax=policy.tax)
    if policy.mode == "credit_program":
        return _run_credit_year(companies, policy, year)
    return _run_cap_and_trade_year(companies, policy, year, bank)


def _run_unconstrained_year(
    companies: Sequence[Company], year: int, tax: float
) -> YearReport:
    """No-governance / pigouvian bypass: closed-form optima, no market."""
    rows = []
    for c in companies:
        sol = equilibrium.solve_pigouvian(c.loss_exponent, c.cost_per_flop, tax)
        energy, co2 = compute_emissions(sol.x_star, c.efficiency)
        rows.append(
            CompanyYearRow(
                company=c.id,
                allocated=0.0,
                banked_in=0.0,
                flops_allowed=math.inf,
                x_star=sol.x_star,
                y_star=0.0,
                banked_out=0.0,
                penalty=0.0,
                utility=sol.utility,
                energy=energy,
                co2_kg=co2,
            )
        )
    return YearReport(
        year=year,
        rows=tuple(rows),
        total_flops=sum(r.x_star for r in rows),
        total_allowances=0.0,
        clearing_price=None,
    )


def _run_credit_year(
    companies: Sequence[Company], policy: PolicyConfig, year: int
) -> YearReport:
    """Credit program: symmetric credit value makes the best response the
    cap-and-trade usage form at the credit price, with no cap on totals."""
    c_price = policy.credit_price
    usages = {}
    for c in companies:
        usages[c.id] = (c.loss_exponent / (c.cost_per_flop + c_price)) ** (
            1.0 / (c.loss_exponent + 1.0)
        )
    settlement = market.credit_program_settle(usages, policy.baseline, c_price)
    rows = []
    for c in companies:
        x = usages[c.id]
        energy, co2 = compute_emissions(x, c.efficiency)
        utility = -(x ** (-c.loss_exponent)) - c.cost_per_flop * x + settlement.payments[c.id]
        rows.append(
            CompanyYearRow(
                company=c.id,
                allocated=0.0,
                banked_in=0.0,
                flops_allowed=math.inf,
                x_star=x,
                y_star=policy.baseline - x,
                banked_out=0.0,
                penalty=0.0,
                utility=utility,
                energy=energy,
                co2_kg=co2,
            )
        )
    return YearReport(
        year=year,
        rows=tuple(rows),
        total_flops=sum(r.x_star for r in rows),
        total_allowances=0.0,
        clearing_price=policy.credit_price,
    )


def _run_cap_and_trade_year(
    companies: Sequence[Company],
    policy: PolicyConfig,
    year: int,
    bank: market.BankLedger,
) -> YearReport:
    benchmark = allocation.compute_benchmark(
        companies, policy.benchmark_rule, fixed_value=policy.benchmark
    )
    allocations = {
        c.id: allocation.allocate(c, policy.allocation_rule, policy.gamma, benchmark)
        for c in companies
    }
    banked_in = {c.id: bank.balance(c.id) for c in companies}
    flops_total = {
        c.id: allocations[c.id].flops_allowed
        + allocation.allowed_flops(banked_in[c.id], c.efficiency)
        for c in companies
    }

    if policy.price_mode == "endogenous_clearing":
        agents = [(c.loss_exponent, c.cost_per_flop, flops_total[c.id]) for c in companies]
        price = market.clear_price(
            agents, bracket=policy.clearing_bracket, tol=policy.clearing_tol
        )
        prices = {c.id: price for c in companies}
    else:
        prices = {c.id: _effective_price(policy, c) for c in companies}

    solutions = {}
    for c in companies:
        b = prices[c.id]
        if policy.penalty_rate <= b:
            raise ValidationError(
                "penalty_rate", "penalty must exceed price (effective market price)"
            )
        solutions[c.id] = equilibrium.solve_cap_and_trade(
            c.loss_exponent, c.cost_per_flop, b, flops_total[c.id]
        )

    positions = {cid: sol.y_star for cid, sol in solutions.items()}
    efficiencies = {c.id: c.efficiency for c in companies}
    if policy.price_mode == "scaled_sqrt_a":
        # Per-firm prices cannot share one internal match; everything settles
        # against the external counterparty.
        outcome = market.MarketOutcome(
            clearing_price=math.nan,
            fills=dict(positions),
            ledger=market.TradeLedger(),
            unmatched_net=sum(positions.values()),
        )
    else:
        outcome = market.execute_trades(
            year, positions, efficiencies, next(iter(prices.values()))
        )

    rows = []
    for c in companies:
        sol = solutions[c.id]
        # Year-close position excluding the bank; bank_surplus settles the rest.
        consumed = (sol.x_star + sol.y_star) * c.efficiency
        unused = allocations[c.id].allowances - consumed
        market.bank_surplus(bank, c.id, unused, year)
        # Permitted usage nets purchases against the converted budget.
        penalty = market.assess_penalty(
            sol.x_star, flops_total[c.id] - sol.y_star, policy.penalty_rate
        )
        energy, co2 = compute_emissions(sol.x_star, c.efficiency)
        rows.append(
            CompanyYearRow(
                company=c.id,
                allocated=allocations[c.id].allowances,
                banked_in=banked_in[c.id],
                flops_allowed=flops_total[c.id],
                x_star=sol.x_star,
                y_star=sol.y_star,
                banked_out=bank.balance(c.id),
                penalty=penalty,
                utility=sol.utility - penalty,
                energy=energy,
                co2_kg=co2,
            )
        )
    clearing = (
        next(iter(prices.values())) if policy.price_mode != "scaled_sqrt_a" else None
    )
    return YearReport(
        year=year,
        rows=tuple(rows),
        total_flops=sum(r.x_star for r in rows),
        total_allowances=sum(r.allocated for r in rows),
        clearing_price=clearing,
        unmatched_net=outcome.unmatched_net,
        benchmark=benchmark,
        prices=prices,
        trades=outcome.ledger.entries,
    )


def run_horizon(scenario: Scenario) -> list[YearReport]:
    """Run years 1..horizon sequentially, threading the bank ledger through."""
    validate_scenario(scenario)
    bank = market.BankLedger()
    return [run_year(scenario, year, bank) for year in range(1, scenario.policy.horizon + 1)]


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    x_base: float
    x_ct: float
    u_base: float
    u_ct: float
    b: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    crossover: float | None = None


def _checked_grid(grid: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(name, f"{name} must be a non-empty 1-D grid")
    if np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
        raise ValidationError(name, f"{name} must be positive and strictly increasing")
    return arr


def default_grid(lo: float, hi: float, points: int = 50, anchors: Sequence[float] = ()) -> np.ndarray:
    """Log-spaced grid with reference values inserted as exact points."""
    if not (0 < lo < hi) or points < 2:
        raise ValidationError("grid", "grid needs 0 < lo < hi and >= 2 points")
    grid = np.geomspace(lo, hi, points)
    for anchor in anchors:
        if lo <= anchor <= hi:
            grid = np.union1d(grid, [anchor])
    return grid


def sweep_flop_usage(
    a_grid: Sequence[float] | np.ndarray | None = None,
    price_mode: str = "fixed",
    k: float = 1.0,
    b: float = 0.01,
    flops_allowed: float = 10.0,
) -> SweepResult:
    """Usage and utility versus cost-per-FLOP, base versus cap-and-trade.

    ``price_mode`` is ``fixed`` (constant trade price b) or ``sqrt_a``
    (price scales with the square root of the cost). Usage must come out
    strictly lower under cap-and-trade on every row; that is checked, not
    assumed.
    """
    if a_grid is None:
        a_grid = default_grid(1e-3, 1e-1, anchors=(0.01,))
    grid = _checked_grid(a_grid, "a_grid")
    if price_mode not in ("fixed", "sqrt_a"):
        raise ValidationError("price_mode", f"price_mode must be fixed or sqrt_a, got {price_mode!r}")
    rows = []
    for a in grid:
        price = b if price_mode == "fixed" else math.sqrt(a)
        base = equilibrium.solve_no_governance(k, a)
        ct = equilibrium.solve_cap_and_trade(k, a, price, flops_allowed)
        if not ct.x_star < base.x_star:
            raise RuntimeError(
                f"usage reduction violated at a={a:g}: {ct.x_star} >= {base.x_star}"
            )
        rows.append(
            SweepRow(
                axis_value=float(a),
                x_base=base.x_star,
                x_ct=ct.x_star,
                u_base=base.utility,
                u_ct=ct.utility,
                b=price,
            )
        )
    return SweepResult(rows=tuple(rows))


def sweep_utility(
    variant: str = "vary_F",
    k: float = 1.0,
    a: float = 0.01,
    b: float = 0.01,
    flops_allowed: float = 10.0,
    grid: Sequence[float] | np.ndarray | None = None,
) -> SweepResult:
    """Utility comparison sweeps: vary the FLOP budget or vary the cost.

    ``vary_F`` sweeps the budget at fixed cost and marks the breakeven
    budget (inserted as an exact grid point); ``vary_a`` sweeps the cost at
    a fixed budget.
    """
    if variant == "vary_F":
        crossover = equilibrium.breakeven_allowance(k, a, b)
        if grid is None:
            grid = default_grid(0.5, 20.0, anchors=(crossover,))
        f_grid = _checked_grid(grid, "grid")
        rows = []
        for f in f_grid:
            base = equilibrium.solve_no_governance(k, a)
            ct = equilibrium.solve_cap_and_trade(k, a, b, float(f))
            rows.append(
                SweepRow(
                    axis_value=float(f),
                    x_base=base.x_star,
                    x_ct=ct.x_star,
                    u_base=base.utility,
                    u_ct=ct.utility,
                    b=b,
                )
            )
        return SweepResult(rows=tuple(rows), crossover=crossover)
    if variant == "vary_a":
        if grid is None:
            grid = default_grid(1e-3, 1e-1, anchors=(0.01,))
        a_grid = _checked_grid(grid, "grid")
        rows = []
        for a_val in a_grid:
            base = equilibrium.solve_no_governance(k, float(a_val))
            ct = equilibrium.solve_cap_and_trade(k, float(a_val), b, flops_allowed)
            rows.append(
                SweepRow(
                    axis_value=float(a_val),
                    x_base=base.x_star,
                    x_ct=ct.x_star,
                    u_base=base.utility,
                    u_ct=ct.utility,
                    b=b,
                )
            )
        return SweepResult(rows=tuple(rows))
    raise ValidationError("variant", f"variant must be vary_F or vary_a, got {variant!r}")
