"""Core domain types for the compute cap-and-trade simulator.

Every quantity the rest of the package manipulates lives here as a frozen,
validated value object:

* ``Company`` — one market participant (output, efficiency, assistance
  factor, baseline history, loss exponent, marginal cost).
* ``PolicyConfig`` — governance parameters (allocation rule, benchmark rule,
  price mode, penalty rate, horizon, policy mode).
* ``EquilibriumSolution`` — a firm's optimal usage/trade pair with KKT
  multipliers and solver provenance.
* ``TradeLedger`` / ``TradeEntry`` — every allowance transfer in a
  compliance year; conservation checks run against it.
* ``YearReport`` / ``CompanyYearRow`` — one simulated compliance year,
  the rows of the output CSV.

Units: FLOPs are dimensionless normalized units (order 1-30, so that the
power-law loss term never underflows); efficiency and the benchmark are
allowance units per FLOP; allowances are energy-like units; prices, costs,
and utilities share one utility unit.

Validation is total: every constructor input either validates or raises
``ValidationError`` naming the offending field. There is no silent clamping.
All types are immutable after validation and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Default absolute comparison tolerance for floating-point quantities.
ABS_TOL = 1e-9

ALLOCATION_RULES = frozenset({"grandfathering", "benchmarking"})
BENCHMARK_RULES = frozenset({"fixed", "pct90_of_average", "top_decile"})
PRICE_MODES = frozenset({"exogenous", "scaled_sqrt_a", "endogenous_clearing"})
POLICY_MODES = frozenset(
    {"no_governance", "cap_and_trade", "pigouvian", "credit_program"}
)
SOLUTION_METHODS = frozenset({"closed_form", "grid_oracle"})


class ValidationError(ValueError):
    """A field value violates a domain invariant."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(message)


class ClearingError(RuntimeError):
    """The secondary market cannot clear (no root in the price bracket)."""


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ValidationError(field_name, message)


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


@dataclass(frozen=True)
class Company:
    """One market participant.

    ``output`` is this year's production level in FLOPs, ``efficiency`` the
    energy drawn per FLOP (allowance units per FLOP), ``assistance`` the
    allocation multiplier (>1 rewards, <1 penalizes), ``historical`` the
    baseline-period usage that grandfathering scales, ``loss_exponent`` the
    power-law exponent of the performance term, and ``cost_per_flop`` the
    linear marginal cost.
    """

    id: str
    output: float
    efficiency: float
    cost_per_flop: float
    assistance: float = 1.0
    historical: float = 0.0
    loss_exponent: float = 1.0


def validate_company(c: Company) -> Company:
    """Return ``c`` unchanged if all invariants hold, else raise."""
    _require(bool(c.id), "id", "id must be a non-empty string")
    _require(_finite(c.output) and c.output >= 0, "output", "output must be >= 0")
    _require(
        _finite(c.efficiency) and c.efficiency > 0,
        "efficiency",
        "efficiency must be > 0",
    )
    _require(
        _finite(c.assistance) and c.assistance > 0,
        "assistance",
        "assistance must be > 0",
    )
    _require(
        _finite(c.historical) and c.historical >= 0,
        "historical",
        "historical must be >= 0",
    )
    _require(
        _finite(c.loss_exponent) and c.loss_exponent > 0,
        "loss_exponent",
        "loss_exponent must be > 0",
    )
    _require(
        _finite(c.cost_per_flop) and c.cost_per_flop > 0,
        "cost_per_flop",
        "cost_per_flop must be > 0",
    )
    return c


@dataclass(frozen=True)
class PolicyConfig:
    """Governance parameters for one scenario.

    ``mode`` selects the policy under simulation; the remaining fields are
    consulted only by the modes that need them (``tax`` by pigouvian,
    ``baseline``/``credit_price`` by the credit program, the market fields
    by cap-and-trade).
    """

    mode: str
    allocation_rule: str = "benchmarking"
    gamma: float = 0.9
    benchmark: float = 1.0
    benchmark_rule: str = "fixed"
    price_mode: str = "exogenous"
    buy_sell_price: float = 0.01
    penalty_rate: float = 0.1
    horizon: int = 1
    tax: float = 0.0
    baseline: float = 10.0
    credit_price: float = 0.01
    clearing_bracket: tuple[float, float] = (1e-6, 1.0)
    clearing_tol: float = ABS_TOL


def validate_policy(p: PolicyConfig) -> PolicyConfig:
    """Return ``p`` if invariants hold, including the penalty > price check."""
    _require(p.mode in POLICY_MODES, "mode", f"mode must be one of {sorted(POLICY_MODES)}")
    _require(
        p.allocation_rule in ALLOCATION_RULES,
        "allocation_rule",
        f"allocation_rule must be one of {sorted(ALLOCATION_RULES)}",
    )
    _require(
        p.benchmark_rule in BENCHMARK_RULES,
        "benchmark_rule",
        f"benchmark_rule must be one of {sorted(BENCHMARK_RULES)}",
    )
    _require(
        p.price_mode in PRICE_MODES,
        "price_mode",
        f"price_mode must be one of {sorted(PRICE_MODES)}",
    )
    _require(
        _finite(p.gamma) and 0.0 < p.gamma < 1.0,
        "gamma",
        "gamma must be in open interval (0,1)",
    )
    _require(_finite(p.benchmark) and p.benchmark > 0, "benchmark", "benchmark must be > 0")
    _require(
        _finite(p.buy_sell_price) and p.buy_sell_price > 0,
        "buy_sell_price",
        "buy_sell_price must be > 0",
    )
    _require(
        _finite(p.penalty_rate) and p.penalty_rate > 0,
        "penalty_rate",
        "penalty_rate must be > 0",
    )
    if p.price_mode == "exogenous":
        # Compliance is only rational when violating costs more than buying.
        _require(
            p.penalty_rate > p.buy_sell_price,
            "penalty_rate",
            "penalty must exceed price",
        )
    _require(isinstance(p.horizon, int) and p.horizon >= 1, "horizon", "horizon must be >= 1")
    _require(_finite(p.tax) and p.tax >= 0, "tax", "tax must be >= 0")
    if p.mode == "credit_program":
        _require(_finite(p.baseline) and p.baseline > 0, "baseline", "baseline must be > 0")
        _require(
            _finite(p.credit_price) and p.credit_price > 0,
            "credit_price",
            "credit_price must be > 0",
        )
    lo, hi = p.clearing_bracket
    _require(
        _finite(lo) and _finite(hi) and 0 < lo < hi,
        "clearing_bracket",
        "clearing_bracket must satisfy 0 < lo < hi",
    )
    _require(
        _finite(p.clearing_tol) and p.clearing_tol > 0,
        "clearing_tol",
        "clearing_tol must be > 0",
    )
    return p


@dataclass(frozen=True)
class AllowanceAccount:
    """One firm's allowance position: this year's free allocation, the
    balance carried from prior years, and the net quantity traded away."""

    allocated: float
    banked: float = 0.0
    traded_net: float = 0.0

    @property
    def available(self) -> float:
        return self.allocated + self.banked - self.traded_net


def validate_account(acct: AllowanceAccount) -> AllowanceAccount:
    _require(
        _finite(acct.allocated) and acct.allocated >= 0,
        "allocated",
        "allocated must be >= 0",
    )
    _require(_finite(acct.banked) and acct.banked >= 0, "banked", "banked must be >= 0")
    _require(
        acct.available >= -ABS_TOL,
        "traded_net",
        "available balance must be >= 0 at year close",
    )
    return acct


@dataclass(frozen=True)
class EquilibriumSolution:
    """Optimal usage ``x_star`` and net sale ``y_star`` (negative = bought),
    with the KKT multipliers of the cap and nonnegativity constraints."""

    x_star: float
    y_star: float
    utility: float
    mu1: float = 0.0
    mu2: float = 0.0
    method: str = "closed_form"

    def __post_init__(self):
        _require(_finite(self.x_star) and self.x_star > 0, "x_star", "x_star must be > 0")
        _require(self.mu1 >= 0, "mu1", "mu1 must be >= 0")
        _require(self.mu2 >= 0, "mu2", "mu2 must be >= 0")
        _require(
            self.method in SOLUTION_METHODS,
            "method",
            f"method must be one of {sorted(SOLUTION_METHODS)}",
        )


@dataclass(frozen=True)
class TradeEntry:
    """One allowance transfer.

    The market is denominated in FLOPs-worth; ``quantity`` is the traded
    FLOPs-worth while ``seller_allowances``/``buyer_allowances`` record the
    same transfer converted at each side's own efficiency.
    """

    year: int
    seller: str
    buyer: str
    quantity: float
    price: float
    seller_allowances: float
    buyer_allowances: float

    def __post_init__(self):
        _require(self.quantity > 0, "quantity", "trade quantity must be > 0")
        _require(self.seller != self.buyer, "buyer", "seller and buyer must differ")


class TradeLedger:
    """Append-only record of every transfer in a simulation.

    Allowances are transferred, never created: each entry debits its seller
    and credits its buyer with the same FLOPs-worth quantity, so the signed
    per-year sum is zero by construction.
    """

    def __init__(self):
        self._entries: list[TradeEntry] = []

    def add(self, entry: TradeEntry) -> None:
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[TradeEntry, ...]:
        return tuple(self._entries)

    def year_entries(self, year: int) -> tuple[TradeEntry, ...]:
        return tuple(e for e in self._entries if e.year == year)

    def net_positions(self, year: int) -> dict[str, float]:
        """Per-company net sold FLOPs-worth (+ sold, - bought) for a year.

        The values sum to zero for any ledger because every entry credits
        its seller and debits its buyer by the same quantity.
        """
        net: dict[str, float] = {}
        for e in self.year_entries(year):
            net[e.seller] = net.get(e.seller, 0.0) + e.quantity
            net[e.buyer] = net.get(e.buyer, 0.0) - e.quantity
        return net

    def volume(self, year: int) -> float:
        return sum(e.quantity for e in self.year_entries(year))

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class CompanyYearRow:
    """Per-company line of a ``YearReport`` (one CSV row)."""

    company: str
    allocated: float
    banked_in: float
    flops_allowed: float
    x_star: float
    y_star: float
    banked_out: float
    penalty: float
    utility: float
    energy: float
    co2_kg: float


@dataclass(frozen=True)
class YearReport:
    """All outcomes of one compliance year."""

    year: int
    rows: tuple[CompanyYearRow, ...]
    total_flops: float
    total_allowances: float
    clearing_price: float | None = None
    unmatched_net: float = 0.0
    benchmark: float | None = None
    prices: dict[str, float] = field(default_factory=dict)
    trades: tuple[TradeEntry, ...] = ()
