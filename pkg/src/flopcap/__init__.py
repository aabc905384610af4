"""flopcap: deterministic simulator for a compute cap-and-trade market.

Free allowance allocation (grandfathering / benchmarking), closed-form
utility-maximizing FLOP usage with KKT verification, secondary allowance
markets with banking and penalties, and multi-year policy comparison with
CSV reporting.
"""

__version__ = "0.1.0"

from .model import (
    ABS_TOL,
    AllowanceAccount,
    ClearingError,
    Company,
    CompanyYearRow,
    EquilibriumSolution,
    PolicyConfig,
    TradeEntry,
    TradeLedger,
    ValidationError,
    YearReport,
    validate_company,
    validate_policy,
)
from .allocation import (
    AllocationResult,
    allocate,
    allocate_benchmarking,
    allocate_grandfathering,
    allowed_flops,
    compute_benchmark,
)
from .equilibrium import (
    KktResiduals,
    breakeven_allowance,
    grid_oracle,
    kkt_residuals,
    slack_scan,
    solve_cap_and_trade,
    solve_no_governance,
    solve_pigouvian,
    utility_cap_and_trade,
    utility_gradient,
    utility_no_governance,
)
from .market import (
    BankLedger,
    CreditSettlement,
    MarketOutcome,
    assess_penalty,
    bank_surplus,
    clear_price,
    credit_program_settle,
    execute_trades,
    net_supply,
)
from .simulation import (
    EMISSIONS_KG_PER_KWH,
    ENERGY_UNITS_PER_KWH,
    Scenario,
    SweepResult,
    SweepRow,
    compute_emissions,
    run_horizon,
    run_year,
    sweep_flop_usage,
    sweep_utility,
    validate_scenario,
)

__all__ = [
    "ABS_TOL",
    "AllocationResult",
    "AllowanceAccount",
    "BankLedger",
    "ClearingError",
    "Company",
    "CompanyYearRow",
    "CreditSettlement",
    "EMISSIONS_KG_PER_KWH",
    "ENERGY_UNITS_PER_KWH",
    "EquilibriumSolution",
    "KktResiduals",
    "MarketOutcome",
    "PolicyConfig",
    "Scenario",
    "SweepResult",
    "SweepRow",
    "TradeEntry",
    "TradeLedger",
    "ValidationError",
    "YearReport",
    "allocate",
    "allocate_benchmarking",
    "allocate_grandfathering",
    "allowed_flops",
    "assess_penalty",
    "bank_surplus",
    "breakeven_allowance",
    "clear_price",
    "compute_benchmark",
    "compute_emissions",
    "credit_program_settle",
    "execute_trades",
    "grid_oracle",
    "kkt_residuals",
    "net_supply",
    "run_horizon",
    "run_year",
    "slack_scan",
    "solve_cap_and_trade",
    "solve_no_governance",
    "solve_pigouvian",
    "sweep_flop_usage",
    "sweep_utility",
    "utility_cap_and_trade",
    "utility_gradient",
    "utility_no_governance",
    "validate_company",
    "validate_policy",
    "validate_scenario",
    "__version__",
]
