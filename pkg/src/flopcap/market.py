"""Secondary-market mechanics: trading, clearing, banking, penalties, credits.

The market is denominated in FLOPs-worth. Each firm's desired net sale at a
price b comes straight from its cap-and-trade best response, y = F - x*(b).
With an exogenous price the aggregate residual is absorbed by an implicit
external counterparty and recorded, never silently dropped; with endogenous
clearing a uniform price is found by bisection on aggregate net supply,
which is strictly increasing in the price.

Banking carries verified year-close surplus forward (deposits only from
surplus, balances never negative); shortfalls draw the bank down first and
anything beyond that is a compliance violation routed to the penalty
assessment. The credit-program settlement exists as a contrast mode: usage
below a baseline mints credits without any aggregate cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

from .model import ClearingError, TradeEntry, TradeLedger, ValidationError

#: Desired trades smaller than this (in FLOPs-worth) are treated as zero so
#: that exactly self-sufficient firms do not emit dust ledger entries.
TRADE_EPS = 1e-12

#: Agent tuple for clearing: (loss_exponent k, cost_per_flop a, flops_allowed F).
Agent = tuple[float, float, float]


def net_supply(price: float, agents: Sequence[Agent]) -> float:
    """Aggregate desired net sales at a price: sum of F_i - (k_i/(a_i+b))^(1/(k_i+1))."""
    if price <= 0:
        raise ValidationError("price", "price must be > 0")
    if not agents:
        raise ValidationError("agents", "agents must be non-empty")
    total = 0.0
    for k, a, flops_allowed in agents:
        total += flops_allowed - (k / (a + price)) ** (1.0 / (k + 1.0))
    return total


def clear_price(
    agents: Sequence[Agent],
    bracket: tuple[float, float] = (1e-6, 1.0),
    tol: float = 1e-9,
    max_iter: int = 200,
) -> float:
    """Uniform clearing price by bisection on aggregate net supply.

    Net supply is strictly increasing in the price (every best-response x*
    decreases), so a sign change over the bracket pins a unique root.
    Terminates when |net_supply| < tol or the bracket width falls below
    tol squared.
    """
    lo, hi = bracket
    if not (0 < lo < hi):
        raise ValidationError("bracket", "bracket must satisfy 0 < lo < hi")
    ns_lo = net_supply(lo, agents)
    ns_hi = net_supply(hi, agents)
    if abs(ns_lo) < tol:
        return lo
    if abs(ns_hi) < tol:
        return hi
    if ns_lo > 0 or ns_hi < 0:
        raise ClearingError(
            "market cannot clear in bracket: net supply has no sign change "
            f"(net_supply({lo:g}) = {ns_lo:g}, net_supply({hi:g}) = {ns_hi:g})"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        ns_mid = net_supply(mid, agents)
        if abs(ns_mid) < tol or (hi - lo) < tol * tol:
            return mid
        if ns_mid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MarketOutcome:
    """Result of settling one year's trades at a uniform price."""

    clearing_price: float
    fills: dict[str, float]
    ledger: TradeLedger
    unmatched_net: float


def execute_trades(
    year: int,
    positions: dict[str, float],
    efficiencies: dict[str, float],
    price: float,
) -> MarketOutcome:
    """Match desired net sales greedily and record transfers in a ledger.

    Sellers (y > 0) are matched to buyers (y < 0) in descending quantity
    with company id as the deterministic tie-break; uniform pricing makes
    the matching welfare-irrelevant. Each entry records the FLOPs-worth
    quantity plus its conversion to allowance units at both parties' own
    efficiencies. Whatever cannot be matched internally is reported as
    ``unmatched_net`` against the implicit external counterparty.
    """
    if price <= 0:
        raise ValidationError("price", "price must be > 0")
    sellers = sorted(
        ((cid, y) for cid, y in positions.items() if y > TRADE_EPS),
        key=lambda item: (-item[1], item[0]),
    )
    buyers = sorted(
        ((cid, -y) for cid, y in positions.items() if y < -TRADE_EPS),
        key=lambda item: (-item[1], item[0]),
    )
    ledger = TradeLedger()
    si = bi = 0
    sellers = [[cid, qty] for cid, qty in sellers]
    buyers = [[cid, qty] for cid, qty in buyers]
    while si < len(sellers) and bi < len(buyers):
        seller_id, sell_rem = sellers[si]
        buyer_id, buy_rem = buyers[bi]
        qty = min(sell_rem, buy_rem)
        ledger.add(
            TradeEntry(
                year=year,
                seller=seller_id,
                buyer=buyer_id,
                quantity=qty,
                price=price,
                seller_allowances=qty * efficiencies[seller_id],
                buyer_allowances=qty * efficiencies[buyer_id],
            )
        )
        sellers[si][1] -= qty
        buyers[bi][1] -= qty
        if sellers[si][1] <= TRADE_EPS:
            si += 1
        if buyers[bi][1] <= TRADE_EPS:
            bi += 1
    fills = {cid: (y if abs(y) > TRADE_EPS else 0.0) for cid, y in positions.items()}
    unmatched = sum(fills.values())
    return MarketOutcome(
        clearing_price=price,
        fills=fills,
        ledger=ledger,
        unmatched_net=unmatched,
    )


@dataclass(frozen=True)
class BankEntry:
    year: int
    company: str
    delta: float
    balance_after: float


@dataclass
class BankLedger:
    """Per-company banked allowance balances with a deposit/withdrawal log."""

    balances: dict[str, float] = field(default_factory=dict)
    entries: list[BankEntry] = field(default_factory=list)

    def balance(self, company: str) -> float:
        return self.balances.get(company, 0.0)

    def _post(self, year: int, company: str, delta: float) -> None:
        new_balance = self.balance(company) + delta
        if new_balance < 0:
            raise ValidationError("banked", "banked balance must never go negative")
        self.balances[company] = new_balance
        self.entries.append(BankEntry(year, company, delta, new_balance))


def bank_surplus(bank: BankLedger, company: str, unused: float, year: int) -> float:
    """Settle a firm's year-close allowance position against its bank.

    ``unused`` is allocated + bought - sold - used, in allowance units.
    Nonnegative surplus is deposited. A deficit is covered from the banked
    balance first; whatever the bank cannot cover is returned as the
    compliance violation (allowance units) for penalty assessment, never
    banked.
    """
    if unused >= 0:
        if unused > 0:
            bank._post(year, company, unused)
        return 0.0
    deficit = -unused
    withdrawal = min(bank.balance(company), deficit)
    if withdrawal > 0:
        bank._post(year, company, -withdrawal)
    return deficit - withdrawal


def assess_penalty(usage_flops: float, flops_total: float, penalty_rate: float) -> float:
    """Penalty owed for usage beyond the total permitted FLOPs (incl. trades/bank)."""
    if penalty_rate <= 0:
        raise ValidationError("penalty_rate", "penalty_rate must be > 0")
    return penalty_rate * max(0.0, usage_flops - flops_total)


@dataclass(frozen=True)
class CreditSettlement:
    """Per-company credit-program outcome for one year."""

    credits: dict[str, float]
    purchases: dict[str, float]
    payments: dict[str, float]
    total_minted: float


def credit_program_settle(
    usages: dict[str, float], baseline: float, credit_price: float
) -> CreditSettlement:
    """Mint credits for usage below the baseline; deficit firms buy the gap.

    There is no cap: every firm below the baseline mints, so total credits
    grow with entry and aggregate usage may exceed any fixed allowance pool.
    """
    if baseline <= 0:
        raise ValidationError("baseline", "baseline must be > 0")
    if credit_price <= 0:
        raise ValidationError("credit_price", "credit_price must be > 0")
    credits: dict[str, float] = {}
    purchases: dict[str, float] = {}
    payments: dict[str, float] = {}
    for cid, usage in usages.items():
        minted = max(0.0, baseline - usage)
        bought = max(0.0, usage - baseline)
        credits[cid] = minted
        purchases[cid] = bought
        payments[cid] = credit_price * (minted - bought)
    return CreditSettlement(
        credits=credits,
        purchases=purchases,
        payments=payments,
        total_minted=sum(credits.values()),
    )
