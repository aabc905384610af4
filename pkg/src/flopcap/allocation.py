"""Primary-market allowance distribution and FLOP conversion.

Two free-allocation rules are supported: grandfathering (a scaling factor
applied to a baseline-period usage level) and benchmarking (current output
times an efficiency standard times a per-company assistance factor).
Allocated allowances convert to a usable FLOP budget at the firm's own
efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

from .model import Company, ValidationError


@dataclass(frozen=True)
class AllocationResult:
    """One firm's free allocation and the FLOP budget it converts to."""

    company: str
    allowances: float
    flops_allowed: float


def allocate_grandfathering(historical: float, gamma: float) -> float:
    """Allowances from baseline usage scaled by ``gamma`` in (0,1)."""
    if not (0.0 < gamma < 1.0):
        raise ValidationError("gamma", "gamma must be in open interval (0,1)")
    if historical < 0:
        raise ValidationError("historical", "historical must be >= 0")
    return gamma * historical


def allocate_benchmarking(output: float, benchmark: float, assistance: float) -> float:
    """Allowances as output x benchmark x assistance factor."""
    if output < 0:
        raise ValidationError("output", "output must be >= 0")
    if benchmark <= 0:
        raise ValidationError("benchmark", "benchmark must be > 0")
    if assistance <= 0:
        raise ValidationError("assistance", "assistance must be > 0")
    return output * benchmark * assistance


def allowed_flops(allowances: float, efficiency: float) -> float:
    """FLOP budget implied by an allowance balance at a firm's efficiency."""
    if efficiency <= 0:
        raise ValidationError("efficiency", "efficiency must be > 0")
    if allowances < 0:
        raise ValidationError("allowances", "allowances must be >= 0")
    return allowances / efficiency


def compute_benchmark(
    companies: Sequence[Company],
    rule: str,
    fixed_value: float | None = None,
) -> float:
    """Benchmark for the year under the configured rule.

    ``pct90_of_average`` is 90% of the mean efficiency; ``top_decile`` is the
    efficiency at the most-efficient decile boundary, nearest-rank on the
    ascending sort (lower energy-per-FLOP is better); ``fixed`` passes the
    configured value through.
    """
    if rule == "fixed":
        if fixed_value is None or fixed_value <= 0:
            raise ValidationError("benchmark", "benchmark must be > 0")
        return fixed_value
    if not companies:
        raise ValidationError("companies", "company list must be non-empty")
    efficiencies = [c.efficiency for c in companies]
    if any(e <= 0 for e in efficiencies):
        raise ValidationError("efficiency", "efficiency must be > 0")
    if rule == "pct90_of_average":
        return 0.9 * sum(efficiencies) / len(efficiencies)
    if rule == "top_decile":
        rank = max(1, math.ceil(0.10 * len(efficiencies)))
        return sorted(efficiencies)[rank - 1]
    raise ValidationError("benchmark_rule", f"unknown benchmark rule: {rule!r}")


def allocate(company: Company, rule: str, gamma: float, benchmark: float) -> AllocationResult:
    """Allocate one firm's allowances under the active rule and convert to FLOPs."""
    if rule == "grandfathering":
        allowances = allocate_grandfathering(company.historical, gamma)
    elif rule == "benchmarking":
        allowances = allocate_benchmarking(company.output, benchmark, company.assistance)
    else:
        raise ValidationError("allocation_rule", f"unknown allocation rule: {rule!r}")
    return AllocationResult(
        company=company.id,
        allowances=allowances,
        flops_allowed=allowed_flops(allowances, company.efficiency),
    )
