"""Closed-form and brute-force solvers for the firm's usage problem.

A rational firm chooses FLOP usage x to balance a power-law performance
term -x^(-k) against a linear cost a*x. Without governance the optimum is
x* = (k/a)^(1/(k+1)). Under cap-and-trade the firm also chooses a net
allowance sale y at price b, subject to x + y <= F (its FLOP budget) and
x >= 0; the KKT system gives mu1 = b, a binding cap, and

    x* = (k/(a+b))^(1/(k+1)),    y* = F - x*.

Because b > 0 the cap-and-trade optimum always uses strictly fewer FLOPs
than the ungoverned one. Every closed form here is backed by an
independent log-grid argmax oracle (``grid_oracle``) and a KKT residual
check (``kkt_residuals``); the 2-D ``slack_scan`` verifies, rather than
assumes, that leaving the cap slack never helps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EquilibriumSolution, ValidationError

#: Search bracket for the brute-force oracle; covers every optimum reachable
#: from k in [0.25, 4] and a, b in [1e-4, 1] with wide margin.
ORACLE_BRACKET = (1e-3, 1e4)
ORACLE_POINTS = 1001
ORACLE_ZOOM_ROUNDS = 3


def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValidationError(name, f"{name} must be > 0")


def utility_no_governance(x: float, k: float, a: float) -> float:
    """Ungoverned utility -x^(-k) - a*x; diverges to -inf as x -> 0."""
    if x <= 0:
        raise ValidationError("x", "x must be > 0 (utility is -inf at x = 0)")
    return -(x ** (-k)) - a * x


def utility_cap_and_trade(x: float, y: float, k: float, a: float, b: float) -> float:
    """Cap-and-trade utility -x^(-k) - a*x + b*y (y < 0 means buying)."""
    if x <= 0:
        raise ValidationError("x", "x must be > 0 (utility is -inf at x = 0)")
    return -(x ** (-k)) - a * x + b * y


def utility_gradient(x: float, y: float, k: float, a: float, b: float) -> tuple[float, float]:
    """Analytic gradient of the cap-and-trade utility: (k*x^(-(k+1)) - a, b)."""
    if x <= 0:
        raise ValidationError("x", "x must be > 0")
    return (k * x ** (-(k + 1)) - a, b)


def solve_no_governance(k: float, a: float) -> EquilibriumSolution:
    """Closed-form ungoverned optimum x* = (k/a)^(1/(k+1))."""
    _check_positive("k", k)
    _check_positive("a", a)
    x_star = (k / a) ** (1.0 / (k + 1.0))
    return EquilibriumSolution(
        x_star=x_star,
        y_star=0.0,
        utility=utility_no_governance(x_star, k, a),
        method="closed_form",
    )


def solve_cap_and_trade(k: float, a: float, b: float, flops_allowed: float) -> EquilibriumSolution:
    """Closed-form cap-and-trade optimum.

    The cap binds exactly (x* + y* = F): the trade multiplier mu1 equals b > 0,
    so complementary slackness forces tightness. F = 0 is legal (the firm buys
    all of its usage); negative F is rejected.
    """
    _check_positive("k", k)
    _check_positive("a", a)
    _check_positive("b", b)
    if flops_allowed < 0:
        raise ValidationError("flops_allowed", "flops_allowed must be >= 0")
    x_star = (k / (a + b)) ** (1.0 / (k + 1.0))
    y_star = flops_allowed - x_star
    return EquilibriumSolution(
        x_star=x_star,
        y_star=y_star,
        utility=utility_cap_and_trade(x_star, y_star, k, a, b),
        mu1=b,
        mu2=0.0,
        method="closed_form",
    )


def solve_pigouvian(k: float, a: float, t: float) -> EquilibriumSolution:
    """Optimum under a per-FLOP tax t: the ungoverned form with cost a + t."""
    _check_positive("k", k)
    _check_positive("a", a)
    if t < 0:
        raise ValidationError("t", "t must be >= 0")
    x_star = (k / (a + t)) ** (1.0 / (k + 1.0))
    return EquilibriumSolution(
        x_star=x_star,
        y_star=0.0,
        utility=-(x_star ** (-k)) - (a + t) * x_star,
        method="closed_form",
    )


@dataclass(frozen=True)
class KktResiduals:
    """First-order optimality residuals for the cap-and-trade problem.

    ``stationarity_x`` and ``stationarity_y`` are the two gradient rows of
    the Lagrangian, ``primal_cap``/``primal_nonneg`` the constraint
    violations, and the two ``comp_slack`` terms the complementary
    slackness products. A solution is KKT-valid when all six are below
    tolerance.
    """

    stationarity_x: float
    stationarity_y: float
    primal_cap: float
    primal_nonneg: float
    comp_slack_1: float
    comp_slack_2: float

    @property
    def max_residual(self) -> float:
        return max(
            self.stationarity_x,
            self.stationarity_y,
            self.primal_cap,
            self.primal_nonneg,
            self.comp_slack_1,
            self.comp_slack_2,
        )

    def is_valid(self, tol: float = 1e-9) -> bool:
        return self.max_residual < tol


def kkt_residuals(
    sol: EquilibriumSolution, k: float, a: float, b: float, flops_allowed: float
) -> KktResiduals:
    """Evaluate all six KKT residuals at a candidate solution."""
    x, y = sol.x_star, sol.y_star
    if x <= 0:
        raise ValidationError("x_star", "x_star must be > 0")
    slack = x + y - flops_allowed
    return KktResiduals(
        stationarity_x=abs(-k * x ** (-(k + 1.0)) + a + sol.mu1 - sol.mu2),
        stationarity_y=abs(sol.mu1 - b),
        primal_cap=max(0.0, slack),
        primal_nonneg=max(0.0, -x),
        comp_slack_1=abs(sol.mu1 * slack),
        comp_slack_2=abs(sol.mu2 * x),
    )


def grid_oracle(
    k: float,
    a: float,
    b: float | None = None,
    flops_allowed: float | None = None,
    mode: str = "no_governance",
    bracket: tuple[float, float] = ORACLE_BRACKET,
    points: int = ORACLE_POINTS,
    zoom_rounds: int = ORACLE_ZOOM_ROUNDS,
) -> EquilibriumSolution:
    """Brute-force argmax over a log-spaced grid, independent of the closed forms.

    For cap-and-trade the trade is pinned to y = F - x (the binding cap;
    ``slack_scan`` verifies that independently). The incumbent is refined by
    ``zoom_rounds`` rounds of re-gridding between its neighbors, which takes
    the relative argmax error far below the 1e-5 oracle-equivalence bar.
    """
    _check_positive("k", k)
    _check_positive("a", a)
    lo, hi = bracket
    if not (0 < lo < hi) or points < 3:
        raise ValidationError("bracket", "bracket must satisfy 0 < lo < hi with >= 3 points")

    if mode == "no_governance":
        def objective(xs: np.ndarray) -> np.ndarray:
            return -(xs ** (-k)) - a * xs
    elif mode == "cap_and_trade":
        if b is None or flops_allowed is None:
            raise ValidationError("mode", "cap_and_trade oracle needs b and flops_allowed")
        _check_positive("b", b)
        if flops_allowed < 0:
            raise ValidationError("flops_allowed", "flops_allowed must be >= 0")

        def objective(xs: np.ndarray) -> np.ndarray:
            return -(xs ** (-k)) - a * xs + b * (flops_allowed - xs)
    else:
        raise ValidationError("mode", f"unknown oracle mode: {mode!r}")

    xs = np.geomspace(lo, hi, points)
    for _ in range(zoom_rounds + 1):
        values = objective(xs)
        i = int(np.argmax(values))
        x_best = float(xs[i])
        xs = np.geomspace(xs[max(0, i - 1)], xs[min(len(xs) - 1, i + 1)], points)

    if mode == "no_governance":
        return EquilibriumSolution(
            x_star=x_best,
            y_star=0.0,
            utility=utility_no_governance(x_best, k, a),
            method="grid_oracle",
        )
    y_best = flops_allowed - x_best
    return EquilibriumSolution(
        x_star=x_best,
        y_star=y_best,
        utility=utility_cap_and_trade(x_best, y_best, k, a, b),
        mu1=b,
        mu2=0.0,
        method="grid_oracle",
    )


def slack_scan(
    k: float,
    a: float,
    b: float,
    flops_allowed: float,
    x_points: int = 201,
    slack_points: int = 201,
    max_slack: float = 50.0,
) -> tuple[float, float, float]:
    """Coarse 2-D scan over (x, y) allowing x + y < F; returns the best triple.

    Exists to confirm the complementary-slackness claim: no point with a
    slack cap should beat the binding closed form.
    """
    _check_positive("k", k)
    _check_positive("a", a)
    _check_positive("b", b)
    xs = np.geomspace(ORACLE_BRACKET[0], ORACLE_BRACKET[1], x_points)
    slacks = np.linspace(0.0, max_slack, slack_points)
    best = (-np.inf, 0.0, 0.0)
    for x in xs:
        ys = (flops_allowed - x) - slacks
        values = -(x ** (-k)) - a * x + b * ys
        j = int(np.argmax(values))
        if values[j] > best[0]:
            best = (float(values[j]), float(x), float(ys[j]))
    return best[1], best[2], best[0]


def breakeven_allowance(k: float, a: float, b: float) -> float:
    """FLOP budget at which cap-and-trade utility equals the ungoverned optimum.

    Cap-and-trade utility is affine in F with slope b > 0, so the breakeven
    is unique: F_hat = (u_base + x_c^(-k) + a*x_c + b*x_c) / b with x_c the
    cap-and-trade usage optimum. Below F_hat the firm is worse off than
    without governance; above it, strictly better.
    """
    _check_positive("k", k)
    _check_positive("a", a)
    _check_positive("b", b)
    u_base = solve_no_governance(k, a).utility
    x_c = (k / (a + b)) ** (1.0 / (k + 1.0))
    return (u_base + x_c ** (-k) + a * x_c + b * x_c) / b
