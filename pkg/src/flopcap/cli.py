"""Command line: scenario runs, figure sweeps, and solver verification.

Commands
--------
``flopcap run --scenario s.json --out DIR``
    Simulate the scenario horizon and write years.csv, trades.csv,
    summary.csv.
``flopcap sweep --figure fig1a --out DIR [--k --b --grid-min --grid-max --grid-points]``
    Write one figure dataset (fig1a.csv .. fig2b.csv).
``flopcap verify [--sample N] [--seed S]``
    Run the oracle-equivalence, KKT, and gradient checks on random draws.

All CSV output is byte-stable: fixed column order, 10-significant-digit
decimals, no timestamps, and a leading comment line carrying the tool
version and a hash of the canonicalized configuration. Exit codes: 0 ok,
1 I/O error, 2 validation error, 3 clearing failure, 4 verification
failure. Errors print one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, equilibrium, simulation
from .model import ClearingError, Company, PolicyConfig, ValidationError
from .simulation import Scenario

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_CLEARING = 3
EXIT_VERIFY = 4

FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b")

YEARS_HEADER = (
    "year,company,allocated,banked_in,flops_allowed,x_star,y_star,"
    "banked_out,penalty,utility,energy,co2_kg,clearing_price"
)
TRADES_HEADER = "year,seller,buyer,quantity,price,seller_allowances,buyer_allowances"
SUMMARY_HEADER = (
    "year,total_flops,total_allowances,total_energy,total_co2_kg,"
    "total_penalty,clearing_price,unmatched_net,benchmark"
)
FIG_HEADER = "axis_value,x_base,x_ct,u_base,u_ct,b"


@dataclass(frozen=True)
class RunManifest:
    """Provenance for one invocation, echoed into every CSV header comment."""

    scenario_path: str
    command: str
    out_dir: str
    tool_version: str
    config_hash: str

    @property
    def comment(self) -> str:
        return f"# flopcap {self.tool_version} config={self.config_hash}"


def config_hash(config: object) -> str:
    """Stable 12-hex digest of a canonicalized (sorted, compact) JSON document."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.10g}"


_COMPANY_KEYS = {
    "id", "output", "efficiency", "cost_per_flop",
    "assistance", "historical", "loss_exponent",
}
_POLICY_KEYS = {
    "mode", "allocation_rule", "gamma", "benchmark", "benchmark_rule",
    "price_mode", "buy_sell_price", "penalty_rate", "horizon", "tax",
    "baseline", "credit_price", "clearing_bracket", "clearing_tol",
}
_SCENARIO_KEYS = {"companies", "policy", "seed", "schedule"}


def parse_scenario(path: str | Path) -> tuple[Scenario, list[str]]:
    """Load and fully validate a scenario JSON file.

    Returns the scenario plus one diagnostic line per default applied, so
    callers can echo exactly what was filled in.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            "scenario", f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ValidationError("scenario", "scenario document must be a JSON object")
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise ValidationError("scenario", f"unknown scenario keys: {sorted(unknown)}")
    if "companies" not in doc or "policy" not in doc:
        raise ValidationError("scenario", "scenario requires 'companies' and 'policy'")

    diagnostics: list[str] = []

    pol = doc["policy"]
    if not isinstance(pol, dict):
        raise ValidationError("policy", "policy must be a JSON object")
    unknown = set(pol) - _POLICY_KEYS
    if unknown:
        raise ValidationError("policy", f"unknown policy keys: {sorted(unknown)}")
    if "mode" not in pol:
        raise ValidationError("mode", "policy requires 'mode'")
    pol = dict(pol)
    if "buy_sell_price" not in pol:
        pol["buy_sell_price"] = 0.01
        diagnostics.append("default applied: buy_sell_price=0.01")
    if "penalty_rate" not in pol:
        pol["penalty_rate"] = 10.0 * pol["buy_sell_price"]
        diagnostics.append(f"default applied: penalty_rate={_fmt(pol['penalty_rate'])}")
    if "clearing_tol" not in pol:
        pol["clearing_tol"] = 1e-9
        diagnostics.append("default applied: clearing_tol=1e-09")
    if "clearing_bracket" in pol:
        pol["clearing_bracket"] = tuple(pol["clearing_bracket"])
    try:
        policy = PolicyConfig(**pol)
    except TypeError as exc:
        raise ValidationError("policy", str(exc)) from exc

    raw_companies = doc["companies"]
    if not isinstance(raw_companies, list) or not raw_companies:
        raise ValidationError("companies", "companies must be a non-empty list")
    companies = []
    for entry in raw_companies:
        if not isinstance(entry, dict):
            raise ValidationError("companies", "each company must be a JSON object")
        unknown = set(entry) - _COMPANY_KEYS
        if unknown:
            raise ValidationError("companies", f"unknown company keys: {sorted(unknown)}")
        for required in ("id", "efficiency", "cost_per_flop"):
            if required not in entry:
                raise ValidationError(required, f"company requires '{required}'")
        entry = dict(entry)
        cid = entry["id"]
        for name, default in (
            ("output", 0.0),
            ("assistance", 1.0),
            ("historical", 0.0),
            ("loss_exponent", 1.0),
        ):
            if name not in entry:
                entry[name] = default
                label = "k" if name == "loss_exponent" else name
                diagnostics.append(f"default applied: {label}={_fmt(default)} (company {cid})")
        companies.append(Company(**entry))

    schedule = {}
    for year_key, overrides in (doc.get("schedule") or {}).items():
        try:
            year = int(year_key)
        except (TypeError, ValueError):
            raise ValidationError("schedule", f"schedule year must be an integer, got {year_key!r}")
        schedule[year] = overrides

    scenario = Scenario(
        companies=tuple(companies),
        policy=policy,
        seed=int(doc.get("seed", 0)),
        schedule=schedule,
    )
    simulation.validate_scenario(scenario)
    return scenario, diagnostics


def _scenario_config_hash(path: str | Path) -> str:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return config_hash(doc)


def _write_csv(path: Path, manifest: RunManifest, header: str, lines: list[str],
               extra_comments: list[str] | None = None) -> None:
    parts = [manifest.comment]
    parts.extend(extra_comments or [])
    parts.append(header)
    parts.extend(lines)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8", newline="\n")


def _row_price(report, company: str) -> float | None:
    if report.prices:
        return report.prices.get(company, report.clearing_price)
    return report.clearing_price


def cmd_run(scenario_path: str, out_dir: str) -> int:
    """Simulate a scenario horizon and write the three report CSVs."""
    scenario, diagnostics = parse_scenario(scenario_path)
    for line in diagnostics:
        print(line, file=sys.stderr)
    manifest = RunManifest(
        scenario_path=str(scenario_path),
        command="run",
        out_dir=str(out_dir),
        tool_version=__version__,
        config_hash=_scenario_config_hash(scenario_path),
    )
    reports = simulation.run_horizon(scenario)

    years_lines = []
    trades_lines = []
    summary_lines = []
    for report in reports:
        for row in report.rows:
            years_lines.append(
                ",".join(
                    [
                        str(report.year),
                        row.company,
                        _fmt(row.allocated),
                        _fmt(row.banked_in),
                        _fmt(row.flops_allowed),
                        _fmt(row.x_star),
                        _fmt(row.y_star),
                        _fmt(row.banked_out),
                        _fmt(row.penalty),
                        _fmt(row.utility),
                        _fmt(row.energy),
                        _fmt(row.co2_kg),
                        _fmt(_row_price(report, row.company)),
                    ]
                )
            )
        for t in report.trades:
            trades_lines.append(
                ",".join(
                    [
                        str(t.year),
                        t.seller,
                        t.buyer,
                        _fmt(t.quantity),
                        _fmt(t.price),
                        _fmt(t.seller_allowances),
                        _fmt(t.buyer_allowances),
                    ]
                )
            )
        summary_lines.append(
            ",".join(
                [
                    str(report.year),
                    _fmt(report.total_flops),
                    _fmt(report.total_allowances),
                    _fmt(sum(r.energy for r in report.rows)),
                    _fmt(sum(r.co2_kg for r in report.rows)),
                    _fmt(sum(r.penalty for r in report.rows)),
                    _fmt(report.clearing_price),
                    _fmt(report.unmatched_net),
                    _fmt(report.benchmark),
                ]
            )
        )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "years.csv", manifest, YEARS_HEADER, years_lines)
    _write_csv(out / "trades.csv", manifest, TRADES_HEADER, trades_lines)
    _write_csv(out / "summary.csv", manifest, SUMMARY_HEADER, summary_lines)
    print(f"wrote {out / 'years.csv'}, {out / 'trades.csv'}, {out / 'summary.csv'}")
    return EXIT_OK


def _sweep_for_figure(
    figure: str,
    k: float,
    b: float,
    grid_min: float | None,
    grid_max: float | None,
    grid_points: int,
):
    def grid(default_lo, default_hi, anchors):
        lo = default_lo if grid_min is None else grid_min
        hi = default_hi if grid_max is None else grid_max
        return simulation.default_grid(lo, hi, grid_points, anchors=anchors)

    if figure == "fig1a":
        return simulation.sweep_flop_usage(
            a_grid=grid(1e-3, 1e-1, (0.01,)), price_mode="fixed", k=k, b=b
        )
    if figure == "fig1b":
        return simulation.sweep_flop_usage(
            a_grid=grid(1e-3, 1e-1, (0.01,)), price_mode="sqrt_a", k=k, b=b
        )
    if figure == "fig2a":
        crossover = equilibrium.breakeven_allowance(k, 0.01, b)
        return simulation.sweep_utility(
            variant="vary_F", k=k, a=0.01, b=b, grid=grid(0.5, 20.0, (crossover,))
        )
    if figure == "fig2b":
        return simulation.sweep_utility(
            variant="vary_a", k=k, b=b, flops_allowed=10.0, grid=grid(1e-3, 1e-1, (0.01,))
        )
    raise ValidationError("figure", f"figure must be one of {FIGURES}, got {figure!r}")


def cmd_sweep(
    figure: str,
    out_dir: str,
    k: float = 1.0,
    b: float = 0.01,
    grid_min: float | None = None,
    grid_max: float | None = None,
    grid_points: int = 50,
) -> int:
    """Write one figure dataset CSV; fig2a also carries a crossover marker."""
    result = _sweep_for_figure(figure, k, b, grid_min, grid_max, grid_points)
    manifest = RunManifest(
        scenario_path="",
        command="sweep",
        out_dir=str(out_dir),
        tool_version=__version__,
        config_hash=config_hash(
            {
                "figure": figure,
                "k": k,
                "b": b,
                "grid_min": grid_min,
                "grid_max": grid_max,
                "grid_points": grid_points,
            }
        ),
    )
    lines = [
        ",".join(
            [_fmt(r.axis_value), _fmt(r.x_base), _fmt(r.x_ct), _fmt(r.u_base), _fmt(r.u_ct), _fmt(r.b)]
        )
        for r in result.rows
    ]
    extra = []
    if result.crossover is not None:
        extra.append(f"# crossover axis_value={_fmt(result.crossover)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{figure}.csv"
    _write_csv(path, manifest, FIG_HEADER, lines, extra_comments=extra)
    print(f"wrote {path}")
    return EXIT_OK


@dataclass(frozen=True)
class VerifyReport:
    samples: int
    worst_oracle_rel: float
    worst_kkt: float
    worst_gradient_rel: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_solvers(
    sample_size: int,
    seed: int = 42,
    oracle_rel_tol: float = 1e-5,
    kkt_tol: float = 1e-9,
    gradient_rel_tol: float = 1e-4,
    gradient_points: int = 100,
    _cap_solver=None,
    _base_solver=None,
) -> VerifyReport:
    """Cross-check the closed forms against the grid oracle on random draws.

    Draws k uniform in [0.25, 4] and a, b log-uniform in [1e-4, 1]. The
    ``_cap_solver``/``_base_solver`` hooks exist so tests can inject a
    corrupted solver as a negative control.
    """
    if sample_size < 1:
        raise ValidationError("sample_size", "sample_size must be >= 1")
    cap_solver = _cap_solver or equilibrium.solve_cap_and_trade
    base_solver = _base_solver or equilibrium.solve_no_governance
    rng = np.random.default_rng(seed)
    worst_oracle = 0.0
    worst_kkt = 0.0
    failures: list[str] = []

    for _ in range(sample_size):
        k = rng.uniform(0.25, 4.0)
        a = 10.0 ** rng.uniform(-4.0, 0.0)
        b = 10.0 ** rng.uniform(-4.0, 0.0)
        flops_allowed = rng.uniform(0.0, 20.0)

        base = base_solver(k, a)
        oracle_base = equilibrium.grid_oracle(k, a, mode="no_governance")
        rel = abs(base.x_star - oracle_base.x_star) / base.x_star
        worst_oracle = max(worst_oracle, rel)
        if rel >= oracle_rel_tol and len(failures) < 5:
            failures.append(
                f"oracle mismatch (no_governance): k={k!r} a={a!r} rel={rel:.3e}"
            )

        ct = cap_solver(k, a, b, flops_allowed)
        oracle_ct = equilibrium.grid_oracle(
            k, a, b=b, flops_allowed=flops_allowed, mode="cap_and_trade"
        )
        rel = abs(ct.x_star - oracle_ct.x_star) / ct.x_star
        worst_oracle = max(worst_oracle, rel)
        if rel >= oracle_rel_tol and len(failures) < 5:
            failures.append(
                f"oracle mismatch (cap_and_trade): k={k!r} a={a!r} b={b!r} "
                f"F={flops_allowed!r} rel={rel:.3e}"
            )

        residuals = equilibrium.kkt_residuals(ct, k, a, b, flops_allowed)
        worst_kkt = max(worst_kkt, residuals.max_residual)
        if residuals.max_residual >= kkt_tol and len(failures) < 5:
            failures.append(
                f"kkt residual {residuals.max_residual:.3e}: k={k!r} a={a!r} b={b!r} "
                f"F={flops_allowed!r}"
            )

    worst_grad = 0.0
    h = 1e-6
    for _ in range(gradient_points):
        k = rng.uniform(0.25, 4.0)
        a = 10.0 ** rng.uniform(-4.0, 0.0)
        b = 10.0 ** rng.uniform(-4.0, 0.0)
        x = 10.0 ** rng.uniform(math.log10(0.3), math.log10(30.0))
        y = rng.uniform(-10.0, 10.0)
        gx, gy = equilibrium.utility_gradient(x, y, k, a, b)
        fd_x = (
            equilibrium.utility_cap_and_trade(x + h, y, k, a, b)
            - equilibrium.utility_cap_and_trade(x - h, y, k, a, b)
        ) / (2 * h)
        fd_y = (
            equilibrium.utility_cap_and_trade(x, y + h, k, a, b)
            - equilibrium.utility_cap_and_trade(x, y - h, k, a, b)
        ) / (2 * h)
        rel_x = abs(gx - fd_x) / max(abs(fd_x), 1e-12)
        rel_y = abs(gy - fd_y) / max(abs(fd_y), 1e-12)
        worst_grad = max(worst_grad, rel_x, rel_y)
        if max(rel_x, rel_y) >= gradient_rel_tol and len(failures) < 5:
            failures.append(
                f"gradient mismatch: x={x!r} y={y!r} k={k!r} a={a!r} b={b!r}"
            )

    return VerifyReport(
        samples=sample_size,
        worst_oracle_rel=worst_oracle,
        worst_kkt=worst_kkt,
        worst_gradient_rel=worst_grad,
        failures=tuple(failures),
    )


def cmd_verify(sample_size: int, seed: int = 42, **hooks) -> int:
    """Run the verification suite, print worst-case residuals, set exit code."""
    report = verify_solvers(sample_size, seed, **hooks)
    print(f"samples: {report.samples} (seed {seed})")
    print(f"worst oracle relative x* discrepancy: {report.worst_oracle_rel:.3e}")
    print(f"worst KKT residual: {report.worst_kkt:.3e}")
    print(f"worst gradient relative error: {report.worst_gradient_rel:.3e}")
    if not report.ok:
        print(f"verify: FAIL ({report.failures[0]})")
        return EXIT_VERIFY
    print("verify: PASS")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flopcap",
        description="Compute cap-and-trade market simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario and write report CSVs")
    run_p.add_argument("--scenario", required=True, help="scenario JSON path")
    run_p.add_argument("--out", required=True, help="output directory")

    sweep_p = sub.add_parser("sweep", help="write a figure dataset CSV")
    sweep_p.add_argument("--figure", required=True, choices=FIGURES)
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--k", type=float, default=1.0, help="loss exponent (default 1)")
    sweep_p.add_argument("--b", type=float, default=0.01, help="trade price (default 0.01)")
    sweep_p.add_argument("--grid-min", type=float, default=None)
    sweep_p.add_argument("--grid-max", type=float, default=None)
    sweep_p.add_argument("--grid-points", type=int, default=50)

    verify_p = sub.add_parser("verify", help="run solver verification checks")
    verify_p.add_argument("--sample", type=int, default=1000)
    verify_p.add_argument("--seed", type=int, default=42)

    return parser


def _error_line(kind: str, exit_code: int, message: str, field: str | None = None) -> str:
    payload: dict[str, object] = {"error": kind, "exit": exit_code, "message": message}
    if field:
        payload["field"] = field
    return json.dumps(payload, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.scenario, args.out)
        if args.command == "sweep":
            return cmd_sweep(
                args.figure,
                args.out,
                k=args.k,
                b=args.b,
                grid_min=args.grid_min,
                grid_max=args.grid_max,
                grid_points=args.grid_points,
            )
        if args.command == "verify":
            return cmd_verify(args.sample, args.seed)
        raise ValidationError("command", f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(_error_line("validation", EXIT_VALIDATION, str(exc), exc.field), file=sys.stderr)
        return EXIT_VALIDATION
    except ClearingError as exc:
        print(_error_line("clearing", EXIT_CLEARING, str(exc)), file=sys.stderr)
        return EXIT_CLEARING
    except OSError as exc:
        print(_error_line("io", EXIT_IO, str(exc)), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
