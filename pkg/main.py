"""
quasimicro command line

Simulate synthetic markets, fit tails, GARCH and log-periodic models to CSV
series, run the acceptance suite and render saved JSON reports.

Usage Examples:
    uv run main.py simulate wiener --mu 0 --h 0 --p0 5 --n 4 --dt 1 --seed 0
    uv run main.py simulate ecology --delta 1 --n 1000000 --seed 7 | uv run main.py fit tail - --tail-fraction 0.01
    uv run main.py fit jls fixtures/jls_noiseless.csv --tc-min 96 --tc-max 105 --tc-points 10
    uv run main.py verify --seed 0 --out report.json
    uv run main.py report report.json
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np
from loguru import logger
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from core import ConvergenceError, LabError, PriceSeries, RandomSource, ReturnSeries, log_returns
from estimate import (
    GarchSpec,
    JlsSearch,
    garch_fit,
    garch_simulate,
    hill_tail_exponent,
    jls_fit,
    regime_slopes,
)
from records import (
    MODEL_REFS,
    VERSION,
    MalformedInputError,
    RunDocument,
    SeriesTable,
    load_config_file,
    read_series_csv,
    sidecar_path,
    to_jsonable,
    write_document,
    write_series_csv,
)
from simulate import (
    ConstantHazard,
    FundEcology,
    HazardParams,
    ImpactTickParams,
    JlsPathConfig,
    KinematicConfig,
    TwoPopulationConfig,
    WienerConfig,
    crossover_displacement,
    crossover_time,
    fund_ecology_volumes,
    impact_tick_stream,
    jls_path,
    kinematic_draws,
    relative_transaction_cost,
    tail_exponent_relations,
    two_population_ticks,
    wiener_path,
)
from verify import format_records, run_checks


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4

ACCENT = "#d7875f"
MUTED = "#8a8a8a"
GOOD = "#87af5f"
BAD = "#d75f5f"
PANEL = "#5f87af"

LOG_LEVELS = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]
UINT64 = click.IntRange(0, 2**64 - 1)


@dataclass
class RunConfig:
    """Everything that determines one invocation; echoed into every artifact."""

    seed: int = 0
    threads: int = 1
    format: str = "csv"
    out: str | None = None
    command: str = ""
    params: dict[str, Any] = field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        payload = asdict(self)
        payload.pop("out")
        return payload

    def stream(self, name: str) -> RandomSource:
        return RandomSource.for_operation(self.seed, name)


def fail(message: str, code: int) -> None:
    """Print a CLI error and exit with the mapped status code."""
    click.echo(f"Error: {message}", err=True)
    raise SystemExit(code)


def configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level, format="{time:HH:mm:ss} | {level: <8} | {message}")


class LabGroup(click.Group):
    """Command group that maps failures onto the documented exit codes."""

    def main(self, args=None, prog_name=None, **extra):
        extra.pop("standalone_mode", None)
        try:
            result = super().main(args=args, prog_name=prog_name, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            fail("aborted", EXIT_USAGE)
        except click.FileError as error:
            fail(error.format_message(), EXIT_IO)
        except click.UsageError as error:
            error.show()
            raise SystemExit(EXIT_USAGE) from error
        except click.ClickException as error:
            error.show()
            raise SystemExit(error.exit_code) from error
        except (OSError, MalformedInputError, json.JSONDecodeError) as error:
            fail(str(error), EXIT_IO)
        except LabError as error:
            fail(f"{type(error).__name__}: {error}", EXIT_DOMAIN)
        raise SystemExit(result if isinstance(result, int) else EXIT_OK)


def load_config(ctx: click.Context, _param: click.Parameter, value: str | None) -> str | None:
    if value is not None:
        defaults = load_config_file(value)
        ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def run_options(func: Callable) -> Callable:
    """Per-command overrides of the group-wide run settings."""

    func = click.option("--seed", type=UINT64, default=None, help="Master seed (overrides the group seed).")(func)
    func = click.option("--threads", type=click.IntRange(1, 256), default=None, help="Worker threads for batch runs.")(func)
    func = click.option("--out", type=str, default=None, help="Output file; stdout when omitted or '-'.")(func)
    return func


def resolve_run(
    ctx: click.Context, command: str, params: dict[str, Any], fmt: str | None = None
) -> RunConfig:
    base: RunConfig = ctx.find_root().obj
    seed = params.pop("seed", None)
    threads = params.pop("threads", None)
    out = params.pop("out", None)
    return RunConfig(
        seed=base.seed if seed is None else seed,
        threads=base.threads if threads is None else threads,
        format=fmt or base.format,
        out=None if out in (None, "-") else out,
        command=command,
        params=params,
    )


def emit_series(run: RunConfig, table: SeriesTable, results: dict[str, Any], kind: str) -> None:
    """Write a simulated series as CSV plus metadata, or as one JSON document."""

    results = {"model_ref": MODEL_REFS[kind], **results}
    if run.format == "json":
        results["series"] = table.to_frame().to_dict(orient="list")
        write_document(RunDocument(seed=run.seed, config=run.echo(), results=results), run.out)
        return

    document = RunDocument(seed=run.seed, config=run.echo(), results=results)
    write_series_csv(table, run.out)
    if run.out is None:
        click.echo(document.to_json(), err=True)
    else:
        write_document(document, sidecar_path(run.out))


def emit_fit(run: RunConfig, results: dict[str, Any], kind: str) -> None:
    results = {"model_ref": MODEL_REFS[kind], **results}
    write_document(RunDocument(seed=run.seed, config=run.echo(), results=results), run.out)


@click.group(cls=LabGroup, context_settings={"help_option_names": ["--help"]})
@click.option(
    "--config",
    type=str,
    is_eager=True,
    expose_value=False,
    callback=load_config,
    help="key = value file supplying option defaults (flags win).",
)
@click.option("--seed", type=UINT64, default=0, show_default=True, help="Master seed for every stream.")
@click.option("--threads", type=click.IntRange(1, 256), default=1, show_default=True, help="Worker threads.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
    help="Output format for simulated series.",
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    show_default=True,
    help="Diagnostics threshold on stderr.",
)
@click.version_option(VERSION, prog_name="quasimicro")
@click.pass_context
def cli(ctx: click.Context, seed: int, threads: int, fmt: str, log_level: str) -> None:
    """
    Numerical laboratory for quasi-microstructure market models.

    Examples:

    \b
    uv run main.py simulate twopop --p 0.9 --ds1 1 --n 10 --seed 1

    \b
    uv run main.py verify --seed 0
    """

    configure_logging(log_level.upper())
    ctx.obj = RunConfig(seed=seed, threads=threads, format=fmt)


@cli.group(context_settings={"help_option_names": ["--help"]})
def simulate() -> None:
    """Generate synthetic series; CSV on stdout, metadata on stderr or a sidecar."""


def format_option(func: Callable) -> Callable:
    return click.option(
        "--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="csv (default) or json."
    )(func)


@simulate.command("wiener")
@click.option("--mu", type=float, default=0.0, show_default=True, help="Drift rate mu0.")
@click.option("--h", "h0", type=click.FloatRange(min=0), default=0.04, show_default=True, help="Variance rate h0.")
@click.option("--p0", type=float, default=1.0, show_default=True, help="Initial price.")
@click.option("--n", type=click.IntRange(min=1), default=250, show_default=True, help="Number of steps.")
@click.option("--dt", type=float, default=1.0, show_default=True, help="Step length.")
@run_options
@format_option
@click.pass_context
def simulate_wiener(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Geometric Brownian price path, exact in log space."""

    run = resolve_run(ctx, "simulate wiener", params, fmt)
    p = run.params
    series = wiener_path(
        WienerConfig(mu0=p["mu"], h0=p["h0"], p0=p["p0"], n=p["n"], dt=p["dt"]), run.stream("wiener_path")
    )
    emit_series(run, SeriesTable(series.times, series.prices, "price"), {"points": len(series)}, "wiener")


@simulate.command("jls")
@click.option("--b-prime", type=float, default=0.02, show_default=True, help="Hazard power-law amplitude.")
@click.option("--c-prime", type=float, default=0.01, show_default=True, help="Hazard oscillation amplitude.")
@click.option("--m", type=float, default=0.5, show_default=True, help="Exponent in (0, 1).")
@click.option("--omega", type=float, default=8.0, show_default=True, help="Log-frequency.")
@click.option("--phi", type=float, default=0.0, show_default=True, help="Hazard phase.")
@click.option("--t-c", type=float, default=100.0, show_default=True, help="Critical time.")
@click.option("--clamp", is_flag=True, help="Clip negative hazard values instead of rejecting |C'| > B'.")
@click.option("--constant-hazard", type=click.FloatRange(min=0), default=None, help="Use a flat hazard instead.")
@click.option("--k", type=float, default=0.2, show_default=True, help="Crash size as a price fraction.")
@click.option("--sigma", type=click.FloatRange(min=0), default=0.01, show_default=True, help="Diffusion volatility.")
@click.option("--p0", type=float, default=1.0, show_default=True, help="Initial price.")
@click.option("--n", type=click.IntRange(min=1), default=95, show_default=True, help="Number of steps.")
@click.option("--dt", type=float, default=1.0, show_default=True, help="Step length.")
@run_options
@format_option
@click.pass_context
def simulate_jls(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Price path with a single log-periodic crash draw."""

    run = resolve_run(ctx, "simulate jls", params, fmt)
    p = run.params
    if p["constant_hazard"] is not None:
        hazard = ConstantHazard(p["constant_hazard"])
    else:
        hazard = HazardParams(
            b_prime=p["b_prime"],
            c_prime=p["c_prime"],
            m=p["m"],
            omega=p["omega"],
            phi_prime=p["phi"],
            t_c=p["t_c"],
            clamp=p["clamp"],
        )
    cfg = JlsPathConfig(hazard=hazard, k=p["k"], sigma=p["sigma"], p0=p["p0"], n=p["n"], dt=p["dt"])
    path = jls_path(cfg, run.stream("jls_path"))
    emit_series(
        run,
        SeriesTable(path.series.times, path.series.prices, "price"),
        {"crash_time": path.crash_time, "crashed": path.crash_time is not None},
        "jls",
    )


@simulate.command("ticks")
@click.option("--p", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.5, show_default=True, help="Probability of the dS1 move.")
@click.option("--ds1", type=float, default=1.0, show_default=True, help="Regular-regime move dS1.")
@click.option("--pa", type=click.FloatRange(0, 1, max_open=True), default=0.0, show_default=True, help="Big-player probability.")
@click.option("--pb", type=click.FloatRange(0, 1, max_open=True), default=0.0, show_default=True, help="Compositional probability.")
@click.option("--ds3", type=float, default=None, help="Move in the big-player regimes.")
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True, help="Number of ticks.")
@run_options
@format_option
@click.pass_context
def simulate_ticks(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Mixed-regime ticks with dS2 solved from the martingale condition."""

    run = resolve_run(ctx, "simulate ticks", params, fmt)
    p = run.params
    tick_params = ImpactTickParams.martingale(p["p"], p["ds1"], pA=p["pa"], pB=p["pb"], dS3=p["ds3"])
    stream = impact_tick_stream(tick_params, p["n"], run.stream("impact_tick_stream"))
    table = SeriesTable(
        np.arange(1, len(stream) + 1, dtype=np.float64),
        stream.moves,
        "value",
        extra={"regime": np.array(stream.labels)},
    )
    emit_series(run, table, {"dS2": tick_params.dS2, "regular_mean": tick_params.regular_mean}, "ticks")


@simulate.command("ecology")
@click.option("--delta", type=float, default=1.0, show_default=True, help="Volume exponent V = S**delta.")
@click.option("--s-min", type=float, default=1.0, show_default=True, help="Smallest fund size.")
@click.option("--s-max", type=float, default=None, help="Largest fund size [default: 1e6 * s-min].")
@click.option("--n", type=click.IntRange(min=1), default=100_000, show_default=True, help="Number of trades.")
@run_options
@format_option
@click.pass_context
def simulate_ecology(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Trade volumes from a Zipf fund population."""

    run = resolve_run(ctx, "simulate ecology", params, fmt)
    p = run.params
    eco = FundEcology(delta=p["delta"], s_min=p["s_min"], s_max=p["s_max"])
    volumes = fund_ecology_volumes(eco, p["n"], run.stream("fund_ecology_volumes"))
    sizes = np.array([eco.s_min, eco.s_max])
    emit_series(
        run,
        SeriesTable(np.arange(1, volumes.size + 1, dtype=np.float64), volumes),
        {
            "s_max": eco.s_max,
            "sampling_exponent": eco.sampling_exponent,
            "relative_cost_at_support_ends": relative_transaction_cost(eco, sizes),
            "implied_exponents": tail_exponent_relations(1.5),
        },
        "ecology",
    )


@simulate.command("kinematic")
@click.option("--v0", type=click.FloatRange(min=0), default=1.0, show_default=True, help="Initial velocity.")
@click.option("--accel", type=click.FloatRange(min=0), default=4.0, show_default=True, help="Acceleration.")
@click.option("--dt-max", type=float, default=2.0, show_default=True, help="Largest interval.")
@click.option("--n", type=click.IntRange(min=1), default=100_000, show_default=True, help="Number of draws.")
@run_options
@format_option
@click.pass_context
def simulate_kinematic(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Displacements over uniform intervals; column t holds the interval."""

    run = resolve_run(ctx, "simulate kinematic", params, fmt)
    p = run.params
    cfg = KinematicConfig(v0=p["v0"], accel=p["accel"], dt_max=p["dt_max"], n=p["n"])
    intervals, moves = kinematic_draws(cfg, run.stream("kinematic_displacements"))
    emit_series(
        run,
        SeriesTable(intervals, moves),
        {"crossover_time": crossover_time(cfg), "crossover_displacement": crossover_displacement(cfg)},
        "kinematic",
    )


@simulate.command("twopop")
@click.option("--p", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.9, show_default=True, help="Informed probability.")
@click.option("--ds1", type=float, default=1.0, show_default=True, help="Informed move.")
@click.option("--n", type=click.IntRange(min=1), default=100_000, show_default=True, help="Number of ticks.")
@run_options
@format_option
@click.pass_context
def simulate_twopop(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """Informed and noise ticks with the volatility decomposition."""

    run = resolve_run(ctx, "simulate twopop", params, fmt)
    p = run.params
    result = two_population_ticks(TwoPopulationConfig(p=p["p"], dS1=p["ds1"], n=p["n"]), run.stream("two_population_ticks"))
    split = result.decomposition
    emit_series(
        run,
        SeriesTable(np.arange(1, result.ticks.size + 1, dtype=np.float64), result.ticks),
        {
            "sigma1_sq": split.sigma1_sq,
            "sigma2_sq": split.sigma2_sq,
            "sigma_sq": split.sigma_sq,
            "ratio": split.ratio,
            "sample_variance": result.sample_variance,
        },
        "twopop",
    )


@simulate.command("garch")
@click.option("--omega", type=click.FloatRange(min=0), default=0.1, show_default=True, help="Variance intercept.")
@click.option("--alpha", type=click.FloatRange(min=0), multiple=True, default=(0.1,), show_default=True, help="ARCH coefficient; repeat for higher orders.")
@click.option("--beta", type=click.FloatRange(min=0), multiple=True, default=(0.8,), show_default=True, help="GARCH coefficient; repeat for higher orders.")
@click.option("--mu", type=float, default=0.0, show_default=True, help="Mean return.")
@click.option("--n", type=click.IntRange(min=1), default=10_000, show_default=True, help="Number of returns.")
@click.option("--zero-innovations", is_flag=True, help="Draw no shocks, so only the variance recursion moves.")
@run_options
@format_option
@click.pass_context
def simulate_garch(ctx: click.Context, fmt: str | None, **params: Any) -> None:
    """GARCH(p, q) returns and conditional variances, seeded at the unconditional variance."""

    run = resolve_run(ctx, "simulate garch", params, fmt)
    p = run.params
    spec = GarchSpec(omega=p["omega"], alpha=tuple(p["alpha"]), beta=tuple(p["beta"]), mu=p["mu"])
    returns = garch_simulate(
        spec, p["n"], run.stream("garch_simulate"), zero_innovations=p["zero_innovations"]
    )
    emit_series(
        run,
        SeriesTable(returns.times, returns.returns, extra={"variance": returns.variances}),
        {"unconditional_variance": spec.unconditional_variance, "persistence": spec.persistence},
        "garch",
    )


@cli.group(context_settings={"help_option_names": ["--help"]})
def fit() -> None:
    """Fit models to a t,price or t,value CSV ('-' reads stdin); JSON on stdout."""


def read_input(source: str) -> tuple[SeriesTable, PriceSeries | None]:
    table = read_series_csv(source)
    if table.column != "price":
        return table, None
    return table, PriceSeries(times=table.times, prices=table.values)


@fit.command("tail")
@click.argument("source")
@click.option("--tail-fraction", type=click.FloatRange(0, 0.5, min_open=True), default=0.05, show_default=True, help="Share of largest samples used.")
@run_options
@click.pass_context
def fit_tail(ctx: click.Context, source: str, **params: Any) -> None:
    """Hill estimate of the tail exponent of the value column."""

    run = resolve_run(ctx, "fit tail", {"source": source, **params}, "json")
    table, _ = read_input(source)
    estimate = hill_tail_exponent(table.values, run.params["tail_fraction"])
    emit_fit(run, {"tail": estimate}, "tail")


@fit.command("garch")
@click.argument("source")
@click.option("--max-iterations", type=click.IntRange(min=1), default=1000, show_default=True, help="BFGS iterations per start.")
@run_options
@click.pass_context
def fit_garch(ctx: click.Context, source: str, **params: Any) -> None:
    """GARCH(1,1) maximum likelihood; prices are turned into log-returns first."""

    run = resolve_run(ctx, "fit garch", {"source": source, **params}, "json")
    table, series = read_input(source)
    returns = log_returns(series, series.spacing) if series is not None else ReturnSeries(
        times=table.times, returns=table.values, dt=1.0
    )
    try:
        result = garch_fit(returns, max_iterations=run.params["max_iterations"])
    except ConvergenceError as error:
        if error.best is not None:
            emit_fit(run, {"garch": error.best}, "garch")
        raise
    emit_fit(run, {"garch": result, "persistence": result.persistence}, "garch")


@fit.command("jls")
@click.argument("source")
@click.option("--tc-min", type=float, default=None, help="Lowest critical time [default: 2% of the span past the end].")
@click.option("--tc-max", type=float, default=None, help="Highest critical time [default: 50% of the span past the end].")
@click.option("--tc-points", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--m-min", type=float, default=0.05, show_default=True)
@click.option("--m-max", type=float, default=0.95, show_default=True)
@click.option("--m-points", type=click.IntRange(min=1), default=15, show_default=True)
@click.option("--omega-min", type=float, default=2.0, show_default=True)
@click.option("--omega-max", type=float, default=20.0, show_default=True)
@click.option("--omega-points", type=click.IntRange(min=1), default=30, show_default=True)
@run_options
@click.pass_context
def fit_jls(ctx: click.Context, source: str, **params: Any) -> None:
    """Log-periodic crash fit of ln(price) by grid search and local polish."""

    run = resolve_run(ctx, "fit jls", {"source": source, **params}, "json")
    p = run.params
    _, series = read_input(source)
    if series is None:
        raise MalformedInputError(f"{source}: log-periodic fits need a t,price file")
    default = JlsSearch.around(series, p["tc_points"])
    search = JlsSearch(
        t_c=(
            default.t_c[0] if p["tc_min"] is None else p["tc_min"],
            default.t_c[1] if p["tc_max"] is None else p["tc_max"],
            p["tc_points"],
        ),
        m=(p["m_min"], p["m_max"], p["m_points"]),
        omega=(p["omega_min"], p["omega_max"], p["omega_points"]),
    )
    result = jls_fit(series, search, threads=run.threads)
    emit_fit(run, {"jls": result}, "jls")


@fit.command("regimes")
@click.argument("source")
@click.option("--breakpoint", "breakpoints", type=float, multiple=True, help="Segment boundary; repeat in increasing order.")
@run_options
@click.pass_context
def fit_regimes(ctx: click.Context, source: str, **params: Any) -> None:
    """Log-log density slopes of the value column per segment."""

    run = resolve_run(ctx, "fit regimes", {"source": source, **params}, "json")
    table, _ = read_input(source)
    slopes = regime_slopes(table.values, run.params["breakpoints"])
    emit_fit(run, {"regimes": slopes, "exponents": slopes.exponents}, "regimes")


@cli.command("verify")
@click.option("--check", "checks", multiple=True, help="Run only the named check group; repeatable.")
@run_options
@click.pass_context
def verify_command(ctx: click.Context, checks: tuple[str, ...], **params: Any) -> int:
    """Run the acceptance suite; exits 4 when any check fails."""

    run = resolve_run(ctx, "verify", {"checks": list(checks), **params}, "json")
    report = run_checks(run.seed, threads=run.threads, only=checks)
    if not report.records:
        raise click.UsageError(f"no check named {', '.join(checks)}")
    document = RunDocument(seed=run.seed, config=run.echo(), results=report.to_dict())
    write_document(document, run.out)
    if not report.passed:
        failed = [record for record in report.records if not record.passed]
        click.echo("Verification failed:", err=True)
        click.echo(format_records(failed), err=True)
        return EXIT_VERIFY
    return EXIT_OK


def create_header(document: dict[str, Any], path: str) -> Panel:
    heading = Text()
    heading.append("quasimicro", style=f"bold {ACCENT}")
    heading.append("  ")
    heading.append(Path(path).name)
    heading.append("\n")
    heading.append(f"version {document.get('version', '?')}", style=f"dim {MUTED}")
    heading.append("  ")
    heading.append(f"seed {document.get('seed', '?')}", style=f"dim {MUTED}")
    command = (document.get("config") or {}).get("command")
    if command:
        heading.append("  ")
        heading.append(command, style=f"dim {MUTED}")
    return Panel.fit(heading, border_style=PANEL, box=box.SQUARE, padding=(0, 1))


def create_checks_table(records: list[dict[str, Any]]) -> Table:
    table = Table(box=box.SIMPLE_HEAD, header_style=f"bold {ACCENT}")
    for column in ("check", "target", "measured", "tolerance", "status", "seconds"):
        table.add_column(column, justify="left" if column == "check" else "right")
    for record in records:
        status = f"[{GOOD}]pass[/]" if record["passed"] else f"[{BAD}]FAIL[/]"
        table.add_row(
            record["name"],
            format_value(record["target"]),
            format_value(record["measured"]),
            format_value(record["tolerance"]),
            status,
            f"{record.get('wall_time') or 0:.2f}",
        )
    return table


def format_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return f"[{len(value)} values]" if len(value) > 6 else ", ".join(format_value(v) for v in value)
    return str(value)


def flatten(payload: dict[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    rows = []
    for key, value in sorted(payload.items()):
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(flatten(value, f"{name}."))
        else:
            rows.append((name, value))
    return rows


def create_results_table(results: dict[str, Any]) -> Table:
    table = Table.grid(padding=(0, 2))
    table.add_column(style=f"dim {MUTED}", justify="right")
    table.add_column()
    for name, value in flatten(results):
        table.add_row(name, format_value(value))
    return table


@cli.command("report")
@click.argument("path")
def report_command(path: str) -> int:
    """Render a saved simulate, fit or verify JSON document."""

    document = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(document, dict) or "results" not in document:
        raise MalformedInputError(f"{path}: not a run document")
    console = Console()
    console.print(create_header(document, path))
    results = document["results"]
    if isinstance(results, dict) and isinstance(results.get("records"), list):
        passed = results.get("passed")
        title = f"[{GOOD}]all checks passed[/]" if passed else f"[{BAD}]checks failed[/]"
        console.print(Panel(create_checks_table(results["records"]), title=title, border_style=PANEL, box=box.SQUARE))
        return EXIT_OK
    console.print(Panel(create_results_table(to_jsonable(results)), title="[bold]results[/bold]", border_style=PANEL, box=box.SQUARE))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="quasimicro")
    except SystemExit as exit_:
        return int(exit_.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
