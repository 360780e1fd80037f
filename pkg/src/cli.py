"""Command-line entry point: ``python cli.py <command>`` from inside ``src``.

Exit codes: 0 every check passed, 1 a check failed, 2 usage error,
3 toolkit or internal error.
"""

import logging
import sys

import click

from config import DEFAULT_ROUNDS, SUITES, load_config
from errors import ToolkitError
from report import render
from suites import build_report

log = logging.getLogger(__name__)

EXIT_FAIL = 1
EXIT_ERROR = 3


OUTPUT_OPTIONS = (
    click.option("--seed", type=int, default=None, help="Root seed (default: $DFS_HARDY_SEED or the built-in seed)."),
    click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout."),
    click.option("--timings", is_flag=True, help="Include wall time per section (makes output run-dependent)."),
)


def output_options(func):
    """--seed, --format, --out and --timings, shared by every command."""
    for option in reversed(OUTPUT_OPTIONS):
        func = option(func)
    return func


def _emit(ctx, suites, overrides, fmt, out, timings, **options):
    cfg = load_config().with_overrides(**overrides)
    try:
        report = build_report(cfg, suites, **options)
    except ToolkitError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_ERROR)
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        ctx.exit(EXIT_ERROR)

    text = render(report, fmt, timings)
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            click.echo(f"error: cannot write {out}: {exc}", err=True)
            ctx.exit(EXIT_ERROR)
    else:
        click.echo(text)
    ctx.exit(0 if report.passed else EXIT_FAIL)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging on stderr.")
def cli(verbose):
    """Verification toolkit for the decoherence-free Hardy-type argument."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


@cli.command("verify-correlations")
@click.option("--rotations", type=click.IntRange(min=0), default=None, help="Haar rotation tuples (default 100).")
@click.option("--tol", type=click.FloatRange(min=0), default=None, help="Tolerance of the exact checks (default 1e-10).")
@output_options
@click.pass_context
def verify_correlations(ctx, rotations, tol, seed, fmt, out, timings):
    """The four probabilities of the argument, exactly and under random rotations."""
    _emit(ctx, ["correlations"], {"seed": seed, "rotations": rotations, "tolerance": tol}, fmt, out, timings)


@cli.command("simulate")
@click.option("--rounds", type=click.IntRange(min=1), default=DEFAULT_ROUNDS, show_default=True)
@click.option("--rotate-each-round", is_flag=True, help="Fresh Haar rotation of every setup in every round.")
@output_options
@click.pass_context
def simulate(ctx, rounds, rotate_each_round, seed, fmt, out, timings):
    """Monte-Carlo run of the experiment with single-qubit spin measurements."""
    _emit(ctx, ["simulate"], {"seed": seed}, fmt, out, timings, rounds=rounds, rotate_each_round=rotate_each_round)


@cli.command("verify-decoherence")
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Collective unitaries per state (default 1000).")
@output_options
@click.pass_context
def verify_decoherence(ctx, samples, seed, fmt, out, timings):
    """Immunity of the DFS states and fragility of reference states."""
    _emit(ctx, ["decoherence"], {"seed": seed, "decoherence_samples": samples}, fmt, out, timings)


@cli.command("verify-distinguish")
@click.option("--grid", type=click.IntRange(min=100), default=None, help="Points per angle (default 200).")
@click.option("--refine", type=click.FloatRange(min=0, min_open=True), default=None, help="Refinement cost tolerance (default 1e-12).")
@output_options
@click.pass_context
def verify_distinguish(ctx, grid, refine, seed, fmt, out, timings):
    """Which omega admit a fixed product basis that separates the pair."""
    _emit(ctx, ["distinguish"], {"seed": seed, "grid": grid, "refine_tol": refine}, fmt, out, timings)


@cli.command("optimize-hardy")
@click.option("--free-angles", is_flag=True, help="Optimize both measurement angles instead of fixing the second observable to G.")
@click.option("--starts", type=click.IntRange(min=1), default=None, help="Multi-starts (default 64).")
@output_options
@click.pass_context
def optimize_hardy(ctx, free_angles, starts, seed, fmt, out, timings):
    """Maximal Hardy probability: 9/112 with F and G fixed, ((sqrt5-1)/2)^5 with free angles."""
    _emit(
        ctx,
        ["hardy"],
        {"seed": seed, "starts": starts},
        fmt,
        out,
        timings,
        free_angles=free_angles,
        constrained=not free_angles,
    )


@cli.command("lhv-check")
@output_options
@click.pass_context
def lhv_check(ctx, seed, fmt, out, timings):
    """Exact infeasibility of a local hidden-variable model, with its certificate."""
    _emit(ctx, ["lhv"], {"seed": seed}, fmt, out, timings)


@cli.command("report-all")
@output_options
@click.pass_context
def report_all(ctx, seed, fmt, out, timings):
    """Every suite, in fixed order, with one overall verdict."""
    _emit(ctx, list(SUITES), {"seed": seed}, fmt, out, timings)


if __name__ == "__main__":
    cli()
