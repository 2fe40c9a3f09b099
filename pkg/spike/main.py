#!/usr/bin/env python3
"""Entry point for SPIKE experiments: solver runs, error tables, sweeps and FV references."""
import logging
import sys
from typing import Any, Dict, Optional

import click
from dotenv import load_dotenv

# Set up logging
logging.basicConfig(
    level=logging.ERROR,
    format='%(asctime)s - %(name)s - %(levelname)s\n%(message)s\nLocation: %(pathname)s:%(lineno)d\n\n------\n',
    handlers=[logging.StreamHandler(sys.stdout)]
)

from src.harness import compare, fv_reference, load_experiment, run_experiment, sweep

load_dotenv()
DEFAULT_CONFIG = "config.yaml"


def parse_list(value: Optional[str], cast=float) -> Optional[list]:
    """Comma-separated CLI list, e.g. ``1e-2,1e-3``."""
    if value is None:
        return None
    try:
        return [cast(item) for item in value.split(",") if item.strip()]
    except ValueError as e:
        raise click.UsageError(f"Cannot parse list '{value}': {e}") from e


def collect_overrides(
    n: Optional[int],
    lambda_a: Optional[float],
    lambda_x: Optional[float],
    t_end: Optional[float],
    out: Optional[str],
    ref_cells: Optional[int],
    redistribute: Optional[str],
    snapshot_every: Optional[float],
) -> Dict[str, Any]:
    """CLI flags as dotted config keys; unset flags map to None and are skipped."""
    overrides: Dict[str, Any] = {
        "solver.n": n,
        "solver.lambda_a": lambda_a,
        "solver.lambda_x": lambda_x,
        "integrator.t_end": t_end,
        "output.dir": out,
        "integrator.snapshot_interval": snapshot_every,
        "integrator.redistribute": None if redistribute is None else redistribute == "on",
    }
    if ref_cells is not None:
        overrides["reference.cells"] = ref_cells
        overrides["reference.enabled"] = True
    return overrides


def experiment_options(func):
    """Options shared by every verb that builds an experiment."""
    options = [
        click.option("--preset", help="Built-in experiment (see presets/)"),
        click.option("--config", "config_path", help=f"Experiment config file (default {DEFAULT_CONFIG})"),
        click.option("--n", type=int, help="Number of knots"),
        click.option("--lambda-a", type=float, help="Amplitude-velocity penalty"),
        click.option("--lambda-x", type=float, help="Position-velocity penalty"),
        click.option("--t-end", type=float, help="Final time"),
        click.option("--out", help="Output directory"),
        click.option("--ref-cells", type=int, help="Cells of the FV reference (enables it)"),
        click.option("--redistribute", type=click.Choice(["on", "off"]), help="Knot redistribution"),
        click.option("--snapshot-every", type=float, help="Snapshot interval"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_experiment(preset, config_path, n, lambda_a, lambda_x, t_end, out, ref_cells, redistribute, snapshot_every):
    if preset and config_path:
        raise click.UsageError("Use either --preset or --config, not both")
    overrides = collect_overrides(n, lambda_a, lambda_x, t_end, out, ref_cells, redistribute, snapshot_every)
    if preset:
        return load_experiment(preset=preset, overrides=overrides)
    return load_experiment(config_path=config_path or DEFAULT_CONFIG, overrides=overrides)


def fail(e: Exception) -> None:
    logging.error(f"{type(e).__name__}: {e}")
    click.echo(f"Error: {e}", err=True)
    sys.exit(1)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log progress messages (INFO)")
@click.option("--quiet", "-q", is_flag=True, help="Hide progress bars")
@click.pass_context
def main(ctx, verbose, quiet):
    """Kernel-based linear-spline solver for 1D conservation laws on the torus."""
    if verbose:
        logging.getLogger().setLevel(logging.INFO)
    ctx.obj = {"progress": not quiet}


@main.command("run")
@experiment_options
@click.option("--lambdas", help="Comma-separated lambdas for zigzag experiments")
@click.pass_context
def run_command(ctx, lambdas, **kwargs):
    """Run one experiment and write its artifacts."""
    try:
        config = build_experiment(**kwargs)
        if config.kind == "zigzag" and lambdas:
            summary = sweep(config, parse_list(lambdas), progress=ctx.obj["progress"])[0]
        else:
            summary = run_experiment(config, progress=ctx.obj["progress"])
    except click.UsageError:
        raise
    except Exception as e:
        fail(e)
    click.echo(f"Finished {summary['experiment']}; artifacts in {config.output_dir}")


@main.command("compare")
@click.argument("traj_dir")
@click.argument("ref_dir")
@click.option("--out", help="Error table path (default <traj_dir>/errors.csv)")
def compare_command(traj_dir, ref_dir, out):
    """L1 error table of a trajectory against a reference directory."""
    try:
        rows = compare(traj_dir, ref_dir, out)
    except Exception as e:
        fail(e)
    click.echo(f"Compared {len(rows)} snapshots")


@main.command("sweep")
@experiment_options
@click.option("--lambdas", required=True, help="Comma-separated lambdas (lambda_a = lambda_x)")
@click.option("--ns", help="Comma-separated knot counts (default: the config's n)")
@click.option("--workers", type=int, help="Worker threads")
@click.pass_context
def sweep_command(ctx, lambdas, ns, workers, **kwargs):
    """Independent runs over a (lambda x N) grid."""
    try:
        config = build_experiment(**kwargs)
        rows = sweep(
            config, parse_list(lambdas), parse_list(ns, int), max_workers=workers, progress=ctx.obj["progress"]
        )
    except click.UsageError:
        raise
    except Exception as e:
        fail(e)
    click.echo(f"Sweep finished with {len(rows)} rows; artifacts in {config.output_dir}")


@main.command("fv-ref")
@experiment_options
@click.pass_context
def fv_ref_command(ctx, **kwargs):
    """Compute (or load from cache) the FV reference of an experiment."""
    try:
        config = build_experiment(**kwargs)
        grids = fv_reference(config, progress=ctx.obj["progress"])
    except click.UsageError:
        raise
    except Exception as e:
        fail(e)
    click.echo(f"Reference with {grids[-1].cells} cells written to {config.output_dir}/reference")


if __name__ == "__main__":
    main()
