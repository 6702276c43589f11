"""
Command-line interface for material-point and finite-element fatigue runs.
Usage examples:
  python -m src.apps.cli matpoint config/dogbone_matpoint.ini
  python -m src.apps.cli fem config/notched_plate.yaml --max-cycles 3
  python -m src.apps.cli sweep config/ --workers 4 --output-dir results/sweep
  python -m src.apps.cli split --amplitude 0.02 --cycles 2
  python -m src.apps.cli presets
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import click

from src.common.constants import RunMode
from src.common.logging_utils import configure_logging, get_logger
from src.core.config import settings
from src.domain.presets import PRESETS, get_preset
from src.driver.export import emit_csv
from src.driver.matpoint import map_split_response
from src.driver.protocol import CycleProtocol
from src.driver.scenario import load_scenario
from src.driver.sweep import run_scenario, run_sweep

logger = get_logger("cli")


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    raise SystemExit(1)


def run_options(fn):
    fn = click.option(
        "--output-dir",
        type=click.Path(file_okay=False, path_type=Path),
        default=None,
        help="Directory for CSV files and snapshots (overrides the scenario).",
    )(fn)
    fn = click.option(
        "--max-cycles", type=click.IntRange(min=1), default=None, help="Cap on the cycle count."
    )(fn)
    fn = click.option(
        "--tol",
        type=click.FloatRange(min=0, min_open=True),
        default=None,
        help="Return-mapping tolerance relative to the initial yield strength.",
    )(fn)
    return fn


def _run(
    path: Path,
    mode: RunMode,
    tol: Optional[float],
    max_cycles: Optional[int],
    output_dir: Optional[Path],
) -> None:
    try:
        scenario = load_scenario(path, mode).with_overrides(tol, max_cycles, output_dir)
        outputs = run_scenario(scenario)
    except Exception as exc:
        logger.error(f"{mode.value} run failed: {exc}")
        _fail(exc)
    for p in outputs:
        click.echo(str(p))
    raise SystemExit(0)


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL for this invocation.")
def cli(log_level: Optional[str]):
    """Cyclic plasticity and damage simulations."""
    configure_logging(service="fatigue-cli", level=log_level, force=True)


@cli.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@run_options
def matpoint(scenario: Path, tol, max_cycles, output_dir):
    """Strain-controlled uniaxial material point run."""
    _run(scenario, RunMode.MATPOINT, tol, max_cycles, output_dir)


@cli.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@run_options
def fem(scenario: Path, tol, max_cycles, output_dir):
    """Notched-plate load-release cycles with the staggered FE solver."""
    _run(scenario, RunMode.FEM, tol, max_cycles, output_dir)


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel jobs.")
@run_options
def sweep(directory: Path, workers, tol, max_cycles, output_dir):
    """Run every scenario file in DIRECTORY."""
    try:
        summary = run_sweep(directory, workers, tol, max_cycles, output_dir)
    except Exception as exc:
        _fail(exc)
    for row in summary.itertuples(index=False):
        click.echo(f"{row.scenario}: {row.status}" + (f" ({row.message})" if row.message else ""))
    raise SystemExit(0 if (summary["status"] == "ok").all() else 1)


@cli.command()
@click.option("--preset", default="split-study", show_default=True)
@click.option("--amplitude", type=float, default=0.02, show_default=True)
@click.option("--cycles", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--points-per-quarter", type=click.IntRange(min=4), default=None)
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
def split(preset: str, amplitude: float, cycles: int, points_per_quarter, output_dir):
    """Compare the single-index damage mappings on one cyclic uniaxial path."""
    try:
        protocol = CycleProtocol(
            amplitude=amplitude,
            cycles=cycles,
            points_per_quarter=points_per_quarter or settings.points_per_quarter,
        )
        table = map_split_response(get_preset(preset), protocol)
        target = Path(output_dir or settings.output_dir) / "split_study.csv"
        click.echo(str(emit_csv(table, target)))
    except Exception as exc:
        _fail(exc)
    raise SystemExit(0)


@cli.command()
def presets():
    """List the named material parameter sets."""
    for name in sorted(PRESETS):
        params = get_preset(name)
        extras = [f"{len(params.kinematic)} backstress"]
        if params.damage is not None:
            extras.append(f"damage ({params.damage.closure.value} closure)")
        if params.ell:
            extras.append(f"ell={params.ell:g} mm")
        click.echo(f"{name}: sigma0={params.isotropic.sigma0:g} MPa, " + ", ".join(extras))
    raise SystemExit(0)


if __name__ == "__main__":
    cli()
