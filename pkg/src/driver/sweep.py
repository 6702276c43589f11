"""Scenario execution and parallel sweeps over a directory of scenario files."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Optional

import pandas as pd
from joblib import Parallel, delayed

from src.common.constants import RunMode
from src.common.logging_utils import log_context
from src.core.config import get_settings
from src.driver.export import emit_csv
from src.driver.fem_run import run_fem
from src.driver.matpoint import run_matpoint
from src.driver.scenario import SCENARIO_SUFFIXES, Scenario, ScenarioError, load_scenario

logger = logging.getLogger("sweep")


def run_scenario(scenario: Scenario) -> list[Path]:
    """Run one scenario and write its CSV files; returns the written paths."""
    runner = run_fem if scenario.mode is RunMode.FEM else run_matpoint
    result = runner(scenario)
    return result.write(scenario.output.directory, scenario.output.prefix)


def _run_file(path: Path, overrides: dict[str, Any]) -> dict[str, Any]:
    record: dict[str, Any] = {"scenario": path.name, "mode": "", "status": "error"}
    with log_context(scenario_file=path.name):
        try:
            scenario = load_scenario(path).with_overrides(**overrides)
            record["mode"] = scenario.mode.value
            outputs = run_scenario(scenario)
            record.update(status="ok", message="", outputs=";".join(str(p) for p in outputs))
        except Exception as exc:
            logger.error(f"Scenario {path.name} failed: {exc}")
            record.update(message=str(exc), outputs="")
    return record


def scenario_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ScenarioError("sweep directory not found", directory)
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in SCENARIO_SUFFIXES)


def run_sweep(
    directory: str | Path,
    workers: Optional[int] = None,
    tol: Optional[float] = None,
    max_cycles: Optional[int] = None,
    output_dir: Optional[str | Path] = None,
) -> pd.DataFrame:
    """Run every scenario in *directory*; one status record per file.

    The summary is also written as `sweep_summary.csv` into *output_dir* (or the
    configured output directory).
    """
    files = scenario_files(directory)
    if not files:
        raise ScenarioError("no scenario files found", Path(directory))
    workers = get_settings().sweep_workers if workers is None else workers
    overrides = {"tol": tol, "max_cycles": max_cycles, "output_dir": output_dir}
    logger.info(f"Sweeping {len(files)} scenarios with {workers} workers")
    records = Parallel(n_jobs=workers)(delayed(_run_file)(p, overrides) for p in files)
    summary = pd.DataFrame(records, columns=["scenario", "mode", "status", "message", "outputs"])
    target = Path(output_dir or get_settings().output_dir)
    emit_csv(summary, target / "sweep_summary.csv")
    failed = int((summary["status"] != "ok").sum())
    logger.info(f"Sweep finished: {len(files) - failed} ok, {failed} failed")
    return summary
