"""CSV export of run histories."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from src.common.logging_utils import get_logger
from src.core.config import get_settings

logger = get_logger("export")


class ExportError(RuntimeError):
    def __init__(self, message: str, path: Path):
        super().__init__(f"{message}: {path}")
        self.path = path


def emit_csv(history: pd.DataFrame, path: str | Path) -> Path:
    """Write *history* with a header row and round-trip float formatting.

    Column order is the frame's order; nothing is written for an empty history.
    """
    path = Path(path)
    if history is None or history.empty:
        raise ExportError("refusing to write an empty history", path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        history.to_csv(
            path,
            index=False,
            float_format=get_settings().csv_float_format,
            lineterminator="\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise ExportError(f"could not write history ({exc.strerror or exc})", path) from exc
    logger.info(f"Wrote {len(history)} rows to {path}")
    return path


def read_history(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


@dataclass
class RunResult:
    """Per-increment history, per-cycle summary and any field snapshots written."""

    history: pd.DataFrame
    cycles: pd.DataFrame
    snapshots: list[Path] = field(default_factory=list)

    def write(self, directory: str | Path, prefix: str) -> list[Path]:
        directory = Path(directory)
        paths = [emit_csv(self.history, directory / f"{prefix}_history.csv")]
        if not self.cycles.empty:
            paths.append(emit_csv(self.cycles, directory / f"{prefix}_cycles.csv"))
        return paths + list(self.snapshots)
