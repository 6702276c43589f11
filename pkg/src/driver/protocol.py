"""Cyclic load protocols.

A cycle runs mean -> max -> mean -> min -> mean in four quarters of equal point count.
For R != -1 a ramp 0 -> mean (cycle 0) precedes the first cycle.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.common.constants import FatiguePhase


def frequency_from_rate(rate: float, amplitude: float) -> float:
    """Test frequency [Hz] for a strain rate and amplitude: rate = 4 f amplitude."""
    if not amplitude > 0.0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    return rate / (4.0 * amplitude)


class CycleProtocol(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    amplitude: float = Field(gt=0, description="strain amplitude [-] or displacement [mm]")
    ratio: float = Field(default=-1.0, description="min/max ratio R")
    cycles: int = Field(default=1, ge=1)
    points_per_quarter: int = Field(default=20, ge=4)
    strain_rate: float = Field(default=0.0, ge=0, description="[1/s]; 0 leaves time at 0")
    amplitude_start: Optional[float] = Field(
        default=None, gt=0, description="first-cycle amplitude of a growing schedule"
    )
    initial_phase_end: int = Field(default=5, ge=0)
    stable_phase_end: int = Field(default=125, ge=0)

    @model_validator(mode="after")
    def _check_ratio(self) -> "CycleProtocol":
        if self.ratio >= 1.0:
            raise ValueError(f"ratio R must be below 1, got {self.ratio}")
        return self

    @property
    def frequency(self) -> float:
        return frequency_from_rate(self.strain_rate, self.amplitude)

    def amplitude_at(self, cycle: int) -> float:
        if self.amplitude_start is None or self.cycles == 1:
            return self.amplitude
        t = (cycle - 1) / (self.cycles - 1)
        return self.amplitude_start + (self.amplitude - self.amplitude_start) * t

    def extremes(self, cycle: int = 1) -> tuple[float, float]:
        peak = 2.0 * self.amplitude_at(cycle) / (1.0 - self.ratio)
        return peak, self.ratio * peak

    def phase_of(self, cycle: int) -> FatiguePhase:
        if cycle <= self.initial_phase_end:
            return FatiguePhase.INITIAL
        if cycle <= self.stable_phase_end:
            return FatiguePhase.STABLE
        return FatiguePhase.FAILURE

    def path(self) -> pd.DataFrame:
        """Increment table: cycle, quarter (0 = initial ramp), target, time."""
        n = self.points_per_quarter
        cycles, quarters, targets = [], [], []
        frac = np.arange(1, n + 1) / n

        peak, valley = self.extremes(1)
        mean = 0.5 * (peak + valley)
        if mean != 0.0:
            cycles += [0] * n
            quarters += [0] * n
            targets += list(mean * frac)
        for c in range(1, self.cycles + 1):
            peak, valley = self.extremes(c)
            mean = 0.5 * (peak + valley)
            legs = (
                mean + (peak - mean) * frac,
                peak + (mean - peak) * frac,
                mean + (valley - mean) * frac,
                valley + (mean - valley) * frac,
            )
            for q, leg in enumerate(legs, start=1):
                cycles += [c] * n
                quarters += [q] * n
                targets += list(leg)

        targets_arr = np.array(targets)
        if self.strain_rate > 0.0:
            steps = np.abs(np.diff(np.concatenate([[0.0], targets_arr])))
            time = np.cumsum(steps) / self.strain_rate
        else:
            time = np.zeros_like(targets_arr)
        return pd.DataFrame(
            {
                "step": np.arange(1, len(targets_arr) + 1),
                "cycle": cycles,
                "quarter": quarters,
                "target": targets_arr,
                "time": time,
            }
        )


def unloading_slope(strain: np.ndarray, stress: np.ndarray, fraction: float = 0.1) -> float:
    """Secant slope over the first *fraction* of an unloading branch.

    The branch starts at the reversal point (index 0).
    """
    n = len(strain) - 1
    if n < 1:
        return math.nan
    j = max(1, math.ceil(fraction * n))
    d_eps = strain[0] - strain[j]
    return float((stress[0] - stress[j]) / d_eps) if d_eps != 0.0 else math.nan
