import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.common.constants import FatiguePhase
from src.driver.protocol import CycleProtocol, frequency_from_rate, unloading_slope


@pytest.mark.parametrize(
    "rate,amplitude,expected",
    [
        (0.004, 0.015, 1.0 / 15.0),
        (0.04, 0.01, 1.0),
        (0.0, 0.01, 0.0),
    ],
)
def test_frequency_from_rate(rate, amplitude, expected):
    assert frequency_from_rate(rate, amplitude) == pytest.approx(expected, rel=1e-12)


def test_frequency_needs_positive_amplitude():
    with pytest.raises(ValueError):
        frequency_from_rate(0.004, 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(amplitude=0.0),
        dict(amplitude=0.01, ratio=1.0),
        dict(amplitude=0.01, points_per_quarter=3),
        dict(amplitude=0.01, cycles=0),
        dict(amplitude=0.01, strain_rate=-1.0),
        dict(amplitude=0.01, frequency=2.0),
    ],
)
def test_protocol_validation(kwargs):
    with pytest.raises(ValidationError):
        CycleProtocol(**kwargs)


def test_fully_reversed_path():
    protocol = CycleProtocol(amplitude=0.01, cycles=2, points_per_quarter=5)
    path = protocol.path()
    assert len(path) == 2 * 4 * 5
    assert path["step"].tolist() == list(range(1, 41))
    assert path["quarter"].min() == 1
    targets = path["target"].to_numpy()
    assert targets.max() == pytest.approx(0.01, rel=1e-15)
    assert targets.min() == pytest.approx(-0.01, rel=1e-15)
    assert abs(targets[-1]) <= 1e-15
    ends = path.groupby(["cycle", "quarter"])["target"].last().to_numpy()
    np.testing.assert_allclose(ends, [0.01, 0.0, -0.01, 0.0] * 2, atol=1e-15)
    assert (path["time"] == 0.0).all()


def test_positive_ratio_ramps_to_mean():
    protocol = CycleProtocol(amplitude=0.01, ratio=0.0, points_per_quarter=4)
    peak, valley = protocol.extremes(1)
    assert (peak, valley) == pytest.approx((0.02, 0.0))
    path = protocol.path()
    ramp = path[path["quarter"] == 0]
    assert len(ramp) == 4
    assert (ramp["cycle"] == 0).all()
    np.testing.assert_allclose(ramp["target"], [0.0025, 0.005, 0.0075, 0.01])
    assert len(path) == 4 + 16


def test_time_follows_strain_rate():
    protocol = CycleProtocol(amplitude=0.015, cycles=2, strain_rate=0.004)
    path = protocol.path()
    end_of_first = path[path["cycle"] == 1]["time"].iloc[-1]
    assert end_of_first == pytest.approx(1.0 / protocol.frequency, rel=1e-12)
    assert end_of_first == pytest.approx(15.0, rel=1e-12)
    assert np.all(np.diff(path["time"]) > 0.0)


def test_growing_amplitude():
    protocol = CycleProtocol(amplitude=0.2, amplitude_start=0.05, cycles=4)
    assert protocol.amplitude_at(1) == pytest.approx(0.05)
    assert protocol.amplitude_at(2) == pytest.approx(0.1)
    assert protocol.amplitude_at(4) == pytest.approx(0.2)
    path = protocol.path()
    peaks = path.groupby("cycle")["target"].max().to_numpy()
    np.testing.assert_allclose(peaks, [0.05, 0.1, 0.15, 0.2], rtol=1e-12)


def test_constant_amplitude_ignores_cycle():
    protocol = CycleProtocol(amplitude=0.01, cycles=3)
    assert protocol.amplitude_at(3) == 0.01


@pytest.mark.parametrize(
    "cycle,phase",
    [
        (1, FatiguePhase.INITIAL),
        (5, FatiguePhase.INITIAL),
        (6, FatiguePhase.STABLE),
        (125, FatiguePhase.STABLE),
        (126, FatiguePhase.FAILURE),
    ],
)
def test_phase_of(cycle, phase):
    assert CycleProtocol(amplitude=0.01).phase_of(cycle) is phase


def test_unloading_slope_of_linear_branch():
    strain = np.linspace(0.01, 0.0, 21)
    stress = 70_000.0 * strain - 100.0
    assert unloading_slope(strain, stress) == pytest.approx(70_000.0, rel=1e-12)


def test_unloading_slope_uses_initial_part():
    strain = np.linspace(0.01, 0.0, 11)
    stress = np.where(strain > 0.008, 70_000.0 * (strain - 0.01), -140.0 - 1e3 * (0.008 - strain))
    assert unloading_slope(strain, stress, fraction=0.1) == pytest.approx(70_000.0, rel=1e-12)


def test_unloading_slope_degenerate():
    assert math.isnan(unloading_slope(np.array([0.01]), np.array([100.0])))
    assert math.isnan(unloading_slope(np.zeros(5), np.arange(5.0)))
