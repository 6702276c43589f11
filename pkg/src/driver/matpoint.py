"""Strain-controlled material point under uniaxial stress.

The axial strain follows the protocol; the five remaining strain components are
iterated (Newton on the frozen-damage nominal tangent) until the lateral stresses
vanish. Damage is driven by the local plastic variable k.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from src.common.constants import LoadPhase, SplitVariant, normalize_choice
from src.common.logging_utils import log_context
from src.core.config import get_settings
from src.domain.models import MaterialParams
from src.driver.export import RunResult
from src.driver.protocol import CycleProtocol, unloading_slope
from src.driver.scenario import Scenario
from src.mechanics.damage import (
    DamageState,
    damage_index,
    legacy_map_split,
    map_stress_for,
    nominal_tangent,
    update_damage,
)
from src.mechanics.stress_update import (
    PlasticState,
    ReturnMappingError,
    UpdateResult,
    elastic_stiffness,
    integrate,
)
from src.mechanics.tensor_core import SymTensor3

logger = logging.getLogger("matpoint")

_QUARTER_PHASE = {
    0: LoadPhase.RAMP,
    1: LoadPhase.LOAD,
    2: LoadPhase.UNLOAD,
    3: LoadPhase.LOAD,
    4: LoadPhase.UNLOAD,
}


class LateralStressError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class MaterialPointError(RuntimeError):
    def __init__(self, message: str, cycle: int, step: int):
        super().__init__(f"cycle {cycle}, step {step}: {message}")
        self.cycle = cycle
        self.step = step


@dataclass(frozen=True)
class PointResponse:
    strain: SymTensor3
    update: UpdateResult
    damage: DamageState
    sigma: SymTensor3
    phi: float
    iterations: int


class UniaxialPoint:
    """One material point loaded along x with traction-free lateral faces."""

    def __init__(self, params: MaterialParams, tol: Optional[float] = None):
        cfg = get_settings()
        self.params = params
        self.tol = tol
        self.plastic = PlasticState.virgin(params)
        self.damage = DamageState()
        self.strain = SymTensor3.zeros()
        self.lateral_tol = cfg.lateral_stress_rel_tol * params.isotropic.sigma0
        self.max_iter = cfg.lateral_max_iter
        self._tangent = elastic_stiffness(params.elastic)

    def advance(self, axial: float) -> PointResponse:
        """Move to axial strain *axial* and commit the converged state."""
        old = self.strain.engineering()
        d_axial = axial - old[0]
        d_mat = self._tangent
        lateral = old[1:] - np.linalg.solve(d_mat[1:, 1:], d_mat[1:, 0]) * d_axial
        residual = math.inf
        for iteration in range(1, self.max_iter + 1):
            strain = SymTensor3.from_engineering(np.concatenate(([axial], lateral)))
            update = integrate(self.plastic, strain, self.params, self.tol, strain_old=self.strain)
            damage, sigma, phi, d_mat = self._mapped(update)
            r = sigma.components[1:]
            residual = float(np.max(np.abs(r)))
            if residual <= self.lateral_tol:
                break
            lateral = lateral - np.linalg.solve(d_mat[1:, 1:], r)
        else:
            raise LateralStressError(
                f"lateral stresses did not vanish in {self.max_iter} iterations "
                f"(max |sigma| = {residual:.3e} MPa)",
                residual,
                self.max_iter,
            )
        self.plastic = update.new_state
        self.damage = damage
        self.strain = strain
        self._tangent = d_mat
        return PointResponse(strain, update, damage, sigma, phi, iteration)

    def _mapped(self, update: UpdateResult):
        """Damage, nominal stress, phi and nominal tangent for a trial update."""
        dmg = self.params.damage
        damage = update_damage(self.damage, update.new_state.k, dmg) if dmg else self.damage
        sigma, phi = map_stress_for(update.sigma_eff, damage, dmg)
        return damage, sigma, phi, nominal_tangent(update.tangent, damage.d_i, damage.d_u, phi)


# (d_i, d_u) weights of the frozen-index tangent; the spectral splits use the effective one
_SPLIT_TANGENT = {
    SplitVariant.WHOLE: (1.0, 1.0),
    SplitVariant.TENSILE: (0.0, 0.0),
    SplitVariant.COMPRESSIVE: (0.0, 0.0),
    SplitVariant.DEVIATORIC: (1.0, 0.0),
    SplitVariant.VOLUMETRIC: (0.0, 1.0),
}


class SingleIndexPoint(UniaxialPoint):
    """Uniaxial point whose nominal stress degrades one part of the effective stress.

    d is the running maximum of the isotropic law at k (kept as d_i of the damage
    state); the lateral stresses vanish for the mapped stress, not the effective one.
    """

    def __init__(
        self, params: MaterialParams, variant: SplitVariant | str, tol: Optional[float] = None
    ):
        if params.damage is None:
            raise ValueError("split study needs a material with a damage law")
        super().__init__(params.without_damage(), tol)
        self.law = params.damage.isotropic
        self.variant = normalize_choice(variant, SplitVariant)

    def _mapped(self, update: UpdateResult):
        d = max(self.damage.d_i, damage_index(self.law, update.new_state.k))
        sigma = legacy_map_split(update.sigma_eff, d, self.variant)
        w_i, w_u = _SPLIT_TANGENT[self.variant]
        tangent = nominal_tangent(update.tangent, w_i * d, w_u * d, 1.0)
        return DamageState(d_i=d), sigma, 1.0, tangent


def _cycle_summary(history: pd.DataFrame, protocol: CycleProtocol) -> pd.DataFrame:
    rows = []
    for cycle, block in history[history["cycle"] > 0].groupby("cycle", sort=True):
        first = block[block["quarter"] == 1]
        unload = block[block["quarter"] == 2]
        third = block[block["quarter"] == 3]
        if first.empty:
            continue
        peak = first.iloc[-1]
        branch = pd.concat([first.iloc[[-1]], unload])
        end = block.iloc[-1]
        rows.append(
            {
                "cycle": int(cycle),
                "phase": protocol.phase_of(int(cycle)).value,
                "peak_strain": peak["strain"],
                "peak_stress": peak["stress"],
                "valley_stress": third.iloc[-1]["stress"] if not third.empty else math.nan,
                "unloading_slope": unloading_slope(
                    branch["strain"].to_numpy(), branch["stress"].to_numpy()
                ),
                "k": end["k"],
                "d_i": end["d_i"],
                "d_u": end["d_u"],
            }
        )
    return pd.DataFrame(rows)


def run_uniaxial(
    params: MaterialParams, protocol: CycleProtocol, tol: Optional[float] = None
) -> RunResult:
    """Drive one material point through *protocol*; *tol* is the absolute return-mapping tol."""
    point = UniaxialPoint(params, tol)
    path = protocol.path()
    rows = []
    for step, cycle, quarter, target, time in path.itertuples(index=False):
        try:
            res = point.advance(float(target))
        except (ReturnMappingError, LateralStressError, np.linalg.LinAlgError) as exc:
            raise MaterialPointError(str(exc), int(cycle), int(step)) from exc
        state = res.update.new_state
        rows.append(
            {
                "step": int(step),
                "cycle": int(cycle),
                "quarter": int(quarter),
                "phase": _QUARTER_PHASE[int(quarter)].value,
                "time": float(time),
                "strain": float(target),
                "stress": float(res.sigma.components[0]),
                "stress_eff": float(res.update.sigma_eff.components[0]),
                "lateral_strain": float(res.strain.components[1]),
                "k": state.k,
                "d_i": res.damage.d_i,
                "d_u": res.damage.d_u,
                "phi": float(res.phi),
                "dgamma": res.update.dgamma,
                "yield_residual": res.update.residual,
                "trace_eps_p": state.eps_p.trace(),
            }
        )

    history = pd.DataFrame(rows)
    cycles = _cycle_summary(history, protocol)
    for row in cycles.itertuples(index=False):
        logger.debug(f"cycle {row.cycle}: peak={row.peak_stress:.2f} MPa, d_i={row.d_i:.4f}")
    slopes = dict(zip(cycles["cycle"], cycles["unloading_slope"])) if not cycles.empty else {}
    history["unloading_slope"] = [
        slopes.get(c, math.nan) if q == 2 else math.nan
        for c, q in zip(history["cycle"], history["quarter"])
    ]
    logger.info(
        f"Material point run finished: {protocol.cycles} cycles, {len(history)} increments, "
        f"final k={history['k'].iloc[-1]:.5g}"
    )
    return RunResult(history=history, cycles=cycles)


def run_matpoint(scenario: Scenario) -> RunResult:
    with log_context(scenario=scenario.name):
        logger.info(f"Running material point scenario '{scenario.name}'")
        return run_uniaxial(scenario.material, scenario.protocol, scenario.return_mapping_tol())


def map_split_response(
    params: MaterialParams,
    protocol: CycleProtocol,
    variants: Iterable[SplitVariant | str] = tuple(SplitVariant),
    tol: Optional[float] = None,
) -> pd.DataFrame:
    """Uniaxial response of one single-index damage mapping per variant.

    Every variant drives its own material point, so the lateral stresses of its mapped
    stress vanish. stress_eff, k and d belong to the undamaged reference point.
    """
    if params.damage is None:
        raise ValueError("split study needs a material with a damage law")
    chosen = [normalize_choice(v, SplitVariant) for v in variants]
    reference = UniaxialPoint(params.without_damage(), tol)
    points = {variant: SingleIndexPoint(params, variant, tol) for variant in chosen}
    law = params.damage.isotropic
    d = 0.0
    rows = []
    for step, cycle, _quarter, target, _time in protocol.path().itertuples(index=False):
        try:
            res = reference.advance(float(target))
            mapped = {variant: point.advance(float(target)) for variant, point in points.items()}
        except (ReturnMappingError, LateralStressError, np.linalg.LinAlgError) as exc:
            raise MaterialPointError(str(exc), int(cycle), int(step)) from exc
        d = max(d, damage_index(law, res.update.new_state.k))
        row = {
            "step": int(step),
            "cycle": int(cycle),
            "strain": float(target),
            "stress_eff": float(res.update.sigma_eff.components[0]),
            "k": res.update.new_state.k,
            "d": d,
        }
        for variant, out in mapped.items():
            row[f"stress_{variant.value}"] = float(out.sigma.components[0])
        for variant, out in mapped.items():
            row[f"d_{variant.value}"] = out.damage.d_i
        rows.append(row)
    logger.debug(f"Split study finished for {', '.join(v.value for v in chosen)}")
    return pd.DataFrame(rows)
