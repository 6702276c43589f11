"""Damage indices, integrity laws, crack-closure activation and stress mapping.

Nominal stress from the effective one:

    sigma = (1 - d_i) dev(sigma_eff) + (1 - phi(p_eff) d_u) p_eff I

with phi the closure activation evaluated on the *effective* mean stress p_eff.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.common.constants import ClosureMode, SplitVariant, normalize_choice
from src.domain.models import ActivationParams, DamageParams, TrilinearLaw
from src.mechanics.tensor_core import (
    SymTensor3,
    compressive_part,
    deviatoric_projector,
    dev,
    mean,
    tensile_part,
    volumetric_projector,
)


@dataclass(frozen=True)
class DamageState:
    d_i: float = 0.0
    d_u: float = 0.0

    def __post_init__(self) -> None:
        for name in ("d_i", "d_u"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")


# --------------------------------------------------------------------------------------
# Integrity laws
# --------------------------------------------------------------------------------------


def integrity(law: TrilinearLaw, k: float) -> float:
    """Piecewise-linear integrity through (0,1), (k1,w1), (k2,w2), (k3,w_min)."""
    if not k >= 0.0:
        raise ValueError(f"damage driver must be >= 0, got {k}")
    if k >= law.k3:
        return law.w_min
    points = ((0.0, 1.0), (law.k1, law.w1), (law.k2, law.w2), (law.k3, law.w_min))
    for (ka, wa), (kb, wb) in zip(points, points[1:]):
        if k <= kb and kb > ka:
            t = (k - ka) / (kb - ka)
            return max(wa * (1.0 - t) + wb * t, law.w_min)
    return law.w_min  # pragma: no cover - k < k3 always hits a segment


def damage_index(law: TrilinearLaw, k: float) -> float:
    return 1.0 - integrity(law, k)


def update_damage(state: DamageState, k_driver: float, damage: DamageParams) -> DamageState:
    """Running maximum of both indices; damage never heals."""
    return DamageState(
        d_i=max(state.d_i, damage_index(damage.isotropic, k_driver)),
        d_u=max(state.d_u, damage_index(damage.unilateral, k_driver)),
    )


# --------------------------------------------------------------------------------------
# Closure activation
# --------------------------------------------------------------------------------------


def activation(params: ActivationParams, p_eff: float) -> float:
    if p_eff > 0.0:
        return 1.0
    if p_eff < params.m:
        return 0.0
    return 1.0 - np.expm1(params.alpha * p_eff / params.m) / np.expm1(params.alpha)


def heaviside_activation(p_eff: float) -> float:
    return 1.0 if p_eff > 0.0 else 0.0


def closure_factor(damage: Optional[DamageParams], p_eff: float) -> float:
    """Activation for the configured closure mode (1 when unilateral effects are off)."""
    if damage is None or damage.closure is ClosureMode.NONE:
        return 1.0
    if damage.closure is ClosureMode.HEAVISIDE:
        return heaviside_activation(p_eff)
    return activation(damage.activation, p_eff)


# --------------------------------------------------------------------------------------
# Stress mapping
# --------------------------------------------------------------------------------------


def _mapped(sigma_eff: SymTensor3, d_i: float, d_u: float, phi: float) -> SymTensor3:
    p = mean(sigma_eff)
    return (1.0 - d_i) * dev(sigma_eff) + ((1.0 - phi * d_u) * p) * SymTensor3.identity()


def map_stress(
    sigma_eff: SymTensor3, d_i: float, d_u: float, act: Optional[ActivationParams]
) -> SymTensor3:
    """Two-index mapping; act=None means the volumetric index is always active."""
    _check_index(d_i)
    _check_index(d_u)
    phi = 1.0 if act is None else activation(act, mean(sigma_eff))
    return _mapped(sigma_eff, d_i, d_u, phi)


def map_stress_for(
    sigma_eff: SymTensor3, state: DamageState, damage: Optional[DamageParams]
) -> tuple[SymTensor3, float]:
    """Mapping with the material's closure mode; returns the stress and phi."""
    if damage is None:
        return sigma_eff, 1.0
    phi = closure_factor(damage, mean(sigma_eff))
    return _mapped(sigma_eff, state.d_i, state.d_u, phi), phi


def nominal_tangent(tangent: np.ndarray, d_i: float, d_u: float, phi: float) -> np.ndarray:
    """Effective tangent pushed through the mapping with d_i, d_u and phi frozen.

    The mapping operator only combines the deviatoric and volumetric projectors, which
    commute with the Voigt/Mandel scaling, so it applies to the Voigt tangent directly.
    """
    op = (1.0 - d_i) * deviatoric_projector() + (1.0 - phi * d_u) * volumetric_projector()
    return op @ tangent


def legacy_map_single(sigma_eff: SymTensor3, d: float) -> SymTensor3:
    _check_index(d)
    return (1.0 - d) * sigma_eff


def legacy_map_split(sigma_eff: SymTensor3, d: float, which: str | SplitVariant) -> SymTensor3:
    """Degrade exactly one part of the effective stress, keep its complement."""
    _check_index(d)
    variant = normalize_choice(which, SplitVariant)
    if variant is SplitVariant.WHOLE:
        return legacy_map_single(sigma_eff, d)
    if variant is SplitVariant.TENSILE:
        return (1.0 - d) * tensile_part(sigma_eff) + compressive_part(sigma_eff)
    if variant is SplitVariant.COMPRESSIVE:
        return tensile_part(sigma_eff) + (1.0 - d) * compressive_part(sigma_eff)
    volumetric = mean(sigma_eff) * SymTensor3.identity()
    if variant is SplitVariant.DEVIATORIC:
        return (1.0 - d) * dev(sigma_eff) + volumetric
    return dev(sigma_eff) + (1.0 - d) * volumetric


def _check_index(d: float) -> None:
    if not 0.0 <= d < 1.0:
        raise ValueError(f"damage index must lie in [0, 1), got {d}")
