"""Named parameter sets.

`aw7020-t6` is the calibrated high-strength aluminium (cyclic plasticity plus the
characteristic length of the dog-bone study). The damage sets belong to the two
specimen types; `kinematic-demo-*` and `split-study` are the hypothetical materials
used to show hardening regimes and damage-mapping alternatives.
"""
from __future__ import annotations

from typing import Callable, Dict

from src.common.constants import ClosureMode
from src.domain.models import (
    ActivationParams,
    ChabocheSet,
    DamageParams,
    ElasticConstants,
    IsotropicHardening,
    MaterialParams,
    TrilinearLaw,
)

ALLOY_ELASTIC = ElasticConstants(E=75_000.0, nu=0.334)
ALLOY_ISOTROPIC = IsotropicHardening(sigma0=215.0, sigma_inf=230.0, a=25.0)
ALLOY_KINEMATIC = ChabocheSet.of((2500.0, 25.0), (60000.0, 550.0))
ALLOY_ACTIVATION = ActivationParams(alpha=1.0, m=-20_000.0)

DOGBONE_ELL = 12.5
CT_ELL = 0.75

DOGBONE_ISOTROPIC_LAW = TrilinearLaw(w1=0.825, w2=0.775, k1=0.005, k2=10.0, k3=50.0)
DOGBONE_UNILATERAL_LAW = TrilinearLaw(w1=0.825, w2=0.025, k1=0.005, k2=10.0, k3=11.0)
CT_ISOTROPIC_LAW = TrilinearLaw(w1=0.825, w2=0.775, k1=0.005, k2=0.25, k3=0.8)
CT_UNILATERAL_LAW = TrilinearLaw(w1=0.825, w2=0.025, k1=0.005, k2=0.5, k3=4.0)

DEMO_SIGMA_Y = 235.0
DEMO_PRAGER_H = 7500.0
DEMO_RECALL_B = 100.0

SPLIT_KINEMATIC = ChabocheSet.of((10_000.0, 150.0))


def dogbone_damage() -> DamageParams:
    return DamageParams(
        isotropic=DOGBONE_ISOTROPIC_LAW,
        unilateral=DOGBONE_UNILATERAL_LAW,
        activation=ALLOY_ACTIVATION,
        closure=ClosureMode.SMOOTH,
    )


def ct_damage() -> DamageParams:
    return DamageParams(
        isotropic=CT_ISOTROPIC_LAW,
        unilateral=CT_UNILATERAL_LAW,
        activation=ALLOY_ACTIVATION,
        closure=ClosureMode.SMOOTH,
    )


def alloy(damage: bool = True) -> MaterialParams:
    return MaterialParams(
        elastic=ALLOY_ELASTIC,
        isotropic=ALLOY_ISOTROPIC,
        kinematic=ALLOY_KINEMATIC,
        damage=dogbone_damage() if damage else None,
        ell=DOGBONE_ELL,
    )


def alloy_ct() -> MaterialParams:
    return alloy().model_copy(update={"damage": ct_damage(), "ell": CT_ELL})


def kinematic_demo(b: float | None = DEMO_RECALL_B, h: float = DEMO_PRAGER_H) -> MaterialParams:
    """Constant yield strength with one backstress; b=None drops kinematic hardening."""
    kinematic = ChabocheSet() if b is None else ChabocheSet.of((h, b))
    return MaterialParams(
        elastic=ALLOY_ELASTIC,
        isotropic=IsotropicHardening.constant(DEMO_SIGMA_Y),
        kinematic=kinematic,
    )


def split_study() -> MaterialParams:
    linear = TrilinearLaw.linear()
    return MaterialParams(
        elastic=ALLOY_ELASTIC,
        isotropic=IsotropicHardening.constant(DEMO_SIGMA_Y),
        kinematic=SPLIT_KINEMATIC,
        damage=DamageParams(isotropic=linear, unilateral=linear, closure=ClosureMode.NONE),
    )


PRESETS: Dict[str, Callable[[], MaterialParams]] = {
    "aw7020-t6": alloy,
    "aw7020-t6-plastic": lambda: alloy(damage=False),
    "aw7020-t6-ct": alloy_ct,
    "kinematic-demo-perfect": lambda: kinematic_demo(b=None),
    "kinematic-demo-prager": lambda: kinematic_demo(b=0.0),
    "kinematic-demo-af": kinematic_demo,
    "split-study": split_study,
}


def get_preset(name: str) -> MaterialParams:
    key = (name or "").strip().lower().replace("_", "-")
    if key not in PRESETS:
        allowed = ", ".join(sorted(PRESETS))
        raise ValueError(f"Unknown preset '{name}'. Allowed: {allowed}")
    return PRESETS[key]()


__all__ = ["PRESETS", "get_preset", "alloy", "alloy_ct", "kinematic_demo", "split_study"]
