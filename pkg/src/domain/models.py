"""
Validated parameter records for the constitutive model using Pydantic.

Units: MPa for moduli and stresses, mm for lengths, dimensionless otherwise.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.common.constants import ClosureMode
from src.core.config import get_settings


def _integrity_floor() -> float:
    return get_settings().integrity_floor


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# --- Elasticity and hardening ---


class ElasticConstants(_Frozen):
    E: float = Field(gt=0, description="Young's modulus [MPa]")
    nu: float = Field(gt=-1.0, lt=0.5, description="Poisson's ratio [-]")

    @property
    def shear_modulus(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def bulk_modulus(self) -> float:
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))


class IsotropicHardening(_Frozen):
    """Exponential saturation of the yield strength from sigma0 towards sigma_inf."""

    sigma0: float = Field(gt=0, description="initial yield strength [MPa]")
    sigma_inf: float = Field(description="saturated yield strength [MPa]")
    a: float = Field(ge=0, description="saturation rate [-]")

    @model_validator(mode="after")
    def _check_saturation(self) -> "IsotropicHardening":
        if self.sigma_inf < self.sigma0:
            raise ValueError(
                f"sigma_inf ({self.sigma_inf}) must not be below sigma0 ({self.sigma0})"
            )
        return self

    @classmethod
    def constant(cls, sigma_y: float) -> "IsotropicHardening":
        return cls(sigma0=sigma_y, sigma_inf=sigma_y, a=0.0)


class BackstressComponent(_Frozen):
    h: float = Field(ge=0, description="hardening modulus [MPa]")
    b: float = Field(ge=0, description="recall parameter [-]; 0 gives linear Prager hardening")


class ChabocheSet(_Frozen):
    components: tuple[BackstressComponent, ...] = ()

    def __len__(self) -> int:
        return len(self.components)

    @classmethod
    def of(cls, *pairs: tuple[float, float]) -> "ChabocheSet":
        return cls(components=tuple(BackstressComponent(h=h, b=b) for h, b in pairs))


# --- Damage ---


class TrilinearLaw(_Frozen):
    """Integrity breakpoints (0, 1) -> (k1, w1) -> (k2, w2) -> (k3, w_min)."""

    w1: float = Field(gt=0, le=1)
    w2: float = Field(gt=0, le=1)
    k1: float = Field(ge=0)
    k2: float = Field(ge=0)
    k3: float = Field(ge=0)
    w_min: float = Field(default_factory=_integrity_floor, gt=0, le=1)

    @model_validator(mode="after")
    def _check_order(self) -> "TrilinearLaw":
        if not (self.w_min <= self.w2 <= self.w1 <= 1.0):
            raise ValueError(
                f"integrity breakpoints must satisfy w_min <= w2 <= w1 <= 1, got "
                f"w_min={self.w_min}, w2={self.w2}, w1={self.w1}"
            )
        if not (self.k1 <= self.k2 <= self.k3):
            raise ValueError(
                f"k breakpoints must be non-decreasing, got k1={self.k1}, k2={self.k2}, "
                f"k3={self.k3}"
            )
        return self

    @classmethod
    def linear(cls, w_min: Optional[float] = None) -> "TrilinearLaw":
        """d = min(k, 1) expressed with breakpoints on the line w = 1 - k."""
        w_min = _integrity_floor() if w_min is None else w_min
        return cls(w1=0.75, k1=0.25, w2=0.5, k2=0.5, k3=1.0 - w_min, w_min=w_min)


class ActivationParams(_Frozen):
    alpha: float = Field(gt=0, description="curvature of the closure transition [-]")
    m: float = Field(lt=0, description="mean effective stress at full closure [MPa]")


class DamageParams(_Frozen):
    isotropic: TrilinearLaw
    unilateral: TrilinearLaw
    activation: Optional[ActivationParams] = None
    closure: ClosureMode = ClosureMode.SMOOTH

    @model_validator(mode="after")
    def _check_closure(self) -> "DamageParams":
        if self.closure is ClosureMode.SMOOTH and self.activation is None:
            raise ValueError("smooth closure needs activation parameters (alpha, m)")
        return self


# --- Complete material ---


class MaterialParams(_Frozen):
    elastic: ElasticConstants
    isotropic: IsotropicHardening
    kinematic: ChabocheSet = ChabocheSet()
    damage: Optional[DamageParams] = None
    ell: float = Field(default=0.0, ge=0, description="characteristic length [mm]")

    @field_validator("kinematic", mode="before")
    @classmethod
    def _coerce_pairs(cls, value):
        # accept [(h, b), ...] shorthand from scenario files
        if isinstance(value, (list, tuple)):
            if all(isinstance(p, (list, tuple)) for p in value):
                return ChabocheSet.of(*[tuple(p) for p in value])
            return {"components": list(value)}
        return value

    def without_damage(self) -> "MaterialParams":
        return self.model_copy(update={"damage": None})
