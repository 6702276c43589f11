"""Isotropic (exponential saturation) and kinematic (Armstrong-Frederick sum) hardening."""
from __future__ import annotations

import numpy as np

from src.domain.models import BackstressComponent, ChabocheSet, IsotropicHardening


def _check_k(k: float) -> None:
    if not k >= 0.0:
        raise ValueError(f"plastic internal variable must be >= 0, got {k}")


def yield_stress(iso: IsotropicHardening, k: float) -> float:
    """sigma0 + (sigma_inf - sigma0) * (1 - exp(-a k))"""
    _check_k(k)
    return iso.sigma0 + (iso.sigma_inf - iso.sigma0) * -np.expm1(-iso.a * k)


def yield_stress_slope(iso: IsotropicHardening, k: float) -> float:
    _check_k(k)
    return iso.a * (iso.sigma_inf - iso.sigma0) * np.exp(-iso.a * k)


def backstress_saturation_components(kinematic: ChabocheSet) -> list[float]:
    """Axial saturation value h_k / b_k of every backstress."""
    out = []
    for i, comp in enumerate(kinematic.components):
        if comp.b <= 0.0:
            raise ValueError(
                f"backstress {i} has b = {comp.b}: linear (Prager) hardening never saturates"
            )
        out.append(comp.h / comp.b)
    return out


def saturated_backstress_amplitude(kinematic: ChabocheSet) -> float:
    return float(sum(backstress_saturation_components(kinematic)))


def monotonic_backstress(comp: BackstressComponent, p: float) -> float:
    """Axial backstress after monotonic uniaxial plastic strain p from a virgin state."""
    _check_k(p)
    if comp.b == 0.0:
        return comp.h * p
    return comp.h / comp.b * -np.expm1(-comp.b * p)


def saturated_flow_stress(iso: IsotropicHardening, kinematic: ChabocheSet) -> float:
    """Asymptotic axial flow stress under monotonic uniaxial loading."""
    return iso.sigma_inf + saturated_backstress_amplitude(kinematic)
