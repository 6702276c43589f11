from __future__ import annotations

from enum import Enum
from typing import TypeVar


class RunMode(str, Enum):
    MATPOINT = "matpoint"
    FEM = "fem"


class SplitVariant(str, Enum):
    """Which part of the effective stress a single damage index degrades."""

    WHOLE = "whole"
    TENSILE = "tensile"
    COMPRESSIVE = "compressive"
    DEVIATORIC = "deviatoric"
    VOLUMETRIC = "volumetric"


class ClosureMode(str, Enum):
    """Crack-closure switch applied to the volumetric damage index."""

    SMOOTH = "smooth"
    HEAVISIDE = "heaviside"
    NONE = "none"


class LoadPhase(str, Enum):
    LOAD = "load"
    UNLOAD = "unload"
    RAMP = "ramp"


class FatiguePhase(str, Enum):
    INITIAL = "initial"
    STABLE = "stable"
    FAILURE = "failure"


ALIASES: dict[str, str] = {
    # common short-hands
    "mp": RunMode.MATPOINT.value,
    "material-point": RunMode.MATPOINT.value,
    "fe": RunMode.FEM.value,
    "dev": SplitVariant.DEVIATORIC.value,
    "vol": SplitVariant.VOLUMETRIC.value,
    "single": SplitVariant.WHOLE.value,
    "step": ClosureMode.HEAVISIDE.value,
    "off": ClosureMode.NONE.value,
}

E = TypeVar("E", bound=Enum)


def normalize_choice(value: str | E, enum_cls: type[E]) -> E:
    """
    Normalize a user supplied identifier to a member of *enum_cls*.
    Raises ValueError for unknown values, listing the allowed ones.
    """
    if isinstance(value, enum_cls):
        return value
    v = str(value or "").strip().lower().replace("_", "-")
    v = ALIASES.get(v, v)
    for member in enum_cls:
        if member.value == v:
            return member
    allowed = ", ".join(sorted(m.value for m in enum_cls))
    raise ValueError(f"Unknown {enum_cls.__name__} '{value}'. Allowed: {allowed}")
