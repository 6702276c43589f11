"""
Central configuration for the fatigue plasticity toolkit.
Based on pydantic settings with environment variable and .env support.
"""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Solver and output settings with environment variable support"""

    # Return mapping (tolerance is relative to the initial yield strength)
    return_mapping_rel_tol: float = 1e-8
    return_mapping_max_iter: int = 50
    return_mapping_max_bisections: int = 10
    # Explicit substep oracle
    substep_drift_tol: float = 1e-10
    substep_max_corrections: int = 5

    # Material point driver
    lateral_stress_rel_tol: float = 1e-8
    lateral_max_iter: int = 30
    points_per_quarter: int = 20

    # Finite elements
    newton_rel_tol: float = 1e-8
    newton_max_iter: int = 25
    newton_max_line_search: int = 6
    load_max_cutbacks: int = 6
    stagger_energy_tol: float = 1e-6
    stagger_kbar_tol: float = 1e-8
    stagger_max_outer: int = 50
    helmholtz_lumped_mass: bool = True

    # Damage (lower bound of the integrity laws unless a law sets w_min)
    integrity_floor: float = Field(default=1e-8, gt=0, le=1)

    # Output
    output_dir: str = "./results"
    csv_float_format: str = "%.17g"
    sweep_workers: int = 2

    # Monitoring
    log_level: str = "INFO"

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "protected_namespaces": ("settings_",),
    }


# Lazy global settings accessor to avoid premature instantiation during CLI aggregation / testing
_SETTINGS_SINGLETON: Optional[Settings] = None


def get_settings() -> Settings:
    global _SETTINGS_SINGLETON
    if _SETTINGS_SINGLETON is None:
        _SETTINGS_SINGLETON = Settings()
    return _SETTINGS_SINGLETON


def reset_settings() -> None:
    """Drop the cached instance (tests change the environment between cases)."""
    global _SETTINGS_SINGLETON
    _SETTINGS_SINGLETON = None


class _SettingsProxy:
    def __getattr__(self, item):  # pragma: no cover - simple delegation
        return getattr(get_settings(), item)


settings = _SettingsProxy()
