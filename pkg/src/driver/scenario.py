"""Scenario files: sectioned INI or YAML with the same sections.

[scenario]  name, mode
[material]  preset | E, nu, sigma0, sigma_inf, a, sigma_y, backstress, ell
[damage]    preset (dogbone|ct|linear|none), isotropic, unilateral, w_min, alpha, m, closure
[protocol]  CycleProtocol fields
[mesh]      path | length, height, thickness, element_size, notch_depth, notch_width, nz
[solver]    tol (relative to sigma0), regularized, release_substeps
[output]    directory, prefix, snapshot_every
"""
from __future__ import annotations

import configparser
import re
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.common.constants import ClosureMode, RunMode, normalize_choice
from src.core.config import get_settings
from src.domain.models import MaterialParams, TrilinearLaw
from src.domain.presets import ALLOY_ACTIVATION, ct_damage, dogbone_damage, get_preset
from src.driver.protocol import CycleProtocol
from src.fem.mesh import Mesh, notched_plate, read_mesh

SCENARIO_SUFFIXES = (".ini", ".cfg", ".yaml", ".yml")
SECTIONS = ("scenario", "material", "damage", "protocol", "mesh", "solver", "output")
_LAW_KEYS = ("w1", "w2", "k1", "k2", "k3")
_SPLIT = re.compile(r"[,;\s]+")


class ScenarioError(ValueError):
    def __init__(self, message: str, path: Optional[Path] = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class MeshSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Optional[Path] = None
    length: float = Field(default=40.0, gt=0)
    height: float = Field(default=20.0, gt=0)
    thickness: float = Field(default=2.0, gt=0)
    element_size: float = Field(default=2.5, gt=0)
    notch_depth: float = Field(default=5.0, ge=0)
    notch_width: Optional[float] = Field(default=None, gt=0)
    nz: int = Field(default=1, ge=1)

    def build(self) -> Mesh:
        if self.path is not None:
            return read_mesh(self.path)
        return notched_plate(
            self.length,
            self.height,
            self.thickness,
            self.element_size,
            self.notch_depth,
            self.notch_width,
            self.nz,
        )


class SolverSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tol: Optional[float] = Field(default=None, gt=0, description="return-mapping tol / sigma0")
    regularized: bool = True
    release_substeps: Optional[int] = Field(default=None, ge=1)


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: Path = Field(default_factory=lambda: Path(get_settings().output_dir))
    prefix: str = "run"
    snapshot_every: int = Field(default=0, ge=0)


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "scenario"
    mode: RunMode = RunMode.MATPOINT
    material: MaterialParams
    protocol: CycleProtocol
    mesh: MeshSpec = MeshSpec()
    solver: SolverSpec = SolverSpec()
    output: OutputSpec = Field(default_factory=OutputSpec)
    source: Optional[Path] = None

    def return_mapping_tol(self) -> Optional[float]:
        """Absolute return-mapping tolerance [MPa], None for the configured default."""
        if self.solver.tol is None:
            return None
        return self.solver.tol * self.material.isotropic.sigma0

    def with_overrides(
        self,
        tol: Optional[float] = None,
        max_cycles: Optional[int] = None,
        output_dir: Optional[str | Path] = None,
    ) -> "Scenario":
        update: dict[str, Any] = {}
        if tol is not None:
            update["solver"] = self.solver.model_copy(update={"tol": tol})
        if max_cycles is not None:
            cycles = min(self.protocol.cycles, max_cycles)
            update["protocol"] = self.protocol.model_copy(update={"cycles": max(cycles, 1)})
        if output_dir is not None:
            update["output"] = self.output.model_copy(update={"directory": Path(output_dir)})
        return self.model_copy(update=update)


# --------------------------------------------------------------------------------------
# Value parsing
# --------------------------------------------------------------------------------------


def _numbers(value: Any) -> list[float]:
    if isinstance(value, str):
        return [float(v) for v in _SPLIT.split(value.strip()) if v]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def _pairs(value: Any) -> list[tuple[float, float]]:
    """Backstress list: 'h:b, h:b' or [[h, b], ...] or [{h:, b:}, ...]; 'none' is empty."""
    if value is None:
        return []
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("", "none", "off"):
            return []
        pairs = []
        for chunk in (c for c in re.split(r"[,;]", text) if c.strip()):
            h, _, b = chunk.partition(":")
            pairs.append((float(h), float(b)))
        return pairs
    pairs = []
    for item in value:
        if isinstance(item, dict):
            pairs.append((float(item["h"]), float(item["b"])))
        else:
            h, b = item
            pairs.append((float(h), float(b)))
    return pairs


def _law(value: Any, w_min: Optional[float]) -> dict[str, float]:
    nums = _numbers(value)
    if len(nums) != len(_LAW_KEYS):
        raise ValueError(f"a damage law needs {len(_LAW_KEYS)} values w1 w2 k1 k2 k3, got {nums}")
    law = dict(zip(_LAW_KEYS, nums))
    if w_min is not None:
        law["w_min"] = w_min
    return law


# --------------------------------------------------------------------------------------
# Section builders
# --------------------------------------------------------------------------------------


def _material(section: dict[str, Any], damage: Optional[dict[str, Any]]) -> MaterialParams:
    section = dict(section)
    preset = section.pop("preset", None)
    data: dict[str, Any] = get_preset(preset).model_dump() if preset else {}
    elastic = dict(data.get("elastic", {}))
    iso = dict(data.get("isotropic", {}))
    for key in ("E", "nu"):
        if key in section:
            elastic[key] = float(section.pop(key))
    if "sigma_y" in section:
        sigma_y = float(section.pop("sigma_y"))
        iso = {"sigma0": sigma_y, "sigma_inf": sigma_y, "a": 0.0}
    for key in ("sigma0", "sigma_inf", "a"):
        if key in section:
            iso[key] = float(section.pop(key))
    if "sigma0" in iso:
        iso.setdefault("sigma_inf", iso["sigma0"])
        iso.setdefault("a", 0.0)
    if "backstress" in section:
        data["kinematic"] = _pairs(section.pop("backstress"))
    if "ell" in section:
        data["ell"] = float(section.pop("ell"))
    if section:
        raise ValueError(f"unknown [material] keys: {', '.join(sorted(section))}")
    data["elastic"], data["isotropic"] = elastic, iso
    if damage is not None:
        data["damage"] = _damage(damage, data.get("damage"))
    return MaterialParams.model_validate(data)


def _damage(section: dict[str, Any], current: Optional[dict[str, Any]]) -> Optional[dict]:
    section = dict(section)
    preset = str(section.pop("preset", "")).strip().lower()
    if preset == "none":
        if section:
            raise ValueError("damage preset 'none' takes no further keys")
        return None
    if preset == "dogbone":
        data = dogbone_damage().model_dump()
    elif preset == "ct":
        data = ct_damage().model_dump()
    elif preset == "linear":
        data = {
            "isotropic": TrilinearLaw.linear().model_dump(),
            "unilateral": TrilinearLaw.linear().model_dump(),
            "closure": ClosureMode.NONE,
        }
    elif preset:
        raise ValueError(f"Unknown damage preset '{preset}'. Allowed: ct, dogbone, linear, none")
    else:
        data = dict(current or {})

    w_min = float(section.pop("w_min")) if "w_min" in section else None
    for key in ("isotropic", "unilateral"):
        if key in section:
            data[key] = _law(section.pop(key), w_min)
        elif w_min is not None and key in data:
            data[key] = {**data[key], "w_min": w_min}
    if "alpha" in section or "m" in section:
        activation = dict(data.get("activation") or ALLOY_ACTIVATION.model_dump())
        for key in ("alpha", "m"):
            if key in section:
                activation[key] = float(section.pop(key))
        data["activation"] = activation
    if "closure" in section:
        data["closure"] = normalize_choice(section.pop("closure"), ClosureMode)
    if section:
        raise ValueError(f"unknown [damage] keys: {', '.join(sorted(section))}")
    return data


def build_scenario(
    sections: dict[str, Any], source: Optional[Path] = None, mode: Optional[RunMode] = None
) -> Scenario:
    """Validate raw sections (already parsed from INI or YAML) into a Scenario."""
    sections = {str(k).strip().lower(): (v or {}) for k, v in sections.items()}
    unknown = set(sections) - set(SECTIONS)
    if unknown:
        raise ScenarioError(f"unknown sections: {', '.join(sorted(unknown))}", source)
    if "material" not in sections or "protocol" not in sections:
        raise ScenarioError("[material] and [protocol] sections are required", source)
    head = dict(sections.get("scenario", {}))
    declared = normalize_choice(head["mode"], RunMode) if "mode" in head else None
    if mode is not None and declared is not None and declared is not mode:
        raise ScenarioError(f"scenario declares mode '{declared.value}', not '{mode.value}'", source)
    base = source.parent if source else Path.cwd()
    try:
        material = _material(sections["material"], sections.get("damage"))
        mesh = dict(sections.get("mesh", {}))
        if mesh.get("path"):
            mesh_path = Path(mesh["path"])
            mesh_path = mesh_path if mesh_path.is_absolute() else base / mesh_path
            if not mesh_path.exists():
                raise ScenarioError(f"mesh file not found: {mesh_path}", source)
            mesh["path"] = mesh_path
        output = dict(sections.get("output", {}))
        output.setdefault("prefix", head.get("name") or (source.stem if source else "run"))
        return Scenario(
            name=str(head.get("name") or (source.stem if source else "scenario")),
            mode=declared or mode or RunMode.MATPOINT,
            material=material,
            protocol=CycleProtocol(**sections["protocol"]),
            mesh=MeshSpec(**mesh),
            solver=SolverSpec(**sections.get("solver", {})),
            output=OutputSpec(**output),
            source=source,
        )
    except ScenarioError:
        raise
    except (ValidationError, ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(str(exc), source) from exc


def _read_sections(path: Path) -> dict[str, Any]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ScenarioError("YAML scenario must be a mapping of sections", path)
        return data
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep 'E' distinct from 'e'
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ScenarioError(f"malformed INI: {exc}", path) from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def load_scenario(path: str | Path, mode: Optional[RunMode | str] = None) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError("scenario file not found", path)
    if path.suffix.lower() not in SCENARIO_SUFFIXES:
        raise ScenarioError(f"unsupported scenario format (use {', '.join(SCENARIO_SUFFIXES)})", path)
    wanted = normalize_choice(mode, RunMode) if mode is not None else None
    return build_scenario(_read_sections(path), source=path, mode=wanted)
