"""Quasi-static momentum balance: internal forces and tangent stiffness on hex8 meshes.

Gauss-point history is committed only when the surrounding stagger converges; assembly
therefore always integrates from the committed records and returns trial records.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from src.domain.models import MaterialParams
from src.fem.mesh import Mesh
from src.fem.shape import gauss_rule, shape_eval, strain_displacement
from src.mechanics.damage import DamageState, map_stress_for, nominal_tangent, update_damage
from src.mechanics.stress_update import PlasticState, ReturnMappingError, integrate
from src.mechanics.tensor_core import SymTensor3


class MaterialIntegrationError(RuntimeError):
    def __init__(self, element: int, gauss_point: int, cause: Exception):
        super().__init__(
            f"Material update failed in element {element}, Gauss point {gauss_point}: {cause}"
        )
        self.element = element
        self.gauss_point = gauss_point


@dataclass(frozen=True)
class GaussPointRecord:
    plastic: PlasticState
    damage: DamageState = field(default_factory=DamageState)
    strain: SymTensor3 = field(default_factory=SymTensor3.zeros)
    sigma_eff: SymTensor3 = field(default_factory=SymTensor3.zeros)
    sigma: SymTensor3 = field(default_factory=SymTensor3.zeros)
    dgamma: float = 0.0


@dataclass
class ElementGeometry:
    """Cached B matrices and volume weights of one element."""

    b: np.ndarray  # (8, 6, 24)
    dv: np.ndarray  # (8,)


def element_geometry(mesh: Mesh) -> list[ElementGeometry]:
    points, weights = gauss_rule()
    out = []
    for e in range(mesh.n_elements):
        xe = mesh.element_coords(e)
        evals = [shape_eval(xe, p, element=int(mesh.element_ids[e])) for p in points]
        out.append(
            ElementGeometry(
                b=np.array([strain_displacement(ev.gradients) for ev in evals]),
                dv=np.array([w * ev.det_j for ev, w in zip(evals, weights)]),
            )
        )
    return out


def virgin_records(mesh: Mesh, params: MaterialParams) -> list[list[GaussPointRecord]]:
    state = PlasticState.virgin(params)
    record = GaussPointRecord(plastic=state)
    return [[record] * 8 for _ in range(mesh.n_elements)]


@dataclass
class AssemblyResult:
    stiffness: csr_matrix
    internal: np.ndarray
    residual: np.ndarray  # internal - external
    records: list[list[GaussPointRecord]]  # trial records


def assemble_equilibrium(
    mesh: Mesh,
    gp_records: list[list[GaussPointRecord]],
    u: np.ndarray,
    params: MaterialParams,
    kbar_gp: Optional[np.ndarray] = None,
    external: Optional[np.ndarray] = None,
    geometry: Optional[list[ElementGeometry]] = None,
    tol: Optional[float] = None,
) -> AssemblyResult:
    """Integrate every Gauss point from its committed record at displacement *u*.

    Damage is driven by *kbar_gp* (nonlocal field at the Gauss points) when given and by
    the local plastic variable otherwise; it is frozen in the tangent.
    """
    if len(gp_records) != mesh.n_elements:
        raise ValueError(
            f"{len(gp_records)} record rows for a mesh with {mesh.n_elements} elements"
        )
    geometry = geometry or element_geometry(mesh)
    n = mesh.n_dofs
    f_int = np.zeros(n)
    rows, cols, vals = [], [], []
    trial: list[list[GaussPointRecord]] = []
    damage_params = params.damage
    for e in range(mesh.n_elements):
        dofs = mesh.element_dofs(e)
        ue = u[dofs]
        geo = geometry[e]
        ke = np.zeros((24, 24))
        row = []
        for gp in range(8):
            rec = gp_records[e][gp]
            b = geo.b[gp]
            strain = SymTensor3.from_engineering(b @ ue)
            try:
                res = integrate(rec.plastic, strain, params, tol, strain_old=rec.strain)
            except (ReturnMappingError, ValueError) as exc:
                raise MaterialIntegrationError(int(mesh.element_ids[e]), gp, exc) from exc
            damage = rec.damage
            if damage_params is not None:
                driver = res.new_state.k if kbar_gp is None else max(float(kbar_gp[e, gp]), 0.0)
                damage = update_damage(damage, driver, damage_params)
            sigma, phi = map_stress_for(res.sigma_eff, damage, damage_params)
            d_nom = nominal_tangent(res.tangent, damage.d_i, damage.d_u, phi)
            f_int[dofs] += b.T @ sigma.components * geo.dv[gp]
            ke += b.T @ d_nom @ b * geo.dv[gp]
            row.append(
                replace(
                    rec,
                    plastic=res.new_state,
                    damage=damage,
                    strain=strain,
                    sigma_eff=res.sigma_eff,
                    sigma=sigma,
                    dgamma=res.dgamma,
                )
            )
        trial.append(row)
        rows.append(np.repeat(dofs, 24))
        cols.append(np.tile(dofs, 24))
        vals.append(ke.ravel())
    stiffness = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    external = np.zeros(n) if external is None else external
    return AssemblyResult(
        stiffness=stiffness, internal=f_int, residual=f_int - external, records=trial
    )


def gauss_field(records: list[list[GaussPointRecord]], attr: str) -> np.ndarray:
    """Scalar Gauss-point quantity as (n_elem, 8): 'k', 'd_i', 'd_u' or 'dgamma'."""
    if attr == "k":
        return np.array([[r.plastic.k for r in row] for row in records])
    if attr in ("d_i", "d_u"):
        return np.array([[getattr(r.damage, attr) for r in row] for row in records])
    return np.array([[getattr(r, attr) for r in row] for row in records])
