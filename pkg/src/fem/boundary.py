"""Boundary conditions: prescribed displacements, tractions, point loads and release."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from src.fem.mesh import Mesh
from src.fem.shape import face_quadrature


class SingularSystemError(RuntimeError):
    """Remaining constraints do not suppress all rigid-body motions."""


@dataclass(frozen=True)
class DirichletEntry:
    nodes: tuple[int, ...]
    direction: int
    value: float = 0.0  # mm

    def dofs(self) -> np.ndarray:
        return 3 * np.asarray(self.nodes, dtype=int) + self.direction


@dataclass(frozen=True)
class FaceTraction:
    faces: tuple[tuple[int, int], ...]  # (element index, local face 0..5)
    traction: tuple[float, float, float]  # MPa


@dataclass(frozen=True)
class BoundaryCondition:
    dirichlet: tuple[DirichletEntry, ...] = ()
    tractions: tuple[FaceTraction, ...] = ()
    point_loads: dict[int, float] = field(default_factory=dict)  # dof -> N

    def prescribed(self) -> tuple[np.ndarray, np.ndarray]:
        """Constrained dofs and their values; later entries win on duplicates."""
        values: dict[int, float] = {}
        for entry in self.dirichlet:
            for dof in entry.dofs():
                values[int(dof)] = entry.value
        dofs = np.array(sorted(values), dtype=int)
        return dofs, np.array([values[d] for d in dofs])

    def with_value(self, direction: int, nodes: Iterable[int], value: float) -> "BoundaryCondition":
        """Copy with the entry for (nodes, direction) set to *value*."""
        key = (tuple(int(n) for n in nodes), direction)
        entries = [e for e in self.dirichlet if (e.nodes, e.direction) != key]
        entries.append(DirichletEntry(nodes=key[0], direction=direction, value=value))
        return replace(self, dirichlet=tuple(entries))

    def external_forces(self, mesh: Mesh) -> np.ndarray:
        f = np.zeros(mesh.n_dofs)
        for load in self.tractions:
            t = np.asarray(load.traction, dtype=float)
            for e, face in load.faces:
                xe = mesh.element_coords(e)
                dofs = mesh.element_dofs(e).reshape(8, 3)
                for n_vals, area in face_quadrature(xe, face):
                    f[dofs] += np.outer(n_vals, t) * area
        for dof, value in self.point_loads.items():
            f[dof] += value
        return f

    def check_restraint(self, coords: np.ndarray) -> None:
        """Rigid-body modes evaluated on the constrained dofs must have full rank."""
        dofs, _ = self.prescribed()
        if len(dofs) == 0:
            raise SingularSystemError("no displacement constraints left")
        nodes, dirs = dofs // 3, dofs % 3
        x = coords[nodes] - coords.mean(axis=0)
        modes = np.zeros((len(dofs), 6))
        modes[np.arange(len(dofs)), dirs] = 1.0
        # rotations about x, y, z: u = w cross x
        for r, w in enumerate(np.eye(3)):
            modes[:, 3 + r] = np.cross(w, x)[np.arange(len(dofs)), dirs]
        rank = np.linalg.matrix_rank(modes, tol=1e-10 * max(1.0, float(np.abs(x).max())))
        if rank < 6:
            raise SingularSystemError(
                f"constraints restrain only {rank} of 6 rigid-body modes; the system is singular"
            )


def release_dirichlet(
    bc: BoundaryCondition,
    node_set: Iterable[int],
    n_substeps: int,
    *,
    reactions: np.ndarray,
    coords: Optional[np.ndarray] = None,
) -> list[BoundaryCondition]:
    """Schedule that unloads the constrained dofs of *node_set* step-wise.

    The prescribed displacements on those nodes are replaced by point forces equal to the
    current reactions, scaled down linearly to zero over *n_substeps*; the last condition
    of the schedule leaves them traction-free.
    """
    if n_substeps < 1:
        raise ValueError(f"n_substeps must be >= 1, got {n_substeps}")
    released = set(int(n) for n in node_set)
    kept: list[DirichletEntry] = []
    freed: list[int] = []
    for entry in bc.dirichlet:
        hit = [n for n in entry.nodes if n in released]
        if not hit:
            kept.append(entry)
            continue
        freed.extend(3 * n + entry.direction for n in hit)
        rest = tuple(n for n in entry.nodes if n not in released)
        if rest:
            kept.append(replace(entry, nodes=rest))
    if not freed:
        raise ValueError("none of the given nodes carries an active displacement constraint")
    base = replace(bc, dirichlet=tuple(kept))
    if coords is not None:
        base.check_restraint(coords)
    schedule = []
    for j in range(1, n_substeps + 1):
        scale = 1.0 - j / n_substeps
        loads = dict(bc.point_loads)
        for dof in freed:
            loads[dof] = loads.get(dof, 0.0) + scale * float(reactions[dof])
        schedule.append(replace(base, point_loads=loads))
    return schedule
