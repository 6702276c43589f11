"""Staggered solver: equilibrium Newton with frozen kbar, then Helmholtz, until both settle."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.sparse.linalg import spsolve

from src.core.config import get_settings
from src.domain.models import MaterialParams
from src.fem.boundary import (
    BoundaryCondition,
    DirichletEntry,
    SingularSystemError,
    release_dirichlet,
)
from src.fem.equilibrium import (
    AssemblyResult,
    GaussPointRecord,
    MaterialIntegrationError,
    assemble_equilibrium,
    element_geometry,
    gauss_field,
    virgin_records,
)
from src.fem.helmholtz import HelmholtzSolver, interpolate_to_gauss
from src.fem.mesh import Mesh
from src.fem.snapshots import write_snapshot


class EquilibriumError(RuntimeError):
    def __init__(self, message: str, residual_history: list[float]):
        super().__init__(message)
        self.residual_history = residual_history


class StaggerError(RuntimeError):
    def __init__(self, message: str, energy_history: list[float], kbar_history: list[float]):
        super().__init__(message)
        self.energy_history = energy_history
        self.kbar_history = kbar_history


_RECOVERABLE = (EquilibriumError, StaggerError, MaterialIntegrationError)


@dataclass
class StepReport:
    outer_iterations: int
    newton_iterations: list[int] = field(default_factory=list)
    energy_history: list[float] = field(default_factory=list)
    kbar_history: list[float] = field(default_factory=list)


class FemSolver:
    """One simulation: mesh, committed Gauss-point history, displacement and kbar.

    Not safe for concurrent use; create one instance per run.
    """

    def __init__(
        self,
        mesh: Mesh,
        params: MaterialParams,
        regularized: bool = True,
        tol: Optional[float] = None,
    ):
        self.settings = get_settings()
        self.logger = logging.getLogger("fem_solver")
        self.mesh = mesh
        self.params = params
        self.regularized = regularized
        self.tol = tol
        self.geometry = element_geometry(mesh)
        self.records: list[list[GaussPointRecord]] = virgin_records(mesh, params)
        self.u = np.zeros(mesh.n_dofs)
        self.kbar = np.zeros(mesh.n_nodes)
        self.bc = BoundaryCondition()
        self._last: Optional[AssemblyResult] = None
        self._force_scale = 0.0
        self.helmholtz = HelmholtzSolver(mesh, params.ell) if regularized else None
        self.logger.info(
            f"FE model: {mesh.n_elements} elements, {mesh.n_dofs} dofs, "
            f"ell={params.ell} mm, regularized={regularized}"
        )

    # ---------------------------- Equilibrium ----------------------------
    def _assemble(self, u: np.ndarray, kbar_gp: Optional[np.ndarray], f_ext: np.ndarray):
        return assemble_equilibrium(
            self.mesh, self.records, u, self.params, kbar_gp, f_ext, self.geometry, self.tol
        )

    def _newton(
        self, bc: BoundaryCondition, kbar_gp: Optional[np.ndarray], u_start: np.ndarray
    ):
        """Newton on the free dofs starting from *u_start*.

        When *bc* moves constrained dofs away from *u_start*, the first iteration is a
        tangent predictor: the prescribed increment is pushed into the free dofs through
        K_fc before any equilibrium check. Later corrections are backtracked on |R|.
        """
        cfg = self.settings
        dofs_c, values_c = bc.prescribed()
        free = np.setdiff1d(np.arange(self.mesh.n_dofs), dofs_c)
        f_ext = bc.external_forces(self.mesh)
        u = u_start.copy()
        du_c = values_c - u[dofs_c]
        predict = bool(np.any(du_c != 0.0))
        asm = self._assemble(u, kbar_gp, f_ext)
        history: list[float] = []
        for iteration in range(1, cfg.newton_max_iter + 1):
            r_free = asm.residual[free]
            reference = max(
                np.linalg.norm(f_ext),
                np.linalg.norm(asm.internal[dofs_c]) if len(dofs_c) else 0.0,
                np.linalg.norm(asm.internal),
                self._force_scale,
            )
            norm = float(np.linalg.norm(r_free))
            history.append(norm)
            self.logger.debug(f"Newton {iteration}: |R| = {norm:.3e} (ref {reference:.3e})")
            if not predict and (norm <= cfg.newton_rel_tol * reference or norm < 1e-12):
                return u, asm, iteration
            k_free = asm.stiffness[free]
            rhs = -r_free
            if predict:
                rhs = rhs - k_free[:, dofs_c] @ du_c
            du = spsolve(k_free[:, free].tocsc(), rhs)
            if not np.all(np.isfinite(du)):
                raise SingularSystemError("equilibrium system is singular")
            if predict:
                u[dofs_c] = values_c
                u[free] += du
                asm = self._assemble(u, kbar_gp, f_ext)
                predict = False
            else:
                u, asm = self._line_search(u, du, free, norm, kbar_gp, f_ext)
        raise EquilibriumError(
            f"Newton did not converge in {cfg.newton_max_iter} iterations", history
        )

    def _line_search(
        self,
        u: np.ndarray,
        du: np.ndarray,
        free: np.ndarray,
        norm: float,
        kbar_gp: Optional[np.ndarray],
        f_ext: np.ndarray,
    ) -> tuple[np.ndarray, AssemblyResult]:
        """Halve the step along *du* until the free residual drops below *norm*.

        Falls back to the trial with the smallest residual; a step whose every trial fails
        in the material update re-raises the last failure.
        """
        alpha = 1.0
        best: Optional[tuple[float, np.ndarray, AssemblyResult]] = None
        failure: Optional[MaterialIntegrationError] = None
        for _ in range(self.settings.newton_max_line_search + 1):
            trial = u.copy()
            trial[free] += alpha * du
            try:
                asm = self._assemble(trial, kbar_gp, f_ext)
            except MaterialIntegrationError as exc:
                failure = exc
            else:
                trial_norm = float(np.linalg.norm(asm.residual[free]))
                if trial_norm < norm:
                    if alpha < 1.0:
                        self.logger.debug(f"Line search accepted step length {alpha:g}")
                    return trial, asm
                if best is None or trial_norm < best[0]:
                    best = (trial_norm, trial, asm)
            alpha *= 0.5
        if best is None:
            assert failure is not None
            raise failure
        return best[1], best[2]

    # ---------------------------- Stagger ----------------------------
    def staggered_step(self, bc: BoundaryCondition) -> StepReport:
        """Solve one load step; history is committed only on convergence.

        Without regularization, damage is still driven by a frozen field during each
        Newton solve: the local k of the previous outer iteration.
        """
        cfg = self.settings
        bc.check_restraint(self.mesh.coords)
        u_start = self.u.copy()
        u = u_start
        kbar = self.kbar.copy()
        local_damage = not self.regularized and self.params.damage is not None
        k_drive = gauss_field(self.records, "k") if local_damage else None
        report = StepReport(outer_iterations=0)
        u_prev: Optional[np.ndarray] = None
        for outer in range(1, cfg.stagger_max_outer + 1):
            kbar_gp = interpolate_to_gauss(self.mesh, kbar) if self.regularized else k_drive
            u, asm, its = self._newton(bc, kbar_gp, u)
            report.newton_iterations.append(its)

            if self.regularized:
                k_gp = gauss_field(asm.records, "k")
                kbar_new = self.helmholtz.solve(k_gp)
                dk = float(np.max(np.abs(kbar_new - kbar))) if kbar.size else 0.0
                kbar = kbar_new
            elif local_damage:
                k_gp = gauss_field(asm.records, "k")
                dk = float(np.max(np.abs(k_gp - k_drive))) if k_gp.size else 0.0
                k_drive = k_gp
            else:
                dk = 0.0

            step_energy = abs(float((u - u_start) @ asm.internal)) or 1.0
            energy = (
                0.0
                if u_prev is None
                else abs(float((u - u_prev) @ asm.internal)) / step_energy
            )
            report.energy_history.append(energy)
            report.kbar_history.append(dk)
            u_prev = u
            report.outer_iterations = outer
            if energy <= cfg.stagger_energy_tol and dk <= cfg.stagger_kbar_tol:
                break
        else:
            raise StaggerError(
                f"Stagger did not converge in {cfg.stagger_max_outer} outer iterations",
                report.energy_history,
                report.kbar_history,
            )

        if dk > 0.0:
            # damage of the committed records must see the final driver field
            kbar_gp = interpolate_to_gauss(self.mesh, kbar) if self.regularized else k_drive
            u, asm, its = self._newton(bc, kbar_gp, u)
            report.newton_iterations.append(its)
        self.u = u
        self.kbar = kbar
        self.records = asm.records
        self.bc = bc
        self._last = asm
        self._force_scale = max(self._force_scale, float(np.linalg.norm(asm.internal)))
        return report

    def advance(self, bc: BoundaryCondition, max_cutbacks: Optional[int] = None) -> StepReport:
        """staggered_step that halves a failed increment and retries from the committed state.

        At most *max_cutbacks* nested halvings; the report of the last converged piece
        is returned.
        """
        cuts = self.settings.load_max_cutbacks if max_cutbacks is None else max_cutbacks
        try:
            return self.staggered_step(bc)
        except _RECOVERABLE as exc:
            if cuts <= 0:
                raise
            self.logger.warning(f"Step failed ({exc}); halving the increment ({cuts} cuts left)")
        self.advance(self.midpoint(bc), cuts - 1)
        return self.advance(bc, cuts - 1)

    def midpoint(self, target: BoundaryCondition) -> BoundaryCondition:
        """Condition halfway between the committed state and *target*.

        Dofs constrained now but free in *target* start from their reactions, so a
        released constraint unloads continuously.
        """
        dofs, values = target.prescribed()
        start_values = self.u[dofs]
        f_start = self.bc.external_forces(self.mesh)
        held, _ = self.bc.prescribed()
        freed = np.setdiff1d(held, dofs)
        f_start[freed] += self.reactions()[freed]
        f_mid = 0.5 * (f_start + target.external_forces(self.mesh))
        entries = tuple(
            DirichletEntry(nodes=(int(d) // 3,), direction=int(d) % 3, value=float(v))
            for d, v in zip(dofs, 0.5 * (start_values + values))
        )
        loads = {int(i): float(f_mid[i]) for i in np.flatnonzero(f_mid)}
        return BoundaryCondition(dirichlet=entries, point_loads=loads)

    # ---------------------------- Results ----------------------------
    def reactions(self) -> np.ndarray:
        """Internal minus external force; non-zero only on constrained dofs at equilibrium."""
        if self._last is None:
            return np.zeros(self.mesh.n_dofs)
        return self._last.residual.copy()

    def internal_forces(self) -> np.ndarray:
        return np.zeros(self.mesh.n_dofs) if self._last is None else self._last.internal.copy()

    def release(
        self,
        node_set: Iterable[int],
        n_substeps: int,
        on_step: Optional[Callable[[StepReport], None]] = None,
    ) -> list[StepReport]:
        """Unload the constrained dofs of *node_set* in *n_substeps* force-controlled steps.

        *on_step* is called after every converged substep.
        """
        node_set = [int(n) for n in node_set]
        schedule = release_dirichlet(
            self.bc, node_set, n_substeps, reactions=self.reactions(), coords=self.mesh.coords
        )
        self.logger.info(f"Releasing {len(node_set)} nodes over {n_substeps} substeps")
        reports = []
        for bc in schedule:
            reports.append(self.advance(bc))
            if on_step is not None:
                on_step(reports[-1])
        return reports

    def gauss_table(self) -> dict[str, np.ndarray]:
        return {name: gauss_field(self.records, name) for name in ("k", "d_i", "d_u")}

    def snapshot(self, prefix: str | Path) -> tuple[Path, Path]:
        return write_snapshot(prefix, self.mesh, self.u, self.kbar, self.gauss_table())
