"""Cyclic load-release runs on a notched plate (or a mesh file).

Left face clamped; the right face is pulled along x by prescribed displacements up
to the cycle peak and then unloaded by releasing those constraints in force-controlled
substeps. Force is the summed internal x-force on the right face, the opening
displacement is measured between the two notch-mouth nodes.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
import pandas as pd

from src.common.constants import LoadPhase
from src.common.logging_utils import log_context
from src.driver.export import RunResult
from src.driver.protocol import unloading_slope
from src.driver.scenario import Scenario
from src.fem.boundary import BoundaryCondition, DirichletEntry, SingularSystemError
from src.fem.equilibrium import MaterialIntegrationError
from src.fem.mesh import Mesh
from src.fem.solver import EquilibriumError, FemSolver, StaggerError, StepReport

logger = logging.getLogger("fem_run")

_SOLVER_ERRORS = (EquilibriumError, StaggerError, MaterialIntegrationError, SingularSystemError)


class FemRunError(RuntimeError):
    def __init__(self, message: str, cycle: int, step: int):
        super().__init__(f"cycle {cycle}, step {step}: {message}")
        self.cycle = cycle
        self.step = step


def clamp(nodes: np.ndarray) -> tuple[DirichletEntry, ...]:
    group = tuple(int(n) for n in nodes)
    return tuple(DirichletEntry(nodes=group, direction=d) for d in range(3))


class CyclicPull:
    """Per-run bookkeeping: load steps, release substeps and the recorded rows."""

    def __init__(self, mesh: Mesh, solver: FemSolver):
        self.mesh = mesh
        self.solver = solver
        self.right = np.asarray(mesh.node_sets["right"], dtype=int)
        self.base = clamp(mesh.node_sets["left"])
        cod = mesh.node_sets.get("cod")
        self.cod = None if cod is None or len(cod) != 2 else (int(cod[0]), int(cod[1]))
        self.rows: list[dict] = []
        self.step = 0
        self.cycle = 0

    def displacement(self) -> float:
        return float(self.solver.u[3 * self.right].mean())

    def opening(self) -> float:
        if self.cod is None:
            return self.displacement()
        a, b = self.cod
        return float(self.solver.u[3 * b] - self.solver.u[3 * a])

    def record(self, phase: LoadPhase, report: StepReport) -> None:
        self.step += 1
        gauss = self.solver.gauss_table()
        self.rows.append(
            {
                "step": self.step,
                "cycle": self.cycle,
                "phase": phase.value,
                "displacement": self.displacement(),
                "force": float(self.solver.internal_forces()[3 * self.right].sum()),
                "cod": self.opening(),
                "kbar_max": float(self.solver.kbar.max()) if self.solver.regularized else 0.0,
                "k_max": float(gauss["k"].max()),
                "d_i_max": float(gauss["d_i"].max()),
                "d_u_max": float(gauss["d_u"].max()),
                "outer_iterations": report.outer_iterations,
            }
        )

    def load_to(self, target: float, n_steps: int) -> None:
        """Ramp the right face from its current shape by a uniform shift to mean ux = target.

        A step that fails is halved and retried by the solver; one row per step.
        """
        start = self.solver.u[3 * self.right].copy()
        shift = target - start.mean()
        for j in range(1, n_steps + 1):
            values = start + shift * j / n_steps
            entries = tuple(
                DirichletEntry(nodes=(int(n),), direction=0, value=float(v))
                for n, v in zip(self.right, values)
            )
            report = self.solver.advance(BoundaryCondition(dirichlet=self.base + entries))
            self.record(LoadPhase.LOAD, report)

    def unload(self, n_substeps: int) -> None:
        self.solver.release(
            self.right, n_substeps, on_step=lambda report: self.record(LoadPhase.UNLOAD, report)
        )


def _cycle_summary(history: pd.DataFrame, scenario: Scenario) -> pd.DataFrame:
    rows = []
    for cycle, block in history.groupby("cycle", sort=True):
        load = block[block["phase"] == LoadPhase.LOAD.value]
        unload = block[block["phase"] == LoadPhase.UNLOAD.value]
        if load.empty:
            continue
        peak = load.iloc[-1]
        branch = pd.concat([load.iloc[[-1]], unload])
        rows.append(
            {
                "cycle": int(cycle),
                "phase": scenario.protocol.phase_of(int(cycle)).value,
                "peak_displacement": peak["displacement"],
                "peak_force": peak["force"],
                "peak_cod": peak["cod"],
                "residual_displacement": (
                    unload.iloc[-1]["displacement"] if not unload.empty else math.nan
                ),
                "residual_cod": unload.iloc[-1]["cod"] if not unload.empty else math.nan,
                "unloading_slope": unloading_slope(
                    branch["displacement"].to_numpy(), branch["force"].to_numpy()
                ),
                "kbar_max": block["kbar_max"].iloc[-1],
                "d_u_max": block["d_u_max"].iloc[-1],
            }
        )
    return pd.DataFrame(rows)


def run_fem(scenario: Scenario, mesh: Optional[Mesh] = None) -> RunResult:
    """Run the load-release cycles of *scenario*; snapshots go to the output directory."""
    params = scenario.material
    mesh = mesh if mesh is not None else scenario.mesh.build()
    regularized = scenario.solver.regularized and params.ell > 0.0
    solver = FemSolver(mesh, params, regularized=regularized, tol=scenario.return_mapping_tol())
    run = CyclicPull(mesh, solver)
    protocol = scenario.protocol
    n = protocol.points_per_quarter
    n_release = scenario.solver.release_substeps or n
    out = scenario.output
    snapshots = []
    logger.info(
        f"Running FE scenario '{scenario.name}': {protocol.cycles} cycles, "
        f"{mesh.n_elements} elements"
    )
    for cycle in range(1, protocol.cycles + 1):
        run.cycle = cycle
        peak, _ = protocol.extremes(cycle)
        with log_context(scenario=scenario.name, cycle=cycle):
            try:
                run.load_to(peak, n)
                if out.snapshot_every and cycle % out.snapshot_every == 0:
                    prefix = out.directory / f"{out.prefix}_c{cycle:04d}"
                    snapshots.extend(solver.snapshot(prefix))
                run.unload(n_release)
            except _SOLVER_ERRORS as exc:
                raise FemRunError(str(exc), cycle, run.step + 1) from exc
            last = run.rows[-1]
            logger.info(
                f"cycle {cycle}: peak u={peak:.4g} mm, residual cod={last['cod']:.4g} mm, "
                f"d_u max={last['d_u_max']:.4f}"
            )
    history = pd.DataFrame(run.rows)
    return RunResult(history=history, cycles=_cycle_summary(history, scenario), snapshots=snapshots)
