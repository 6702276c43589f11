"""Gradient regularization: kbar - ell^2 lap(kbar) = k with homogeneous Neumann boundary.

The weak form gives (M + ell^2 L) kbar = f with f_i = int N_i k dV. The operator only
depends on the mesh and ell, so it is factorized once and reused for every source.
By default M is row-sum lumped, which keeps the discrete maximum principle; the
consistent mass is available through settings.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix, csc_matrix
from scipy.sparse.linalg import factorized

from src.core.config import get_settings
from src.fem.mesh import Mesh
from src.fem.shape import gauss_rule, shape_eval, shape_functions

logger = logging.getLogger("fem.helmholtz")


class AssemblyError(RuntimeError):
    pass


def _element_blocks(mesh: Mesh):
    points, weights = gauss_rule()
    for e in range(mesh.n_elements):
        xe = mesh.element_coords(e)
        evals = [shape_eval(xe, p, element=int(mesh.element_ids[e])) for p in points]
        yield e, evals, weights


def assemble_helmholtz(
    mesh: Mesh,
    ell: float,
    source: Optional[np.ndarray] = None,
    lumped: Optional[bool] = None,
) -> tuple[csc_matrix, np.ndarray]:
    """System matrix and right-hand side for a Gauss-point source of shape (n_elem, 8)."""
    if ell < 0.0:
        raise ValueError(f"characteristic length must be >= 0, got {ell}")
    lumped = get_settings().helmholtz_lumped_mass if lumped is None else lumped
    n = mesh.n_nodes
    rows, cols, mass_vals, diff_vals = [], [], [], []
    rhs = np.zeros(n)
    for e, evals, weights in _element_blocks(mesh):
        nodes = mesh.elements[e]
        me = np.zeros((8, 8))
        ke = np.zeros((8, 8))
        for gp, (ev, w) in enumerate(zip(evals, weights)):
            dv = w * ev.det_j
            me += np.outer(ev.weights, ev.weights) * dv
            ke += ev.gradients @ ev.gradients.T * dv
            if source is not None:
                rhs[nodes] += ev.weights * source[e, gp] * dv
        if lumped:
            me = np.diag(me.sum(axis=1))
        rows.append(np.repeat(nodes, 8))
        cols.append(np.tile(nodes, 8))
        mass_vals.append(me.ravel())
        diff_vals.append(ke.ravel())
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    mass = coo_matrix((np.concatenate(mass_vals), (rows, cols)), shape=(n, n)).tocsc()
    diffusion = coo_matrix((np.concatenate(diff_vals), (rows, cols)), shape=(n, n)).tocsc()
    matrix = (mass + ell**2 * diffusion).tocsc()
    diag = matrix.diagonal()
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise AssemblyError(
            f"Helmholtz operator is not positive definite (diagonal {diag[bad]:.3e} at node "
            f"{mesh.node_ids[bad]}); check the mesh for unconnected nodes"
        )
    return matrix, rhs


def nodal_volumes(mesh: Mesh) -> np.ndarray:
    """int N_i dV for every node."""
    out = np.zeros(mesh.n_nodes)
    for e, evals, weights in _element_blocks(mesh):
        for ev, w in zip(evals, weights):
            out[mesh.elements[e]] += ev.weights * w * ev.det_j
    return out


class HelmholtzSolver:
    """Factorized operator for repeated solves on one mesh."""

    def __init__(self, mesh: Mesh, ell: float, lumped: Optional[bool] = None):
        self.mesh = mesh
        self.ell = ell
        self.lumped = get_settings().helmholtz_lumped_mass if lumped is None else lumped
        self.matrix, _ = assemble_helmholtz(mesh, ell, lumped=self.lumped)
        self._solve = factorized(self.matrix)
        self._load = self._load_operator()
        logger.debug(f"Helmholtz operator factorized: {mesh.n_nodes} nodes, ell={ell} mm")

    def _load_operator(self) -> csc_matrix:
        # maps Gauss-point values (flattened n_elem*8) to int N_i k dV
        rows, cols, vals = [], [], []
        for e, evals, weights in _element_blocks(self.mesh):
            for gp, (ev, w) in enumerate(zip(evals, weights)):
                rows.append(self.mesh.elements[e])
                cols.append(np.full(8, 8 * e + gp))
                vals.append(ev.weights * w * ev.det_j)
        shape = (self.mesh.n_nodes, 8 * self.mesh.n_elements)
        return coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape
        ).tocsc()

    def solve(self, source: np.ndarray) -> np.ndarray:
        """Nodal kbar for Gauss-point values of k, shape (n_elem, 8)."""
        rhs = self._load @ np.asarray(source, dtype=float).ravel()
        return self._solve(rhs)

    def projection(self, source: np.ndarray) -> np.ndarray:
        """Lumped L2 projection (the ell -> 0 limit with lumped mass)."""
        rhs = self._load @ np.asarray(source, dtype=float).ravel()
        return rhs / np.asarray(self._load.sum(axis=1)).ravel()


def interpolate_to_gauss(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """Nodal field at every Gauss point, shape (n_elem, 8)."""
    points, _ = gauss_rule()
    shape_table = np.array([shape_functions(p) for p in points])  # (8 gp, 8 nodes)
    return nodal[mesh.elements] @ shape_table.T


__all__ = [
    "assemble_helmholtz",
    "HelmholtzSolver",
    "AssemblyError",
    "nodal_volumes",
    "interpolate_to_gauss",
]
