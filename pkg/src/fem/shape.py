"""Trilinear 8-node hexahedron: shape functions, Gauss rules, strain-displacement matrix.

Local node order (xi, eta, zeta):
    0 (-,-,-)  1 (+,-,-)  2 (+,+,-)  3 (-,+,-)
    4 (-,-,+)  5 (+,-,+)  6 (+,+,+)  7 (-,+,+)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

NODE_SIGNS = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)

# Faces as (local nodes ordered counter-clockwise seen from outside, fixed axis, side)
FACES = (
    ((0, 3, 2, 1), 2, -1.0),
    ((4, 5, 6, 7), 2, 1.0),
    ((0, 1, 5, 4), 1, -1.0),
    ((3, 7, 6, 2), 1, 1.0),
    ((0, 4, 7, 3), 0, -1.0),
    ((1, 2, 6, 5), 0, 1.0),
)

_GP = 1.0 / np.sqrt(3.0)


class SingularJacobianError(RuntimeError):
    def __init__(self, element: Optional[int], det: float):
        where = f"element {element}" if element is not None else "element"
        super().__init__(f"Non-positive Jacobian determinant {det:.3e} in {where}")
        self.element = element
        self.det = det


@dataclass(frozen=True)
class ShapeEval:
    weights: np.ndarray  # (8,) shape function values
    gradients: np.ndarray  # (8, 3) physical derivatives dN/dx
    det_j: float


def gauss_rule() -> tuple[np.ndarray, np.ndarray]:
    """2x2x2 points (local coordinates) and weights."""
    points = np.array(
        [[sx * _GP, sy * _GP, sz * _GP] for sz in (-1, 1) for sy in (-1, 1) for sx in (-1, 1)]
    )
    return points, np.ones(8)


def shape_functions(local: np.ndarray) -> np.ndarray:
    xi = np.asarray(local, dtype=float)
    return np.prod(1.0 + NODE_SIGNS * xi[None, :], axis=1) / 8.0


def shape_derivatives(local: np.ndarray) -> np.ndarray:
    """dN/dxi as (8, 3)."""
    xi = np.asarray(local, dtype=float)
    terms = 1.0 + NODE_SIGNS * xi[None, :]
    out = np.empty((8, 3))
    for d in range(3):
        others = [o for o in range(3) if o != d]
        out[:, d] = NODE_SIGNS[:, d] * terms[:, others[0]] * terms[:, others[1]] / 8.0
    return out


def shape_eval(coords: np.ndarray, local: np.ndarray, element: Optional[int] = None) -> ShapeEval:
    """Shape values and physical gradients of one element at a local point."""
    local = np.asarray(local, dtype=float)
    if np.any(np.abs(local) > 1.0 + 1e-12):
        raise ValueError(f"local coordinates must lie in [-1, 1]^3, got {local}")
    d_local = shape_derivatives(local)
    jac = d_local.T @ np.asarray(coords, dtype=float)  # J_ij = dx_j / dxi_i
    det = float(np.linalg.det(jac))
    if not det > 0.0:
        raise SingularJacobianError(element, det)
    gradients = np.linalg.solve(jac, d_local.T).T
    return ShapeEval(weights=shape_functions(local), gradients=gradients, det_j=det)


def strain_displacement(gradients: np.ndarray) -> np.ndarray:
    """B (6 x 24) giving Voigt strains (xx, yy, zz, 2xy, 2yz, 2zx) from nodal (ux, uy, uz)."""
    n = gradients.shape[0]
    b = np.zeros((6, 3 * n))
    dx, dy, dz = gradients[:, 0], gradients[:, 1], gradients[:, 2]
    b[0, 0::3] = dx
    b[1, 1::3] = dy
    b[2, 2::3] = dz
    b[3, 0::3], b[3, 1::3] = dy, dx
    b[4, 1::3], b[4, 2::3] = dz, dy
    b[5, 0::3], b[5, 2::3] = dz, dx
    return b


def face_quadrature(coords: np.ndarray, face: int) -> list[tuple[np.ndarray, float]]:
    """(N at the point (8,), area weight) for the 2x2 rule on one element face."""
    _, axis, side = FACES[face]
    free = [a for a in range(3) if a != axis]
    out = []
    for s1 in (-_GP, _GP):
        for s2 in (-_GP, _GP):
            local = np.zeros(3)
            local[axis] = side
            local[free[0]], local[free[1]] = s1, s2
            d_local = shape_derivatives(local)
            tangents = d_local.T @ coords  # rows: dx/dxi_a
            area = float(np.linalg.norm(np.cross(tangents[free[0]], tangents[free[1]])))
            out.append((shape_functions(local), area))
    return out
