"""Hex8 meshes: container, structured generators and the plain-text exchange format.

Text format::

    nodes N elements M
    <id> <x> <y> <z>                 (N lines, mm)
    <id> <n1> ... <n8> <material>    (M lines, node ids)

Floats are written with 17 significant digits, so write/read round-trips bit-exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from src.fem.shape import gauss_rule, shape_eval

logger = logging.getLogger("fem.mesh")


@dataclass
class Mesh:
    coords: np.ndarray  # (N, 3)
    elements: np.ndarray  # (M, 8) node indices (0-based, into coords)
    materials: np.ndarray = None  # (M,) integer material tag
    node_ids: np.ndarray = None  # external ids as read/written
    element_ids: np.ndarray = None
    node_sets: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 3)
        self.elements = np.asarray(self.elements, dtype=int).reshape(-1, 8)
        m = len(self.elements)
        self.materials = (
            np.zeros(m, dtype=int) if self.materials is None else np.asarray(self.materials, int)
        )
        self.node_ids = (
            np.arange(1, self.n_nodes + 1) if self.node_ids is None else np.asarray(self.node_ids)
        )
        self.element_ids = (
            np.arange(1, m + 1) if self.element_ids is None else np.asarray(self.element_ids)
        )
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= self.n_nodes):
            raise ValueError("element connectivity references nodes out of range")

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return 3 * self.n_nodes

    def element_coords(self, e: int) -> np.ndarray:
        return self.coords[self.elements[e]]

    def element_dofs(self, e: int) -> np.ndarray:
        nodes = self.elements[e]
        return (3 * nodes[:, None] + np.arange(3)[None, :]).ravel()

    def check_jacobians(self) -> None:
        """Raise SingularJacobianError for the first element with det J <= 0 at a Gauss point."""
        points, _ = gauss_rule()
        for e in range(self.n_elements):
            xe = self.element_coords(e)
            for p in points:
                shape_eval(xe, p, element=int(self.element_ids[e]))

    def nodes_where(self, axis: int, value: float, tol: float = 1e-9) -> np.ndarray:
        return np.flatnonzero(np.abs(self.coords[:, axis] - value) <= tol)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.coords.min(axis=0), self.coords.max(axis=0)

    def volume(self) -> float:
        points, weights = gauss_rule()
        total = 0.0
        for e in range(self.n_elements):
            xe = self.element_coords(e)
            total += sum(w * shape_eval(xe, p).det_j for p, w in zip(points, weights))
        return total


# --------------------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------------------


def _grid(xs: np.ndarray, ys: np.ndarray, zs: np.ndarray, keep=None) -> Mesh:
    nx, ny, nz = len(xs) - 1, len(ys) - 1, len(zs) - 1
    index = np.arange(len(xs) * len(ys) * len(zs)).reshape(len(zs), len(ys), len(xs))
    coords = np.array([[x, y, z] for z in zs for y in ys for x in xs])
    elements = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                if keep is not None and not keep(i, j, k):
                    continue
                elements.append(
                    [
                        index[k, j, i],
                        index[k, j, i + 1],
                        index[k, j + 1, i + 1],
                        index[k, j + 1, i],
                        index[k + 1, j, i],
                        index[k + 1, j, i + 1],
                        index[k + 1, j + 1, i + 1],
                        index[k + 1, j + 1, i],
                    ]
                )
    elements = np.array(elements, dtype=int)
    used = np.unique(elements)
    remap = -np.ones(len(coords), dtype=int)
    remap[used] = np.arange(len(used))
    return Mesh(coords=coords[used], elements=remap[elements])


def box_mesh(lx: float, ly: float, lz: float, nx: int, ny: int, nz: int) -> Mesh:
    mesh = _grid(np.linspace(0, lx, nx + 1), np.linspace(0, ly, ny + 1), np.linspace(0, lz, nz + 1))
    _tag_box_faces(mesh)
    return mesh


def notched_plate(
    length: float,
    height: float,
    thickness: float,
    element_size: float,
    notch_depth: float,
    notch_width: Optional[float] = None,
    nz: int = 1,
) -> Mesh:
    """Plate loaded along x with a rectangular slot cut from y=0 at mid-length.

    Named node sets: left, right, bottom, back (z=0), cod (two nodes at the notch mouth).
    """
    nx = max(int(round(length / element_size)), 2)
    ny = max(int(round(height / element_size)), 2)
    hx, hy = length / nx, height / ny
    width = hx if notch_width is None else notch_width
    n_slot = max(int(round(width / hx)), 1)
    n_depth = int(round(notch_depth / hy))
    if n_depth >= ny:
        raise ValueError("notch depth must be smaller than the plate height")
    i0 = (nx - n_slot) // 2
    slot = range(i0, i0 + n_slot)

    def keep(i: int, j: int, k: int) -> bool:
        return not (i in slot and j < n_depth)

    xs = np.linspace(0, length, nx + 1)
    mesh = _grid(xs, np.linspace(0, height, ny + 1), np.linspace(0, thickness, nz + 1), keep)
    _tag_box_faces(mesh)
    x_left, x_right = xs[i0], xs[i0 + n_slot]
    mouth = []
    for x in (x_left, x_right):
        hit = np.flatnonzero(
            (np.abs(mesh.coords[:, 0] - x) < 1e-9)
            & (np.abs(mesh.coords[:, 1]) < 1e-9)
            & (np.abs(mesh.coords[:, 2]) < 1e-9)
        )
        mouth.append(int(hit[0]))
    mesh.node_sets["cod"] = np.array(mouth)
    logger.debug(
        f"Notched plate: {mesh.n_elements} elements, {mesh.n_nodes} nodes, h={hx:.4g} mm"
    )
    return mesh


def _tag_box_faces(mesh: Mesh) -> None:
    lo, hi = mesh.bounds()
    mesh.node_sets.update(
        left=mesh.nodes_where(0, lo[0]),
        right=mesh.nodes_where(0, hi[0]),
        bottom=mesh.nodes_where(1, lo[1]),
        top=mesh.nodes_where(1, hi[1]),
        back=mesh.nodes_where(2, lo[2]),
        front=mesh.nodes_where(2, hi[2]),
    )


# --------------------------------------------------------------------------------------
# Text IO
# --------------------------------------------------------------------------------------


def write_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    lines = [f"nodes {mesh.n_nodes} elements {mesh.n_elements}"]
    for nid, (x, y, z) in zip(mesh.node_ids, mesh.coords):
        lines.append(f"{nid} {x:.17g} {y:.17g} {z:.17g}")
    for eid, conn, mat in zip(mesh.element_ids, mesh.elements, mesh.materials):
        ids = " ".join(str(mesh.node_ids[n]) for n in conn)
        lines.append(f"{eid} {ids} {mat}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_mesh(path: str | Path) -> Mesh:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Mesh file not found at {path}")
    rows = [ln.split() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty mesh file")
    header = rows[0]
    if len(header) != 4 or header[0] != "nodes" or header[2] != "elements":
        raise ValueError(f"{path}: expected header 'nodes N elements M', got {' '.join(header)}")
    n, m = int(header[1]), int(header[3])
    node_rows, elem_rows = rows[1 : 1 + n], rows[1 + n : 1 + n + m]
    if len(node_rows) != n or len(elem_rows) != m or any(len(r) != 10 for r in elem_rows):
        raise ValueError(f"{path}: node/element block sizes do not match the header")
    node_ids = np.array([int(r[0]) for r in node_rows])
    coords = np.array([[float(v) for v in r[1:4]] for r in node_rows])
    lookup = {nid: i for i, nid in enumerate(node_ids)}
    try:
        elements = np.array([[lookup[int(v)] for v in r[1:9]] for r in elem_rows])
    except KeyError as exc:
        raise ValueError(f"{path}: element references unknown node id {exc}") from exc
    mesh = Mesh(
        coords=coords,
        elements=elements,
        materials=np.array([int(r[9]) for r in elem_rows]),
        node_ids=node_ids,
        element_ids=np.array([int(r[0]) for r in elem_rows]),
    )
    _tag_box_faces(mesh)
    return mesh
