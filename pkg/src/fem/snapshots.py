"""Per-step field snapshots as whitespace-separated text tables.

<prefix>_nodes.txt : node_id x y z ux uy uz kbar
<prefix>_gauss.txt : elem gp k d_i d_u
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from src.core.config import get_settings
from src.fem.mesh import Mesh


def write_snapshot(
    prefix: str | Path,
    mesh: Mesh,
    u: np.ndarray,
    kbar: np.ndarray,
    gauss: dict[str, np.ndarray],
) -> tuple[Path, Path]:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    fmt = get_settings().csv_float_format
    disp = u.reshape(-1, 3)
    nodes = pd.DataFrame(
        {
            "node_id": mesh.node_ids,
            "x": mesh.coords[:, 0],
            "y": mesh.coords[:, 1],
            "z": mesh.coords[:, 2],
            "ux": disp[:, 0],
            "uy": disp[:, 1],
            "uz": disp[:, 2],
            "kbar": kbar,
        }
    )
    n_elem = mesh.n_elements
    points = pd.DataFrame(
        {
            "elem": np.repeat(mesh.element_ids, 8),
            "gp": np.tile(np.arange(1, 9), n_elem),
            "k": gauss["k"].ravel(),
            "d_i": gauss["d_i"].ravel(),
            "d_u": gauss["d_u"].ravel(),
        }
    )
    node_path = prefix.with_name(prefix.name + "_nodes.txt")
    gauss_path = prefix.with_name(prefix.name + "_gauss.txt")
    nodes.to_csv(node_path, sep=" ", index=False, float_format=fmt, lineterminator="\n")
    points.to_csv(gauss_path, sep=" ", index=False, float_format=fmt, lineterminator="\n")
    return node_path, gauss_path


def read_snapshot(prefix: str | Path) -> tuple[pd.DataFrame, pd.DataFrame]:
    prefix = Path(prefix)
    read = dict(sep=" ", float_precision="round_trip")
    return (
        pd.read_csv(prefix.with_name(prefix.name + "_nodes.txt"), **read),
        pd.read_csv(prefix.with_name(prefix.name + "_gauss.txt"), **read),
    )
