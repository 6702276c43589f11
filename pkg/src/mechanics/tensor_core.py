"""Symmetric second-order tensors in 3D.

Storage order is (xx, yy, zz, xy, yz, zx) with *tensor* shear components, i.e. the
off-diagonal entries of the 3x3 matrix. Nothing is doubled in storage; the factor 2
only appears where it belongs:

- `ddot` / `norm` count each shear entry twice (a:b = sum_ij a_ij b_ij)
- `engineering()` returns Voigt strains with gamma_ij = 2 eps_ij
- `mandel()` scales shear by sqrt(2) so that a:b is a plain dot product

Fourth-order operators are handled as 6x6 Mandel matrices.

Units are MPa, mm, N and dimensionless strain throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import linalg as la

SQRT2 = np.sqrt(2.0)
_SHEAR = slice(3, 6)
# (row, col) of each stored component in the 3x3 matrix
_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0))
_MANDEL_SCALE = np.array([1.0, 1.0, 1.0, SQRT2, SQRT2, SQRT2])
_UNIT = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

# Relative gap below which two principal values count as repeated
EIGEN_CLUSTER_TOL = 1e-12


class SymTensor3:
    """Immutable symmetric 3x3 tensor stored as six components."""

    __slots__ = ("_v",)
    # numpy scalars on the left defer to __rmul__
    __array_ufunc__ = None

    def __init__(self, components: Iterable[float]):
        v = np.array(components, dtype=float).reshape(6)
        v.setflags(write=False)
        self._v = v

    # ---------------------------- Construction helpers ----------------------------
    @classmethod
    def zeros(cls) -> "SymTensor3":
        return cls(np.zeros(6))

    @classmethod
    def identity(cls) -> "SymTensor3":
        return cls(_UNIT)

    @classmethod
    def diag(cls, xx: float, yy: float, zz: float) -> "SymTensor3":
        return cls((xx, yy, zz, 0.0, 0.0, 0.0))

    @classmethod
    def from_components(
        cls,
        xx: float = 0.0,
        yy: float = 0.0,
        zz: float = 0.0,
        xy: float = 0.0,
        yz: float = 0.0,
        zx: float = 0.0,
    ) -> "SymTensor3":
        return cls((xx, yy, zz, xy, yz, zx))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SymTensor3":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        sym = 0.5 * (m + m.T)
        return cls([sym[i, j] for i, j in _INDEX])

    @classmethod
    def from_mandel(cls, v: np.ndarray) -> "SymTensor3":
        return cls(np.asarray(v, dtype=float) / _MANDEL_SCALE)

    @classmethod
    def from_engineering(cls, v: np.ndarray) -> "SymTensor3":
        w = np.array(v, dtype=float)
        w[_SHEAR] *= 0.5
        return cls(w)

    # ---------------------------- Views ----------------------------
    @property
    def components(self) -> np.ndarray:
        return self._v

    def to_matrix(self) -> np.ndarray:
        xx, yy, zz, xy, yz, zx = self._v
        return np.array([[xx, xy, zx], [xy, yy, yz], [zx, yz, zz]])

    def mandel(self) -> np.ndarray:
        return self._v * _MANDEL_SCALE

    def engineering(self) -> np.ndarray:
        w = self._v.copy()
        w[_SHEAR] *= 2.0
        return w

    # ---------------------------- Algebra ----------------------------
    def trace(self) -> float:
        return float(self._v[0] + self._v[1] + self._v[2])

    def ddot(self, other: "SymTensor3") -> float:
        a, b = self._v, other._v
        return float(a[:3] @ b[:3] + 2.0 * (a[3:] @ b[3:]))

    def norm(self) -> float:
        return float(np.sqrt(self.ddot(self)))

    def __add__(self, other: "SymTensor3") -> "SymTensor3":
        return SymTensor3(self._v + other._v)

    def __sub__(self, other: "SymTensor3") -> "SymTensor3":
        return SymTensor3(self._v - other._v)

    def __neg__(self) -> "SymTensor3":
        return SymTensor3(-self._v)

    def __mul__(self, scalar: float) -> "SymTensor3":
        return SymTensor3(self._v * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "SymTensor3":
        return SymTensor3(self._v / float(scalar))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymTensor3) and np.array_equal(self._v, other._v)

    def __hash__(self) -> int:
        return hash(self._v.tobytes())

    def allclose(self, other: "SymTensor3", rtol: float = 1e-10, atol: float = 0.0) -> bool:
        scale = max(self.norm(), other.norm(), 1.0) if atol == 0.0 else 1.0
        return bool(np.allclose(self._v, other._v, rtol=0.0, atol=max(atol, rtol * scale)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self._v)))

    def __repr__(self) -> str:
        xx, yy, zz, xy, yz, zx = (float(c) for c in self._v)
        return f"SymTensor3(xx={xx:g}, yy={yy:g}, zz={zz:g}, xy={xy:g}, yz={yz:g}, zx={zx:g})"


@dataclass(frozen=True)
class PrincipalDecomposition:
    """Principal values in descending order and the matching unit directions (rows)."""

    values: np.ndarray
    directions: np.ndarray

    def reassemble(self) -> SymTensor3:
        m = sum(lam * np.outer(e, e) for lam, e in zip(self.values, self.directions))
        return SymTensor3.from_matrix(m)


# --------------------------------------------------------------------------------------
# Invariants and splits
# --------------------------------------------------------------------------------------


def mean(t: SymTensor3) -> float:
    return t.trace() / 3.0


def dev(t: SymTensor3) -> SymTensor3:
    v = np.array(t.components)
    v[:3] -= mean(t)
    return SymTensor3(v)


def j2(t: SymTensor3) -> float:
    s = dev(t)
    return 0.5 * s.ddot(s)


def von_mises(t: SymTensor3) -> float:
    return float(np.sqrt(3.0 * j2(t)))


def ramp(x: float) -> float:
    """Positive part: 0 for x <= 0, x otherwise."""
    return x if x > 0.0 else 0.0


def principal(t: SymTensor3) -> PrincipalDecomposition:
    """Eigen-decomposition with a deterministic basis.

    Values are sorted descending. Inside a cluster of repeated values the basis is
    rebuilt from the coordinate axes (Gram-Schmidt in x, y, z order), so an isotropic
    tensor always returns the identity basis. Each direction is signed so that its
    largest-magnitude component is positive.
    """
    values, vectors = la.eigh(t.to_matrix())
    order = np.argsort(values)[::-1]
    values = values[order]
    directions = vectors[:, order].T.copy()

    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and values[start] - values[stop] <= EIGEN_CLUSTER_TOL * scale:
            stop += 1
        if stop - start > 1:
            directions[start:stop] = _axis_aligned_basis(directions[start:stop])
            values[start:stop] = np.mean(values[start:stop])
        start = stop

    for row in directions:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0
    return PrincipalDecomposition(values=values, directions=directions)


def _axis_aligned_basis(subspace: np.ndarray) -> np.ndarray:
    projector = subspace.T @ subspace
    basis: list[np.ndarray] = []
    for axis in np.eye(3):
        v = projector @ axis
        for b in basis:
            v = v - (v @ b) * b
        length = np.linalg.norm(v)
        if length > 1e-8:
            basis.append(v / length)
        if len(basis) == len(subspace):
            break
    return np.array(basis)


def _spectral_sum(decomp: PrincipalDecomposition, fn) -> SymTensor3:
    m = np.zeros((3, 3))
    for lam, e in zip(decomp.values, decomp.directions):
        m += fn(float(lam)) * np.outer(e, e)
    return SymTensor3.from_matrix(m)


def tensile_part(t: SymTensor3) -> SymTensor3:
    return _spectral_sum(principal(t), ramp)


def compressive_part(t: SymTensor3) -> SymTensor3:
    return _spectral_sum(principal(t), lambda lam: -ramp(-lam))


def rotate(t: SymTensor3, rotation: np.ndarray) -> SymTensor3:
    r = np.asarray(rotation, dtype=float)
    return SymTensor3.from_matrix(r @ t.to_matrix() @ r.T)


# --------------------------------------------------------------------------------------
# Fourth-order operators (6x6, Mandel basis)
# --------------------------------------------------------------------------------------


def identity_operator() -> np.ndarray:
    return np.eye(6)


def volumetric_projector() -> np.ndarray:
    return np.outer(_UNIT, _UNIT) / 3.0


def deviatoric_projector() -> np.ndarray:
    return np.eye(6) - volumetric_projector()


def mandel_to_voigt(operator: np.ndarray) -> np.ndarray:
    """Convert a Mandel operator to Voigt form acting on engineering shear strains."""
    scale = 1.0 / _MANDEL_SCALE
    return scale[:, None] * operator * scale[None, :]


def voigt_to_mandel(operator: np.ndarray) -> np.ndarray:
    return _MANDEL_SCALE[:, None] * operator * _MANDEL_SCALE[None, :]


__all__ = [
    "SymTensor3",
    "PrincipalDecomposition",
    "mean",
    "dev",
    "j2",
    "von_mises",
    "ramp",
    "principal",
    "tensile_part",
    "compressive_part",
    "rotate",
    "identity_operator",
    "volumetric_projector",
    "deviatoric_projector",
    "mandel_to_voigt",
    "voigt_to_mandel",
]
