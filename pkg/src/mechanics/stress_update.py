"""Implicit return mapping for J2 plasticity in the effective configuration.

Backward Euler on the flow rule and on every Armstrong-Frederick backstress reduces the
update to one scalar equation in the plastic multiplier increment dg:

    f(dg) = sqrt(3/2) |eta(dg)| - 3 G dg - sum_k h_k dg / (1 + b_k dg) - sigma_y(k + dg)
    eta(dg) = s_trial - sum_k beta_k_old / (1 + b_k dg)

f is strictly decreasing (f' <= -3G), so the root is bracketed in [0, dg_max] and found
by Newton iterations with a bisection fallback. Tensors are handled as Mandel vectors
inside the solver; results go back out as SymTensor3.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.core.config import get_settings
from src.domain.models import ElasticConstants, MaterialParams
from src.mechanics.hardening import yield_stress, yield_stress_slope
from src.mechanics.tensor_core import (
    SymTensor3,
    deviatoric_projector,
    j2,
    mandel_to_voigt,
    volumetric_projector,
)

SQRT32 = np.sqrt(1.5)

logger = logging.getLogger("stress_update")


class ReturnMappingError(RuntimeError):
    def __init__(self, message: str, last_residual: float, iterations: int):
        super().__init__(f"{message} (last residual {last_residual:.3e}, {iterations} iterations)")
        self.last_residual = last_residual
        self.iterations = iterations


@dataclass(frozen=True)
class PlasticState:
    eps_p: SymTensor3 = field(default_factory=SymTensor3.zeros)
    k: float = 0.0
    backstresses: tuple[SymTensor3, ...] = ()

    @classmethod
    def virgin(cls, params: MaterialParams) -> "PlasticState":
        n = len(params.kinematic)
        return cls(backstresses=tuple(SymTensor3.zeros() for _ in range(n)))

    @property
    def beta_total(self) -> SymTensor3:
        total = SymTensor3.zeros()
        for b in self.backstresses:
            total = total + b
        return total


@dataclass(frozen=True)
class UpdateResult:
    new_state: PlasticState
    sigma_eff: SymTensor3
    dgamma: float
    tangent: np.ndarray  # 6x6 Voigt, engineering shear strains
    residual: float = 0.0
    iterations: int = 0

    @property
    def plastic(self) -> bool:
        return self.dgamma > 0.0


# --------------------------------------------------------------------------------------
# Elasticity
# --------------------------------------------------------------------------------------


def _elastic_mandel(elastic: ElasticConstants) -> np.ndarray:
    return (
        3.0 * elastic.bulk_modulus * volumetric_projector()
        + 2.0 * elastic.shear_modulus * deviatoric_projector()
    )


def elastic_stiffness(elastic: ElasticConstants) -> np.ndarray:
    """Isotropic stiffness, Voigt order (xx, yy, zz, xy, yz, zx), engineering shear."""
    return mandel_to_voigt(_elastic_mandel(elastic))


def elastic_stress(elastic: ElasticConstants, strain: SymTensor3) -> SymTensor3:
    return SymTensor3.from_mandel(_elastic_mandel(elastic) @ strain.mandel())


# --------------------------------------------------------------------------------------
# Yield function
# --------------------------------------------------------------------------------------


def yield_function(sigma_eff: SymTensor3, beta_total: SymTensor3, k: float, iso) -> float:
    return float(np.sqrt(3.0 * j2(sigma_eff - beta_total)) - yield_stress(iso, k))


def _screen(state: PlasticState, *strains: SymTensor3) -> None:
    tensors = (state.eps_p, *state.backstresses, *strains)
    if not all(t.is_finite() for t in tensors) or not np.isfinite(state.k):
        raise ValueError("NaN or Inf in strain or plastic state")
    if state.k < 0.0:
        raise ValueError(f"plastic internal variable must be >= 0, got {state.k}")


def _tolerance(params: MaterialParams, tol: Optional[float]) -> float:
    if tol is None:
        tol = get_settings().return_mapping_rel_tol * params.isotropic.sigma0
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    return tol


# --------------------------------------------------------------------------------------
# Implicit update
# --------------------------------------------------------------------------------------


def integrate(
    state: PlasticState,
    strain_new: SymTensor3,
    params: MaterialParams,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    *,
    strain_old: Optional[SymTensor3] = None,
    max_bisections: Optional[int] = None,
) -> UpdateResult:
    """Advance *state* to the total strain *strain_new*.

    If the scalar solve fails and *strain_old* is known, the increment is split in two
    halves recursively (at most *max_bisections* levels) before giving up.
    """
    cfg = get_settings()
    tol = _tolerance(params, tol)
    max_iter = cfg.return_mapping_max_iter if max_iter is None else max_iter
    if len(state.backstresses) != len(params.kinematic):
        raise ValueError(
            f"state carries {len(state.backstresses)} backstresses, "
            f"material defines {len(params.kinematic)}"
        )
    _screen(state, strain_new, *(s for s in (strain_old,) if s is not None))
    try:
        return _return_map(state, strain_new, params, tol, max_iter)
    except ReturnMappingError:
        levels = cfg.return_mapping_max_bisections if max_bisections is None else max_bisections
        if strain_old is None or levels <= 0:
            raise
        logger.warning(f"Return mapping failed, bisecting increment ({levels} levels left)")
        mid = 0.5 * (strain_old + strain_new)
        first = integrate(
            state, mid, params, tol, max_iter, strain_old=strain_old, max_bisections=levels - 1
        )
        second = integrate(
            first.new_state,
            strain_new,
            params,
            tol,
            max_iter,
            strain_old=mid,
            max_bisections=levels - 1,
        )
        # the composed map has no single consistent tangent; report the last half
        return UpdateResult(
            new_state=second.new_state,
            sigma_eff=second.sigma_eff,
            dgamma=first.dgamma + second.dgamma,
            tangent=second.tangent,
            residual=second.residual,
            iterations=first.iterations + second.iterations,
        )


def _return_map(
    state: PlasticState,
    strain_new: SymTensor3,
    params: MaterialParams,
    tol: float,
    max_iter: int,
) -> UpdateResult:
    elastic, iso = params.elastic, params.isotropic
    G, K = elastic.shear_modulus, elastic.bulk_modulus
    c_el = _elastic_mandel(elastic)

    sigma_trial = c_el @ (strain_new - state.eps_p).mandel()
    beta_old = np.array([b.mandel() for b in state.backstresses]).reshape(-1, 6)
    phi_trial = float(
        SQRT32 * np.linalg.norm(_dev(sigma_trial) - beta_old.sum(axis=0))
        - yield_stress(iso, state.k)
    )
    if phi_trial <= tol:
        return UpdateResult(
            new_state=state,
            sigma_eff=SymTensor3.from_mandel(sigma_trial),
            dgamma=0.0,
            tangent=mandel_to_voigt(c_el),
            residual=phi_trial,
        )

    h = np.array([c.h for c in params.kinematic.components])
    b = np.array([c.b for c in params.kinematic.components])
    s_trial = _dev(sigma_trial)
    k_old = state.k

    def evaluate(dg: float):
        denom = 1.0 + b * dg
        eta = s_trial - (beta_old / denom[:, None]).sum(axis=0)
        eta_norm = float(np.linalg.norm(eta))
        f = (
            SQRT32 * eta_norm
            - 3.0 * G * dg
            - float(np.sum(h * dg / denom))
            - yield_stress(iso, k_old + dg)
        )
        d_eta = ((b / denom**2)[:, None] * beta_old).sum(axis=0)
        hard = 3.0 * G + float(np.sum(h / denom**2)) + yield_stress_slope(iso, k_old + dg)
        df = SQRT32 * float(eta @ d_eta) / eta_norm - hard if eta_norm > 0.0 else -hard
        return f, df, eta, eta_norm, d_eta, hard

    lo = 0.0
    hi = SQRT32 * (np.linalg.norm(s_trial) + np.linalg.norm(beta_old, axis=1).sum()) / (3.0 * G)
    dg = phi_trial / (3.0 * G + float(np.sum(h)) + yield_stress_slope(iso, k_old))
    dg = min(max(dg, lo), hi)

    f = phi_trial
    for iteration in range(1, max_iter + 1):
        f, df, eta, eta_norm, d_eta, hard = evaluate(dg)
        if abs(f) <= tol:
            break
        if f > 0.0:
            lo = dg
        else:
            hi = dg
        candidate = dg - f / df if df < 0.0 else np.nan
        dg = candidate if lo < candidate < hi else 0.5 * (lo + hi)
    else:
        raise ReturnMappingError("return mapping did not converge", f, max_iter)

    n_hat = eta / eta_norm
    flow = SQRT32 * n_hat  # (3/2) xi / q in Mandel form
    denom = 1.0 + b * dg
    beta_new = (beta_old + (2.0 / 3.0) * h[:, None] * dg * flow[None, :]) / denom[:, None]
    sigma = sigma_trial - 2.0 * G * dg * flow
    eps_p = state.eps_p.mandel() + dg * flow

    new_state = PlasticState(
        eps_p=SymTensor3.from_mandel(eps_p),
        k=k_old + dg,
        backstresses=tuple(SymTensor3.from_mandel(row) for row in beta_new),
    )

    # consistent linearization of the converged map
    a = 2.0 * G * SQRT32
    c = SQRT32 / (hard - SQRT32 * float(n_hat @ d_eta))
    p_dev = deviatoric_projector()
    nn = np.outer(n_hat, n_hat)
    q_proj = p_dev - nn
    r = a * dg / eta_norm
    dev_op = p_dev - r * q_proj - a * c * nn - r * c * np.outer(q_proj @ d_eta, n_hat)
    tangent = 3.0 * K * volumetric_projector() + 2.0 * G * dev_op

    return UpdateResult(
        new_state=new_state,
        sigma_eff=SymTensor3.from_mandel(sigma),
        dgamma=float(dg),
        tangent=mandel_to_voigt(tangent),
        residual=float(f),
        iterations=iteration,
    )


def _dev(v: np.ndarray) -> np.ndarray:
    out = v.copy()
    out[:3] -= v[:3].sum() / 3.0
    return out


# --------------------------------------------------------------------------------------
# Explicit substep oracle
# --------------------------------------------------------------------------------------


def substep_integrate(
    state: PlasticState,
    strain_new: SymTensor3,
    params: MaterialParams,
    n_sub: int,
    *,
    strain_old: SymTensor3,
) -> UpdateResult:
    """Forward Euler over *n_sub* equal sub-increments with drift correction.

    Reference solution for the implicit update; the returned tangent is the elastic one.
    """
    if n_sub < 1:
        raise ValueError(f"n_sub must be >= 1, got {n_sub}")
    _screen(state, strain_new, strain_old)
    cfg = get_settings()
    elastic, iso = params.elastic, params.isotropic
    G = elastic.shear_modulus
    c_el = _elastic_mandel(elastic)
    h = np.array([c.h for c in params.kinematic.components])
    b = np.array([c.b for c in params.kinematic.components])
    drift_tol = cfg.substep_drift_tol * iso.sigma0

    eps_old = strain_old.mandel()
    d_eps = (strain_new.mandel() - eps_old) / n_sub
    eps_p = state.eps_p.mandel().copy()
    beta = np.array([bk.mandel() for bk in state.backstresses]).reshape(-1, 6)
    k = state.k
    dg_total = 0.0

    def correct(sigma: np.ndarray, beta: np.ndarray, k: float):
        xi = _dev(sigma) - beta.sum(axis=0)
        q = SQRT32 * np.linalg.norm(xi)
        phi = q - yield_stress(iso, k)
        if phi <= 0.0 or q == 0.0:
            return None
        flow = 1.5 * xi / q
        # d(phi)/d(dg) along the current normal
        recall = float(np.sum(b * (beta @ flow)))
        modulus = 3.0 * G + float(np.sum(h)) - recall + yield_stress_slope(iso, k)
        return phi, flow, phi / modulus

    for j in range(1, n_sub + 1):
        sigma = c_el @ (eps_old + j * d_eps - eps_p)
        for attempt in range(1 + cfg.substep_max_corrections):
            step = correct(sigma, beta, k)
            if step is None:
                break
            phi, flow, dg = step
            if attempt > 0 and phi <= drift_tol:
                break
            eps_p = eps_p + dg * flow
            beta = beta + dg * ((2.0 / 3.0) * h[:, None] * flow[None, :] - b[:, None] * beta)
            k += dg
            dg_total += dg
            sigma = c_el @ (eps_old + j * d_eps - eps_p)

    sigma = c_el @ (strain_new.mandel() - eps_p)
    new_state = PlasticState(
        eps_p=SymTensor3.from_mandel(eps_p),
        k=k,
        backstresses=tuple(SymTensor3.from_mandel(row) for row in beta),
    )
    if dg_total == 0.0:
        new_state = state
    return UpdateResult(
        new_state=new_state,
        sigma_eff=SymTensor3.from_mandel(sigma),
        dgamma=dg_total,
        tangent=mandel_to_voigt(c_el),
        residual=yield_function(
            SymTensor3.from_mandel(sigma), new_state.beta_total, new_state.k, iso
        ),
        iterations=n_sub,
    )
