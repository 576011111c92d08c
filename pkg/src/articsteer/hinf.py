"""Full-information H-infinity steering synthesis.

The uncertainty channel of the robust regulator is reinterpreted as an
exogenous disturbance w entering through H, and the controller bounds the
ratio of the weighted regulation cost to the disturbance energy by gamma^2.
The stationary solution comes from an indefinite-weight Riccati recursion
over the stacked disturbance/control input; existence at a given gamma is
an inertia condition on the inner block, checked every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import DiscreteModel
from .rlqr import DIVERGENCE_CAP


class GammaInfeasibleError(RuntimeError):
    """The attenuation level cannot be met by any full-information policy."""


@dataclass(frozen=True)
class HinfConfig:
    """Attenuation level and weights of the disturbance rejection problem.

    Attributes:
        gamma: attenuation bound on the cost/disturbance ratio.
        qc_mat: control weight (m x m), positive definite.
        rc_mat: state weight (n x n), positive definite.
        pc_terminal: terminal state weight; defaults to rc_mat.
        qw_mat: disturbance weight; defaults to identity.
        pi0: initial-state weight in the energy ratio; defaults to identity.
    """

    gamma: float
    qc_mat: np.ndarray
    rc_mat: np.ndarray
    pc_terminal: np.ndarray | None = None
    qw_mat: np.ndarray | None = None
    pi0: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        qc = np.atleast_2d(np.asarray(self.qc_mat, dtype=float))
        rc = np.atleast_2d(np.asarray(self.rc_mat, dtype=float))
        for name, mat in (("qc_mat", qc), ("rc_mat", rc)):
            if mat.shape[0] != mat.shape[1] or not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
                raise ValueError(f"{name} must be square symmetric")
            if np.linalg.eigvalsh(mat)[0] <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        object.__setattr__(self, "qc_mat", qc)
        object.__setattr__(self, "rc_mat", rc)
        if self.pc_terminal is None:
            object.__setattr__(self, "pc_terminal", rc.copy())
        if self.pi0 is None:
            object.__setattr__(self, "pi0", np.eye(rc.shape[0]))


def _inner_block(p: np.ndarray, g1: np.ndarray, g2: np.ndarray, cfg: HinfConfig) -> np.ndarray:
    """Indefinite inner weight over the stacked input [w; u]."""
    pw = g1.shape[1]
    qw = cfg.qw_mat if cfg.qw_mat is not None else np.eye(pw)
    top = np.hstack([g1.T @ p @ g1 - cfg.gamma**2 * qw, g1.T @ p @ g2])
    bot = np.hstack([g2.T @ p @ g1, cfg.qc_mat + g2.T @ p @ g2])
    return np.vstack([top, bot])


def hinf_riccati(
    model: DiscreteModel,
    g1: np.ndarray,
    cfg: HinfConfig,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Stationary solution of the indefinite-weight Riccati recursion.

    Args:
        model: discrete plant supplying F and the control input map G.
        g1: disturbance input map (n x p).
        cfg: attenuation level and weights.
        tol: relative fixed-point tolerance on P.
        max_iter: iteration budget.

    Returns:
        The stationary cost matrix P, symmetric positive semidefinite.

    Raises:
        GammaInfeasibleError: when the inner block loses its saddle inertia
            (gamma too small), when the recursion diverges, or when it fails
            to settle within the budget.
    """
    f, g2 = model.f_mat, model.g_mat
    g1 = np.atleast_2d(np.asarray(g1, dtype=float))
    n = f.shape[0]
    pw, m = g1.shape[1], g2.shape[1]
    p = np.asarray(cfg.pc_terminal, dtype=float).copy()
    bt = np.hstack([g1, g2])
    for it in range(1, max_iter + 1):
        omega = _inner_block(p, g1, g2, cfg)
        eigs = np.linalg.eigvalsh(omega)
        neg, pos = int(np.sum(eigs < 0.0)), int(np.sum(eigs > 0.0))
        if neg != pw or pos != m:
            worst = eigs[pw - 1] if neg < pw else eigs[pw]
            raise GammaInfeasibleError(
                f"gamma = {cfg.gamma:g} infeasible at step {it}: inner block inertia "
                f"({neg} neg, {pos} pos) != ({pw}, {m}), boundary eigenvalue {worst:.6e}"
            )
        pf = bt.T @ p @ f
        p_new = cfg.rc_mat + f.T @ p @ f - pf.T @ np.linalg.solve(omega, pf)
        p_new = 0.5 * (p_new + p_new.T)
        if not np.all(np.isfinite(p_new)) or np.linalg.norm(p_new) > DIVERGENCE_CAP:
            raise GammaInfeasibleError(
                f"gamma = {cfg.gamma:g}: recursion diverged at step {it}"
            )
        diff = np.linalg.norm(p_new - p) / (1.0 + np.linalg.norm(p))
        p = p_new
        if diff < tol:
            return p
    raise GammaInfeasibleError(
        f"gamma = {cfg.gamma:g}: no stationary solution within {max_iter} iterations"
    )


def hinf_gain(model: DiscreteModel, cfg: HinfConfig, p_mat: np.ndarray) -> np.ndarray:
    """State-feedback part of the controller, K = -(Qc + G2' P G2)^-1 G2' P F."""
    f, g2 = model.f_mat, model.g_mat
    ru = cfg.qc_mat + g2.T @ p_mat @ g2
    return -np.linalg.solve(ru, g2.T @ p_mat @ f)


def hinf_input_correction(model: DiscreteModel, cfg: HinfConfig, p_mat: np.ndarray) -> np.ndarray:
    """Previous-input correction (Qc + G2' P G2)^-1 G2' P G2 of the applied law.

    The disturbance feedthrough of the full-information controller is
    approximated by feeding back the previous control move, valid when the
    sampling period is short enough for consecutive states to be close.
    """
    g2 = model.g_mat
    ru = cfg.qc_mat + g2.T @ p_mat @ g2
    return np.linalg.solve(ru, g2.T @ p_mat @ g2)


def gamma_feasible(model: DiscreteModel, g1: np.ndarray, cfg: HinfConfig, **kw) -> bool:
    """True when the recursion settles at cfg.gamma with valid inertia."""
    try:
        hinf_riccati(model, g1, cfg, **kw)
    except GammaInfeasibleError:
        return False
    return True


def gamma_feasibility_search(
    model: DiscreteModel,
    g1: np.ndarray,
    cfg: HinfConfig,
    lo: float,
    hi: float,
    tol: float = 1.0,
    **kw,
) -> float:
    """Bisect for the smallest feasible attenuation level in (lo, hi].

    Args:
        model, g1, cfg: problem data; cfg.gamma is ignored in favour of the
            bracket endpoints.
        lo: infeasible (or at least not-known-feasible) lower endpoint.
        hi: feasible upper endpoint; checked, and an error if it is not.
        tol: absolute bracket width at which bisection stops.

    Returns:
        The feasible upper end of the final bracket.
    """
    if lo > hi:
        raise ValueError(f"bracket is empty: lo = {lo!r} > hi = {hi!r}")
    from dataclasses import replace

    if not gamma_feasible(model, g1, replace(cfg, gamma=hi), **kw):
        raise ValueError(f"upper bracket gamma = {hi!r} is itself infeasible")
    if lo == hi:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gamma_feasible(model, g1, replace(cfg, gamma=mid), **kw):
            hi = mid
        else:
            lo = mid
    return hi
