"""Robust recursive LQR synthesis for the uncertain discretised model.

Each backward step solves one saddle-point block system built from the
model, the uncertainty structure and the penalty mu that enforces the
uncertain dynamics.  With mu = inf the dynamics and the perturbation
channel become hard constraints; with finite mu they are softened through
the diagonal slack block Sigma(mu, lam).  The recursion is run to its
fixed point to obtain a stationary gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscreteModel
from .uncertainty import UncertaintyModel, check_rank_condition

DIVERGENCE_CAP = 1e14


class SynthesisError(RuntimeError):
    """Backward recursion failed (divergence or singular step system)."""


@dataclass(frozen=True)
class RlqrWeights:
    """Cost data for the robust regulator.

    Attributes:
        q_mat: state weight, symmetric positive definite.
        r_mat: input weight, symmetric positive definite.
        p_terminal: terminal cost; defaults to q_mat.
        mu: dynamics penalty, > 0; math.inf selects the hard-constraint form.
        lam_hat: multiplier for the perturbation slack; defaults to
            mu * ||H'H|| * (1 + 1e-6), the smallest admissible choice with
            a small safety margin.
    """

    q_mat: np.ndarray
    r_mat: np.ndarray
    p_terminal: np.ndarray | None = None
    mu: float = 1e8
    lam_hat: float | None = None

    def __post_init__(self) -> None:
        q = np.atleast_2d(np.asarray(self.q_mat, dtype=float))
        r = np.atleast_2d(np.asarray(self.r_mat, dtype=float))
        for name, mat in (("q_mat", q), ("r_mat", r)):
            if mat.shape[0] != mat.shape[1]:
                raise ValueError(f"{name} must be square, got {mat.shape}")
            if not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(mat)[0] <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu!r}")
        object.__setattr__(self, "q_mat", q)
        object.__setattr__(self, "r_mat", r)
        if self.p_terminal is None:
            object.__setattr__(self, "p_terminal", q.copy())
        else:
            pt = np.atleast_2d(np.asarray(self.p_terminal, dtype=float))
            if pt.shape != q.shape or not np.allclose(pt, pt.T, rtol=1e-10, atol=1e-12):
                raise ValueError("p_terminal must be symmetric with the shape of q_mat")
            object.__setattr__(self, "p_terminal", pt)


@dataclass(frozen=True)
class RlqrSolution:
    """Stationary robust regulator: u = K x with closed loop L = F + G K."""

    k_gain: np.ndarray
    l_closed: np.ndarray
    p_cost: np.ndarray
    iterations: int
    converged: bool
    step_diffs: np.ndarray = field(repr=False, default=None)


def _active_uncertainty(unc: UncertaintyModel | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """E_F, E_G, H with the perturbation channel dropped when it is inactive.

    A channel with H = 0 or with both shape matrices zero perturbs nothing,
    so the step falls back to the nominal recursion.
    """
    if unc is None or unc.is_zero:
        return np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0))
    return unc.ef_mat, unc.eg_mat, unc.h_mat


def _lam_default(mu: float, h: np.ndarray) -> float:
    hth = float(np.linalg.norm(h.T @ h, 2)) if h.size else 0.0
    lam = mu * hth * (1.0 + 1e-6)
    # inactive perturbation channel leaves lam free; any positive value works
    return lam if lam > 0.0 else 1.0


def rlqr_step(
    model: DiscreteModel,
    unc: UncertaintyModel | None,
    w: RlqrWeights,
    p_next: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One backward step of the robust recursion.

    Assembles the saddle-point system whose blocks are the inverted cost
    matrices, the slack Sigma and the stacked model/uncertainty maps, then
    reads the closed-loop map L, the gain K and the cost-to-go P off the
    solution.  Sigma is identically zero for mu = inf.

    Args:
        model: discrete model supplying F and G.
        unc: perturbation structure; None or an all-zero structure reduces
            the step to the classical LQR recursion.
        w: weights, penalty and optional multiplier.
        p_next: cost-to-go of the following step, symmetric positive definite.

    Returns:
        (l_closed, k_gain, p_cost), with p_cost symmetrised.

    Raises:
        SynthesisError: if the block system is singular, e.g. when the
            perturbation shape violates the rank condition.
    """
    f, g = model.f_mat, model.g_mat
    n, m = f.shape[0], g.shape[1]
    ef, eg, h = _active_uncertainty(unc)
    el = ef.shape[0]

    p_next = np.asarray(p_next, dtype=float)
    if np.linalg.eigvalsh(p_next)[0] <= 0.0:
        raise ValueError("p_next must be positive definite for the block step")

    cal_i = np.vstack([np.eye(n), np.zeros((el, n))])
    cal_g = np.vstack([g, eg]) if el else g
    cal_f = np.vstack([f, ef]) if el else f

    if math.isinf(w.mu):
        sigma = np.zeros((n + el, n + el))
    else:
        lam = w.lam_hat if w.lam_hat is not None else _lam_default(w.mu, h)
        hht = h @ h.T if h.size else np.zeros((n, n))
        sigma = np.zeros((n + el, n + el))
        sigma[:n, :n] = np.eye(n) / w.mu - hht / lam
        if el:
            sigma[n:, n:] = np.eye(el) / lam

    dim = 4 * n + 2 * m + el
    r1, r2, r3, r4, r5 = n, n + m, 2 * n + m, 3 * n + m + el, 4 * n + m + el
    xi = np.zeros((dim, dim))
    xi[:r1, :r1] = np.linalg.inv(p_next)
    xi[:r1, r4:r5] = np.eye(n)
    xi[r1:r2, r1:r2] = np.linalg.inv(w.r_mat)
    xi[r1:r2, r5:] = np.eye(m)
    xi[r2:r3, r2:r3] = np.linalg.inv(w.q_mat)
    xi[r3:r4, r3:r4] = sigma
    xi[r3:r4, r4:r5] = cal_i
    xi[r3:r4, r5:] = -cal_g
    xi[r4:r5, :r1] = np.eye(n)
    xi[r4:r5, r3:r4] = cal_i.T
    xi[r5:, r1:r2] = np.eye(m)
    xi[r5:, r3:r4] = -cal_g.T

    rhs = np.zeros((dim, n))
    rhs[r2:r3] = -np.eye(n)
    rhs[r3:r4] = cal_f

    try:
        z = np.linalg.solve(xi, rhs)
    except np.linalg.LinAlgError as exc:
        ok = check_rank_condition(unc) if unc is not None else True
        raise SynthesisError(
            f"singular step system ({exc}); rank([E_F E_G]) == rank(E_G): {ok}"
        ) from exc

    l_closed = z[r4:r5]
    k_gain = z[r5:]
    p_cost = -z[r2:r3] + cal_f.T @ z[r3:r4]
    p_cost = 0.5 * (p_cost + p_cost.T)
    return l_closed, k_gain, p_cost


def rlqr_synthesize(
    model: DiscreteModel,
    unc: UncertaintyModel | None,
    w: RlqrWeights,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> RlqrSolution:
    """Iterate the backward step to its fixed point.

    Stops when ||P_i - P_{i+1}|| / (1 + ||P_{i+1}||) drops below tol.

    Raises:
        SynthesisError: if ||P|| exceeds 1e14, which indicates an
            unstabilisable setup or misconfigured weights/uncertainty.
    """
    p = np.asarray(w.p_terminal, dtype=float)
    diffs = []
    l_closed = k_gain = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        l_closed, k_gain, p_new = rlqr_step(model, unc, w, p)
        if not np.all(np.isfinite(p_new)) or np.linalg.norm(p_new) > DIVERGENCE_CAP:
            raise SynthesisError(
                f"cost recursion diverged at iteration {iterations} "
                f"(||P|| = {np.linalg.norm(p_new):.3e}); "
                "check stabilisability, weights and uncertainty scaling"
            )
        diff = np.linalg.norm(p_new - p) / (1.0 + np.linalg.norm(p))
        diffs.append(diff)
        p = p_new
        if diff < tol:
            converged = True
            break
    return RlqrSolution(
        k_gain=k_gain,
        l_closed=l_closed,
        p_cost=p,
        iterations=iterations,
        converged=converged,
        step_diffs=np.asarray(diffs),
    )


def riccati_consistency(
    model: DiscreteModel,
    unc: UncertaintyModel | None,
    w: RlqrWeights,
    sol: RlqrSolution,
) -> float:
    """Relative residual of the stationary cost identity.

    Recomputes P from (L, K, P) through
    ``P = L' P L + K' R K + Q + s' Sigma^-1 s`` with
    ``s = I_cal L - G_cal K - F_cal``; the slack term drops out for
    mu = inf, where s vanishes by construction.
    """
    f, g = model.f_mat, model.g_mat
    n = f.shape[0]
    ef, eg, h = _active_uncertainty(unc)
    el = ef.shape[0]
    l_cl, k, p = sol.l_closed, sol.k_gain, sol.p_cost

    recomputed = l_cl.T @ p @ l_cl + k.T @ w.r_mat @ k + w.q_mat
    if not math.isinf(w.mu):
        cal_i = np.vstack([np.eye(n), np.zeros((el, n))])
        cal_g = np.vstack([g, eg]) if el else g
        cal_f = np.vstack([f, ef]) if el else f
        s = cal_i @ l_cl - cal_g @ k - cal_f
        lam = w.lam_hat if w.lam_hat is not None else _lam_default(w.mu, h)
        hht = h @ h.T if h.size else np.zeros((n, n))
        sigma = np.zeros((n + el, n + el))
        sigma[:n, :n] = np.eye(n) / w.mu - hht / lam
        if el:
            sigma[n:, n:] = np.eye(el) / lam
        recomputed = recomputed + s.T @ np.linalg.solve(sigma, s)
    return float(np.linalg.norm(recomputed - p) / (1.0 + np.linalg.norm(p)))
