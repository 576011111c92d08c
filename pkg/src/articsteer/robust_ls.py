"""Regularised least squares and its min-max robust counterpart.

The robust problem guards the fit against structured perturbations of the
data pair (A, b):

    min_x max_{||Delta|| <= 1}  ||x||^2_Q + ||(A + H Delta E_a) x - (b + H Delta E_b)||^2_W

Its solution has the same closed form as the nominal problem once Q and W
are replaced by perturbation-corrected weights driven by a scalar
multiplier, found here by a bracketed golden-section search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

#: singular values below this fraction of the largest are truncated in pinv
PINV_RCOND = 1e-12


def _check_spd(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    eigmin = float(np.linalg.eigvalsh(mat)[0])
    if eigmin <= 0.0:
        raise ValueError(f"{name} must be positive definite (min eigenvalue {eigmin:.3e})")
    return mat


@dataclass(frozen=True)
class RlsProblem:
    """Nominal regularised least-squares data ``min ||x||^2_Q + ||Ax - b||^2_W``."""

    q_mat: np.ndarray
    w_mat: np.ndarray
    a_mat: np.ndarray
    b_vec: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_mat", _check_spd(self.q_mat, "q_mat"))
        object.__setattr__(self, "w_mat", _check_spd(self.w_mat, "w_mat"))
        a = np.atleast_2d(np.asarray(self.a_mat, dtype=float))
        b = np.asarray(self.b_vec, dtype=float).reshape(-1)
        n, m = a.shape
        if self.q_mat.shape != (m, m):
            raise ValueError(f"q_mat shape {self.q_mat.shape} incompatible with {m} unknowns")
        if self.w_mat.shape != (n, n):
            raise ValueError(f"w_mat shape {self.w_mat.shape} incompatible with {n} residuals")
        if b.shape != (n,):
            raise ValueError(f"b_vec length {b.shape[0]} does not match {n} residuals")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "b_vec", b)


@dataclass(frozen=True)
class RobustRlsProblem:
    """Nominal data plus the structured perturbation (H, E_a, E_b)."""

    base: RlsProblem
    h_mat: np.ndarray
    ea_mat: np.ndarray
    eb_vec: np.ndarray

    def __post_init__(self) -> None:
        n, m = self.base.a_mat.shape
        h = np.atleast_2d(np.asarray(self.h_mat, dtype=float))
        ea = np.atleast_2d(np.asarray(self.ea_mat, dtype=float))
        eb = np.asarray(self.eb_vec, dtype=float).reshape(-1)
        if h.shape[0] != n:
            raise ValueError(f"h_mat must have {n} rows, got {h.shape}")
        if ea.shape[1] != m:
            raise ValueError(f"ea_mat must have {m} columns, got {ea.shape}")
        if eb.shape[0] != ea.shape[0]:
            raise ValueError(
                f"eb_vec length {eb.shape[0]} does not match ea_mat row count {ea.shape[0]}"
            )
        object.__setattr__(self, "h_mat", h)
        object.__setattr__(self, "ea_mat", ea)
        object.__setattr__(self, "eb_vec", eb)


def solve_rls(p: RlsProblem) -> np.ndarray:
    """Closed-form minimiser ``(Q + A' W A)^-1 A' W b`` of the nominal problem."""
    a, b, q, w = p.a_mat, p.b_vec, p.q_mat, p.w_mat
    x = np.linalg.solve(q + a.T @ w @ a, a.T @ w @ b)
    grad = 2.0 * (q @ x + a.T @ w @ (a @ x - b))
    if np.linalg.norm(grad) > 1e-8 * (1.0 + np.linalg.norm(b)):
        raise RuntimeError(
            f"stationarity check failed (|grad| = {np.linalg.norm(grad):.3e}); "
            "normal equations are too ill-conditioned"
        )
    return x


def _corrected_weights(p: RobustRlsProblem, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Q(lam) and W(lam) of the robust solution for multiplier lam."""
    q, w = p.base.q_mat, p.base.w_mat
    h, ea = p.h_mat, p.ea_mat
    q_lam = q + lam * ea.T @ ea
    wh = w @ h
    core = lam * np.eye(h.shape[1]) - h.T @ wh
    w_lam = w + wh @ np.linalg.pinv(core, rcond=PINV_RCOND) @ wh.T
    return q_lam, w_lam


def _solution_at(p: RobustRlsProblem, lam: float) -> tuple[np.ndarray, float]:
    """Candidate x(lam) and the cost bound it attains."""
    a, b = p.base.a_mat, p.base.b_vec
    ea, eb = p.ea_mat, p.eb_vec
    q_lam, w_lam = _corrected_weights(p, lam)
    x = np.linalg.solve(q_lam + a.T @ w_lam @ a, a.T @ w_lam @ b + lam * ea.T @ eb)
    res = a @ x - b
    eres = ea @ x - eb
    gamma = float(
        x @ p.base.q_mat @ x + lam * eres @ eres + res @ w_lam @ res
    )
    return x, gamma


def solve_robust_rls(
    p: RobustRlsProblem,
    tol: float = 1e-10,
    max_doublings: int = 60,
) -> tuple[np.ndarray, float, float]:
    """Minimise the robust cost bound over the scalar multiplier.

    The multiplier must stay above ||H' W H||.  Starting just over that
    bound, the bracket is grown by doubling until the bound curve turns
    upward, then a golden-section search narrows the minimiser.  On curves
    that keep falling towards their asymptote (which happens whenever the
    optimum interpolates E_a x = E_b exactly) the search stops at the last
    bracket and returns the asymptotic solution, which is then correct to
    within the bracketing tolerance.

    Args:
        p: robust problem data.
        tol: relative width at which the golden-section search stops.
        max_doublings: bracket growth budget before the curve is declared flat.

    Returns:
        (x_star, lambda_hat, j_star): minimiser, multiplier and min-max cost.
    """
    w, h = p.base.w_mat, p.h_mat
    lam_floor = float(np.linalg.norm(h.T @ w @ h, 2)) if h.size else 0.0

    def cost(lam: float) -> float:
        return _solution_at(p, lam)[1]

    lo = lam_floor * (1.0 + 1e-6) + 1e-12
    f_lo = cost(lo)
    # grow the bracket until the curve turns upward
    hi = 2.0 * lo + 1e-9
    f_hi = cost(hi)
    turned = f_hi >= f_lo
    prev, f_prev = lo, f_lo
    while not turned and max_doublings > 0:
        max_doublings -= 1
        nxt = 2.0 * hi
        f_nxt = cost(nxt)
        if f_nxt >= f_hi:
            turned = True
        prev, f_prev = hi, f_hi
        hi, f_hi = nxt, f_nxt
    if not turned:
        # falling towards an asymptote; flat within tolerance counts as done
        if abs(f_prev - f_hi) > 1e-6 * (1.0 + abs(f_hi)):
            raise RuntimeError(
                "cost bound still falling after bracket growth "
                f"(bracket [{prev:.6e}, {hi:.6e}], values [{f_prev:.6e}, {f_hi:.6e}])"
            )
        x, gamma = _solution_at(p, hi)
        return x, hi, gamma

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    f_c, f_d = cost(c), cost(d)
    while (b - a) > tol * (1.0 + abs(a) + abs(b)):
        if f_c <= f_d:
            b, d, f_d = d, c, f_c
            c = b - _GOLDEN * (b - a)
            f_c = cost(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + _GOLDEN * (b - a)
            f_d = cost(d)
    lam_hat = 0.5 * (a + b)
    x, gamma = _solution_at(p, lam_hat)
    return x, lam_hat, gamma


def robust_rls_array_form(p: RobustRlsProblem, lam_hat: float) -> tuple[np.ndarray, float]:
    """Evaluate the robust solution through the block-array identity.

    Solves one saddle-point system whose blocks hold the inverted corrected
    weights; the last rows recover x and the attained cost directly.  Agrees
    with :func:`solve_robust_rls` at the same multiplier.
    """
    a, b, q, w = p.base.a_mat, p.base.b_vec, p.base.q_mat, p.base.w_mat
    h, ea, eb = p.h_mat, p.ea_mat, p.eb_vec
    n, m = a.shape
    el = ea.shape[0]
    if lam_hat <= float(np.linalg.norm(h.T @ w @ h, 2)) and h.size:
        raise ValueError(f"lam_hat = {lam_hat!r} must exceed ||H' W H||")

    # W(lam)^-1 collapses to W^-1 - H H'/lam for admissible lam
    w_hat_inv = np.linalg.inv(w) - (h @ h.T) / lam_hat

    dim = m + n + el + m
    xi = np.zeros((dim, dim))
    r0, r1, r2, r3 = 0, m, m + n, m + n + el
    xi[r0:r1, r0:r1] = np.linalg.inv(q)
    xi[r1:r2, r1:r2] = w_hat_inv
    xi[r2:r3, r2:r3] = np.eye(el) / lam_hat
    xi[r0:r1, r3:] = np.eye(m)
    xi[r3:, r0:r1] = np.eye(m)
    xi[r1:r2, r3:] = a
    xi[r3:, r1:r2] = a.T
    xi[r2:r3, r3:] = ea
    xi[r3:, r2:r3] = ea.T

    rhs = np.zeros(dim)
    rhs[r1:r2] = b
    rhs[r2:r3] = eb
    sol = np.linalg.solve(xi, rhs)
    x = sol[r3:]
    j_star = float(b @ sol[r1:r2] + eb @ sol[r2:r3])
    return x, j_star
