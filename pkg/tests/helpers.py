"""Independent numeric oracles shared by the test modules.

Everything here is written from first principles against the textbook
definitions, deliberately avoiding the code paths under test: the regulator
oracle is a plain fixed-point value iteration, the worst-case cost oracle is
a brute-force rollout over a gain/perturbation grid, and the robust
least-squares oracle is a dense two-dimensional scan.
"""

import numpy as np


def dare_gain(f, g, q, r, tol=1e-13, max_iter=2_000_000):
    """Discrete-time LQR via naive value iteration.

    Returns (k, p) with the regulator convention u = k x,
    k = -(r + g' p g)^-1 g' p f.
    """
    f = np.atleast_2d(np.asarray(f, dtype=float))
    g = np.atleast_2d(np.asarray(g, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    p = q.copy()
    for _ in range(max_iter):
        gpg = r + g.T @ p @ g
        gpf = g.T @ p @ f
        p_new = q + f.T @ p @ f - gpf.T @ np.linalg.solve(gpg, gpf)
        p_new = 0.5 * (p_new + p_new.T)
        if np.linalg.norm(p_new - p) <= tol * (1.0 + np.linalg.norm(p)):
            p = p_new
            break
        p = p_new
    else:
        raise RuntimeError(f"value iteration did not settle within {max_iter} steps")
    k = -np.linalg.solve(r + g.T @ p @ g, g.T @ p @ f)
    return k, p


def rand_spd(rng, n, lo=0.5, hi=2.0):
    """Random symmetric positive definite matrix with eigenvalues in [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(lo, hi, size=n)
    return q @ np.diag(eigs) @ q.T


def random_stabilizable(rng, n, m, radius_lo=0.5, radius_hi=1.3):
    """Random (f, g) pair with a full-rank input map.

    The state matrix is rescaled to a spectral radius drawn from
    [radius_lo, radius_hi]; a generic dense g makes the pair controllable.
    """
    f = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(f)))
    f = f * (rng.uniform(radius_lo, radius_hi) / rho)
    g = rng.standard_normal((n, m))
    return f, g


def closed_loop_costs(f, g, q, r, gains, horizon=200):
    """Finite-horizon quadratic cost trace(S) for a batch of static gains.

    gains has shape (batch, m, n); entries whose loop blows up come back
    as +inf.
    """
    f = np.atleast_2d(f)
    g = np.atleast_2d(g)
    gains = np.asarray(gains, dtype=float)
    a = f[None, :, :] + g[None, :, :] @ gains
    qc = q[None, :, :] + np.transpose(gains, (0, 2, 1)) @ r[None, :, :] @ gains
    s = np.zeros_like(a)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(horizon):
            s = qc + np.transpose(a, (0, 2, 1)) @ s @ a
    tr = np.trace(s, axis1=1, axis2=2)
    return np.where(np.isfinite(tr), tr, np.inf)


def worst_case_costs(f, g, h, ef, eg, q, r, gains, deltas, horizon=200):
    """Worst constant-perturbation cost over the delta grid, batched in gains."""
    h = np.atleast_2d(h)
    ef = np.atleast_2d(ef)
    eg = np.atleast_2d(eg)
    worst = np.full(len(gains), -np.inf)
    for d in deltas:
        fd = np.atleast_2d(f) + h @ (d * ef)
        gd = np.atleast_2d(g) + h @ (d * eg)
        worst = np.maximum(worst, closed_loop_costs(fd, gd, q, r, gains, horizon))
    return worst


def scalar_robust_objective(prob, xs, deltas, chunk=4000):
    """Dense-grid worst-case objective of a one-dimensional robust problem.

    Evaluates J(x) = q x^2 + w max_delta ((a + h delta ea) x - (b + h delta eb))^2
    on the grid xs, in chunks to bound memory.  Returns the J values.
    """
    q = float(prob.base.q_mat[0, 0])
    w = float(prob.base.w_mat[0, 0])
    a = float(prob.base.a_mat[0, 0])
    b = float(prob.base.b_vec[0])
    h = float(prob.h_mat[0, 0])
    ea = float(prob.ea_mat[0, 0])
    eb = float(prob.eb_vec[0])
    out = np.empty(xs.shape[0])
    for start in range(0, xs.shape[0], chunk):
        x = xs[start : start + chunk, None]
        resid = (a + h * deltas[None, :] * ea) * x - (b + h * deltas[None, :] * eb)
        out[start : start + chunk] = q * x[:, 0] ** 2 + w * np.max(resid**2, axis=1)
    return out
