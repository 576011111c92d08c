"""Bilinear (Tustin) discretisation of the continuous lateral dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiscreteModel:
    """Discrete-time model ``x[i+1] = F x[i] + G alpha[i]`` at period ts."""

    f_mat: np.ndarray
    g_mat: np.ndarray
    ts: float

    @property
    def n_states(self) -> int:
        return self.f_mat.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.g_mat.shape[1]


def tustin(ac: np.ndarray, bc: np.ndarray, ts: float) -> DiscreteModel:
    """Discretise ``xdot = ac x + bc u`` with the trapezoidal rule.

    F = (I - ts/2 ac)^-1 (I + ts/2 ac) and G = (I - ts/2 ac)^-1 bc ts, which
    maps continuous eigenvalues s to (1 + s ts/2) / (1 - s ts/2).

    Raises:
        ValueError: on shape mismatch or when (I - ts/2 ac) is singular,
            which means ts sits on a pole of the bilinear map.
    """
    ac = np.asarray(ac, dtype=float)
    bc = np.asarray(bc, dtype=float)
    if ts <= 0.0:
        raise ValueError(f"sampling period ts must be positive, got {ts!r}")
    if ac.ndim != 2 or ac.shape[0] != ac.shape[1]:
        raise ValueError(f"ac must be square, got shape {ac.shape}")
    if bc.ndim != 2 or bc.shape[0] != ac.shape[0]:
        raise ValueError(f"bc shape {bc.shape} does not match ac shape {ac.shape}")
    n = ac.shape[0]
    lhs = np.eye(n) - 0.5 * ts * ac
    if np.linalg.cond(lhs) > 1e14:
        raise ValueError(
            f"(I - ts/2 Ac) is near-singular for ts = {ts!r}; "
            "use a smaller sampling period"
        )
    f_mat = np.linalg.solve(lhs, np.eye(n) + 0.5 * ts * ac)
    g_mat = np.linalg.solve(lhs, bc) * ts
    return DiscreteModel(f_mat=f_mat, g_mat=g_mat, ts=ts)


def continuous_from_tustin(model: DiscreteModel) -> np.ndarray:
    """Invert the bilinear map: Ac = (2/ts) (F - I)(F + I)^-1."""
    f = model.f_mat
    n = f.shape[0]
    return (2.0 / model.ts) * np.linalg.solve((f + np.eye(n)).T, (f - np.eye(n)).T).T
