"""Norm-bounded payload uncertainty for the discretised lateral model.

The laden semitrailer mass is only known to lie in a band, so the discrete
state matrix F moves with it.  The drift between the extreme payloads is
condensed into a rank-one perturbation set

    [dF dG] = H Delta [E_F E_G],   ||Delta|| <= 1,

built from the most payload-sensitive row of the drift matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import DiscreteModel, tustin
from .vehicle import VehicleParams, assemble_continuous, compute_axle_loads, standard_form

DEFAULT_EF_SCALE = (1.0, 1.0, 1.0, 1.0, 1.0, 0.1)
DEFAULT_EG_SCALE = (0.1,)

# Reference perturbation vectors for the standard vehicle at the design
# payload, condensing the empty-to-double-payload band.  These are the
# default for controller synthesis: the E_G entry is commensurate with the
# dominant E_F entry, which keeps the penalty on the worst-case residual
# from overwhelming the regulation cost at large mu.  A freshly derived
# alternative is available through payload_variation_matrix plus
# build_uncertainty.
REFERENCE_EF = (6.8572e-5, -8.6201e-5, -2.1440e-5, -10.4924e-5, 0.0, -666.66667e-5)
REFERENCE_EG = -666.66667e-5


def reference_uncertainty() -> "UncertaintyModel":
    """Uncertainty model from the stored reference vectors."""
    n = len(REFERENCE_EF)
    return UncertaintyModel(
        h_mat=np.ones((n, 1)),
        ef_mat=np.array([REFERENCE_EF]),
        eg_mat=np.array([[REFERENCE_EG]]),
    )


@dataclass(frozen=True)
class UncertaintyModel:
    """Structured perturbation ``[dF dG] = H Delta [E_F E_G]``, ||Delta|| <= 1."""

    h_mat: np.ndarray
    ef_mat: np.ndarray
    eg_mat: np.ndarray
    delta_bound: float = 1.0

    @property
    def is_zero(self) -> bool:
        """True when the perturbation set collapses to {0}."""
        return (
            self.ef_mat.size == 0
            or (not np.any(self.ef_mat) and not np.any(self.eg_mat))
            or not np.any(self.h_mat)
        )


def discretize_at_payload(params: VehicleParams, payload: float, ts: float) -> DiscreteModel:
    """Run the full model pipeline (loads, descriptor, Tustin) at one payload."""
    p = params.with_payload(payload)
    ac, bc = standard_form(assemble_continuous(p, compute_axle_loads(p)))
    return tustin(ac, bc, ts)


def payload_variation_matrix(
    params: VehicleParams,
    ts: float,
    payload_min: float | None = None,
    payload_max: float | None = None,
) -> np.ndarray:
    """Drift of the discrete state matrix across the payload band.

    Returns gamma_f = F(payload_min) - F(payload_max).  The default band runs
    from the empty semitrailer to twice the nominal payload.  Passing the
    endpoints in reversed order negates the result.
    """
    if payload_min is None:
        payload_min = 0.0
    if payload_max is None:
        payload_max = 2.0 * params.payload
    if payload_min < 0.0 or payload_max < 0.0:
        raise ValueError(f"invalid payload band [{payload_min!r}, {payload_max!r}]")
    f_lo = discretize_at_payload(params, payload_min, ts).f_mat
    f_hi = discretize_at_payload(params, payload_max, ts).f_mat
    return f_lo - f_hi


def build_uncertainty(
    gamma_f: np.ndarray,
    row_index: int = 5,
    ef_scale: tuple[float, ...] = DEFAULT_EF_SCALE,
    eg_scale: tuple[float, ...] = DEFAULT_EG_SCALE,
) -> UncertaintyModel:
    """Condense the drift matrix into the structured perturbation set.

    The selected row of gamma_f (1-based; row 5 is the lateral displacement
    row, the one most exposed to mass changes) provides the signed entries of
    E_F; E_G takes the row entry of largest magnitude, keeping its sign.  H
    spreads the scalar perturbation over all states.

    Args:
        gamma_f: n x n drift matrix from :func:`payload_variation_matrix`.
        row_index: 1-based row to condense.
        ef_scale: per-column weights applied to the selected row.
        eg_scale: weights applied to the extremal row entry, one per input.

    Raises:
        ValueError: if the selected row is numerically zero (below 1e-15).
    """
    gamma_f = np.asarray(gamma_f, dtype=float)
    n = gamma_f.shape[0]
    if gamma_f.shape != (n, n):
        raise ValueError(f"gamma_f must be square, got shape {gamma_f.shape}")
    if not 1 <= row_index <= n:
        raise ValueError(f"row_index must be in 1..{n}, got {row_index}")
    if len(ef_scale) != n:
        raise ValueError(f"ef_scale needs {n} entries, got {len(ef_scale)}")
    selected = gamma_f[row_index - 1]
    if np.max(np.abs(selected)) < 1e-15:
        raise ValueError(
            f"row {row_index} of gamma_f is numerically zero; pick a payload-sensitive row"
        )
    ef = np.asarray(ef_scale, dtype=float) * selected
    extremal = selected[int(np.argmax(np.abs(selected)))]
    eg = np.asarray(eg_scale, dtype=float) * extremal
    return UncertaintyModel(
        h_mat=np.ones((n, 1)),
        ef_mat=ef.reshape(1, n),
        eg_mat=eg.reshape(1, len(eg_scale)),
    )


def check_rank_condition(unc: UncertaintyModel, tol_factor: float = 1e-10) -> bool:
    """Existence condition of the robust regulator: rank [E_F E_G] == rank E_G.

    Singular values below tol_factor times the largest one are treated as
    zero in both rank computations.
    """
    stacked = np.hstack([unc.ef_mat, unc.eg_mat])
    s_all = np.linalg.svd(stacked, compute_uv=False)
    s_eg = np.linalg.svd(unc.eg_mat, compute_uv=False)
    if s_all.size == 0:
        return True
    cut = tol_factor * s_all[0]
    return int(np.sum(s_all > cut)) == int(np.sum(s_eg > cut))
