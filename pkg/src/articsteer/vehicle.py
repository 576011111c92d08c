"""Lateral single-track model of an articulated tractor-semitrailer.

The model covers a three-axle combination (front/rear tractor axles plus a
lumped semitrailer axle group) travelling at constant forward speed.  States
are lateral velocity, tractor yaw rate, articulation rate, articulation
angle, lateral displacement from the lane centreline and heading error:

    x = [dy1, dpsi1, dphi, phi, rho, theta]

The descriptor form ``M xdot = A x + B alpha`` keeps the mass matrix
explicit; :func:`standard_form` reduces it to ``xdot = Ac x + Bc alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

N_STATES = 6

#: order of the state variables, also used for CSV headers downstream
STATE_NAMES = ("ydot1", "psidot1", "phidot", "phi", "rho", "theta")

_GEOMETRY_TIES = (
    ("l1", ("a1", "b1"), lambda p: p.a1 + p.b1),
    ("l1_star", ("a1", "h1"), lambda p: p.a1 + p.h1),
    ("d1", ("h1", "b1"), lambda p: p.h1 - p.b1),
)


@dataclass(frozen=True)
class VehicleParams:
    """Geometry, mass and tyre data for the tractor-semitrailer combination.

    Attributes:
        a1: distance from tractor CG to front axle [m].
        a2: distance from semitrailer CG to coupling [m].
        b1: distance from tractor CG to rear axle [m].
        b2: distance from semitrailer CG to its axle group [m].
        l1: tractor wheelbase, must equal a1 + b1 [m].
        l2: semitrailer wheelbase [m].
        d1: coupling offset behind the tractor rear axle, h1 - b1 [m].
        h1: distance from tractor CG to coupling [m].
        l1_star: distance from front axle to coupling, a1 + h1 [m].
        width_eps: vehicle width used for corridor plots [m].
        v: constant forward speed [m/s].
        m1: tractor mass [kg].
        m2: unladen semitrailer mass [kg].
        payload: payload mass carried by the semitrailer [kg].
        j1: tractor yaw inertia [kg m^2].
        j2: semitrailer yaw inertia at nominal payload [kg m^2].
        f_norm: normalised cornering stiffness per unit vertical load [1/rad].
        payload_nominal: payload at which j2 is quoted; the inertia is scaled
            linearly with the laden semitrailer mass relative to this point.
        g: gravitational acceleration [m/s^2].
    """

    a1: float = 1.734
    a2: float = 4.8
    b1: float = 2.415
    b2: float = 3.2
    l1: float = 4.149
    l2: float = 8.0
    d1: float = -0.29
    h1: float = 2.125
    l1_star: float = 3.859
    width_eps: float = 2.6
    v: float = 16.667
    m1: float = 8909.0
    m2: float = 9370.0
    payload: float = 24000.0
    j1: float = 41566.0
    j2: float = 404360.0
    f_norm: float = 5.73
    payload_nominal: float = 24000.0
    g: float = 9.81

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "j1", "j2", "l1", "l2", "f_norm", "g"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"vehicle parameter {name} must be positive, got {getattr(self, name)!r}")
        if self.payload < 0.0:
            raise ValueError(f"payload must be non-negative, got {self.payload!r}")
        if self.v <= 0.0:
            raise ValueError(f"forward speed v must be positive, got {self.v!r}")
        for name, parts, expr in _GEOMETRY_TIES:
            stated = getattr(self, name)
            derived = expr(self)
            if abs(stated - derived) > 1e-9 * max(1.0, abs(derived)):
                raise ValueError(
                    f"inconsistent geometry: {name}={stated!r} but "
                    f"{' + '.join(parts) if name != 'd1' else 'h1 - b1'} = {derived!r}"
                )

    @property
    def m2_eff(self) -> float:
        """Laden semitrailer mass."""
        return self.m2 + self.payload

    @property
    def j2_eff(self) -> float:
        """Semitrailer yaw inertia scaled linearly with the laden mass."""
        return self.j2 * self.m2_eff / (self.m2 + self.payload_nominal)

    def with_payload(self, payload: float) -> "VehicleParams":
        return replace(self, payload=payload)


@dataclass(frozen=True)
class AxleLoads:
    """Static vertical loads and the cornering stiffnesses they induce."""

    fz1: float
    fz2: float
    fz3: float
    c1: float = field(init=False)
    c2: float = field(init=False)
    c3: float = field(init=False)
    f_norm: float = 5.73

    def __post_init__(self) -> None:
        for name in ("fz1", "fz2", "fz3"):
            if getattr(self, name) < 0.0:
                raise ValueError(
                    f"axle load {name} = {getattr(self, name):.1f} N is negative; "
                    "the axle would lift off for this payload/geometry"
                )
        object.__setattr__(self, "c1", self.f_norm * self.fz1)
        object.__setattr__(self, "c2", self.f_norm * self.fz2)
        object.__setattr__(self, "c3", self.f_norm * self.fz3)


@dataclass(frozen=True)
class ContinuousModel:
    """Descriptor-form lateral dynamics ``M xdot = A x + B alpha``."""

    m_mat: np.ndarray
    a_mat: np.ndarray
    b_mat: np.ndarray


def compute_axle_loads(params: VehicleParams) -> AxleLoads:
    """Distribute the static weight of the combination over the three axles.

    The semitrailer weight splits between its own axle group and the coupling;
    the coupling load in turn shifts the tractor axle loads through the
    coupling offset d1.
    """
    p = params
    w1 = p.m1 * p.g
    w2 = p.m2_eff * p.g
    fz1 = w1 * p.b1 / p.l1 - w2 * p.b2 * p.d1 / (p.l2 * p.l1)
    fz2 = w1 * p.a1 / p.l1 + w2 * p.b2 * p.l1_star / (p.l2 * p.l1)
    fz3 = w2 * p.a2 / p.l2
    return AxleLoads(fz1=fz1, fz2=fz2, fz3=fz3, f_norm=p.f_norm)


def assemble_continuous(params: VehicleParams, loads: AxleLoads | None = None) -> ContinuousModel:
    """Build the descriptor matrices for the given parameter set.

    Args:
        params: vehicle data; the laden mass and scaled inertia are used.
        loads: optional precomputed axle loads, recomputed when omitted.

    Returns:
        ContinuousModel with the 6x6 mass and state matrices and 6x1 input.
    """
    if loads is None:
        loads = compute_axle_loads(params)
    p = params
    c1, c2, c3 = loads.c1, loads.c2, loads.c3
    m2, j2 = p.m2_eff, p.j2_eff
    v = p.v

    m_mat = np.eye(N_STATES)
    m_mat[0, 0] = p.m1 + m2
    m_mat[0, 1] = -m2 * (p.h1 + p.a2)
    m_mat[0, 2] = -m2 * p.a2
    m_mat[1, 0] = -m2 * p.h1
    m_mat[1, 1] = p.j1 + m2 * p.h1 * (p.h1 + p.a2)
    m_mat[1, 2] = m2 * p.h1 * p.a2
    m_mat[2, 0] = -m2 * p.a2
    m_mat[2, 1] = j2 + m2 * p.a2 * (p.h1 + p.a2)
    m_mat[2, 2] = j2 + m2 * p.a2**2

    a_mat = np.zeros((N_STATES, N_STATES))
    a_mat[0, 0] = -(c1 + c2 + c3) / v
    a_mat[0, 1] = (c3 * (p.h1 + p.l2) - p.a1 * c1 + p.b1 * c2 - (p.m1 + m2) * v**2) / v
    a_mat[0, 2] = c3 * p.l2 / v
    a_mat[0, 3] = c3
    a_mat[1, 0] = (c3 * p.h1 - p.a1 * c1 + p.b1 * c2) / v
    a_mat[1, 1] = (m2 * p.h1 * v**2 - p.a1**2 * c1 - p.b1**2 * c2 - c3 * p.h1 * (p.h1 + p.l2)) / v
    a_mat[1, 2] = -c3 * p.h1 * p.l2 / v
    a_mat[1, 3] = -c3 * p.h1
    a_mat[2, 0] = c3 * p.l2 / v
    a_mat[2, 1] = (m2 * p.a2 * v**2 - c3 * p.l2 * (p.h1 + p.l2)) / v
    a_mat[2, 2] = -c3 * p.l2**2 / v
    a_mat[2, 3] = -c3 * p.l2
    # kinematic rows: phi integrates dphi, rho drifts with heading and lateral
    # velocity, theta integrates the tractor yaw rate
    a_mat[3, 2] = 1.0
    a_mat[4, 0] = 1.0
    a_mat[4, 5] = v
    a_mat[5, 1] = 1.0

    b_mat = np.zeros((N_STATES, 1))
    b_mat[0, 0] = c1
    b_mat[1, 0] = p.a1 * c1
    return ContinuousModel(m_mat=m_mat, a_mat=a_mat, b_mat=b_mat)


def standard_form(model: ContinuousModel) -> tuple[np.ndarray, np.ndarray]:
    """Reduce the descriptor form to ``xdot = Ac x + Bc alpha``.

    Raises:
        ValueError: if the mass matrix is ill-conditioned (cond > 1e12).
    """
    cond = np.linalg.cond(model.m_mat)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(f"mass matrix is ill-conditioned (cond = {cond:.3e}); check mass/geometry data")
    ac = np.linalg.solve(model.m_mat, model.a_mat)
    bc = np.linalg.solve(model.m_mat, model.b_mat)
    return ac, bc
