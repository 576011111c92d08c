"""Closed-loop double lane-change simulation and path-following metrics.

The simulator drives a discretized articulated-vehicle plant along a double
lane-change reference with a state-feedback steering controller, saturates
the steering command, and reports L2 error norms and steering-rate metrics.
The reference is produced by feeding a smooth feedforward steering profile
to the nominal model, so tracking it is achievable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscreteModel
from .hinf import HinfConfig, gamma_feasibility_search, hinf_gain, hinf_input_correction, hinf_riccati
from .rlqr import RlqrWeights, rlqr_synthesize
from .uncertainty import discretize_at_payload
from .vehicle import N_STATES, VehicleParams

# Payload for each evaluated case, as a multiple of the design payload.
# Case 1 is the design condition, cases 2 and 3 sit above the design band,
# case 4 is the empty vehicle.
CASE_PAYLOAD_FACTORS = {1: 1.0, 2: 2.34, 3: 2.37, 4: 0.0}

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class Scenario:
    """Double lane-change run description.

    ``geometry`` holds the four path segment lengths in metres: approach,
    first transition, hold at the offset lane, and return transition.  Any
    distance left over at speed ``v`` is covered in the original lane.
    """

    x0: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 0.0, 0.3, -0.1]))
    duration: float = 30.0
    ts: float = 0.01
    payload_true: float = 24000.0
    payload_design: float = 24000.0
    steering_limit: float = 0.44
    lane_offset: float = 3.5
    geometry: tuple = (100.0, 50.0, 100.0, 50.0)
    v: float = 16.667
    use_feedforward: bool = True

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.shape != (N_STATES,):
            raise ValueError(f"x0 must have {N_STATES} entries, got shape {x0.shape}")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 entries must be finite")
        object.__setattr__(self, "x0", x0)
        if self.duration <= 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.ts <= 0.0:
            raise ValueError(f"ts must be positive, got {self.ts}")
        if self.steering_limit <= 0.0:
            raise ValueError(f"steering_limit must be positive, got {self.steering_limit}")
        if self.v <= 0.0:
            raise ValueError(f"v must be positive, got {self.v}")
        geometry = tuple(float(g) for g in self.geometry)
        if len(geometry) != 4:
            raise ValueError(f"geometry needs 4 segment lengths, got {len(geometry)}")
        if any(g <= 0.0 for g in geometry):
            raise ValueError(f"geometry segments must be positive, got {geometry}")
        object.__setattr__(self, "geometry", geometry)
        if self.payload_true < 0.0 or self.payload_design < 0.0:
            raise ValueError("payloads must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.ts))


@dataclass(frozen=True)
class Metrics:
    """Path-following quality figures for one run."""

    l2_rho: float
    l2_theta: float
    max_steer_rate: float
    max_abs_steer: float


@dataclass(frozen=True)
class SimResult:
    """Time series and metrics from one closed-loop run.

    All series have ``n_steps + 1`` samples.  ``alpha`` is the applied
    (saturated) steering angle; its last sample repeats the final command so
    the series aligns with the state samples.
    """

    time: np.ndarray
    states: np.ndarray
    alpha: np.ndarray
    x_ref: np.ndarray
    u_ref: np.ndarray
    pos_x: np.ndarray
    pos_y: np.ndarray
    metrics: Metrics


def _raised_cosine(t: np.ndarray, t0: float, width: float) -> np.ndarray:
    """Smooth bump of unit peak supported on [t0, t0 + width]."""
    tau = (t - t0) / width
    out = np.zeros_like(t)
    inside = (tau >= 0.0) & (tau <= 1.0)
    out[inside] = 0.5 * (1.0 - np.cos(2.0 * np.pi * tau[inside]))
    return out


def _rollout(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    """Simulate the model from rest under the scalar input series u."""
    n = model.n_states
    x = np.zeros((u.shape[0], n))
    f = model.f_mat
    g = model.g_mat[:, 0]
    for i in range(u.shape[0] - 1):
        x[i + 1] = f @ x[i] + g * u[i]
    return x


def generate_reference(scn: Scenario, nominal: DiscreteModel):
    """Build the lane-change reference trajectory on the nominal model.

    Each lane transition is realized by a pair of raised-cosine steering
    bumps whose amplitudes are solved from the linear model response so the
    settled lateral offset hits the target and the settled heading returns
    to zero.  Returns ``(x_ref, u_ref)``; replaying ``u_ref`` through the
    nominal model reproduces ``x_ref`` exactly.
    """
    if nominal.n_inputs != 1:
        raise ValueError(f"reference generation expects a single steering input, got {nominal.n_inputs}")
    covered = scn.v * scn.duration
    needed = sum(scn.geometry)
    if needed > covered + 1e-9:
        raise ValueError(
            f"lane geometry needs {needed:.3f} m but {scn.duration} s at "
            f"{scn.v} m/s covers only {covered:.3f} m"
        )
    n = scn.n_steps
    t = np.arange(n + 1) * scn.ts
    s1, s2, s3, s4 = scn.geometry
    u_ref = np.zeros(n + 1)
    transitions = (
        (s1 / scn.v, s2 / scn.v, scn.lane_offset),
        ((s1 + s2 + s3) / scn.v, s4 / scn.v, -scn.lane_offset),
    )
    for t_start, t_span, target in transitions:
        if t_span < 4.0 * scn.ts:
            raise ValueError(
                f"transition of {t_span:.4f} s is too short for sampling period {scn.ts}"
            )
        bump_a = _raised_cosine(t, t_start, 0.5 * t_span)
        bump_b = _raised_cosine(t, t_start + 0.5 * t_span, 0.5 * t_span)
        end_a = _rollout(nominal, bump_a)[-1]
        end_b = _rollout(nominal, bump_b)[-1]
        response = np.array([[end_a[4], end_b[4]], [end_a[5], end_b[5]]])
        try:
            coeff = np.linalg.solve(response, np.array([target, 0.0]))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"singular lane-transition response matrix: {exc}") from exc
        u_ref += coeff[0] * bump_a + coeff[1] * bump_b
    x_ref = _rollout(nominal, u_ref)
    return x_ref, u_ref


def _series_metrics(x_ref: np.ndarray, states: np.ndarray, alpha: np.ndarray, ts: float) -> Metrics:
    err_rho = x_ref[:, 4] - states[:, 4]
    err_theta = x_ref[:, 5] - states[:, 5]
    l2_rho = float(np.sqrt(ts * np.sum(err_rho**2)))
    l2_theta = float(np.sqrt(ts * np.sum(err_theta**2)))
    if alpha.shape[0] > 1:
        max_rate = float(np.max(np.abs(np.diff(alpha))) / ts)
    else:
        max_rate = 0.0
    return Metrics(
        l2_rho=l2_rho,
        l2_theta=l2_theta,
        max_steer_rate=max_rate,
        max_abs_steer=float(np.max(np.abs(alpha))),
    )


def simulate_closed_loop(
    plant: DiscreteModel,
    k: np.ndarray,
    aux,
    scn: Scenario,
    x_ref: np.ndarray,
    u_ref: np.ndarray,
) -> SimResult:
    """Run the tracking loop u = clamp(k (x_ref - x) + correction + u_ref).

    ``k`` is an error-feedback gain: the loop is stable when F - G k is.
    ``aux`` is an optional m-by-m correction applied to the previous
    realized feedback (the applied command minus feedforward), which keeps
    that memory bounded when the command saturates.
    """
    if plant.n_inputs != 1:
        raise ValueError(f"simulator expects a single steering input, got {plant.n_inputs}")
    k = np.asarray(k, dtype=float).reshape(plant.n_inputs, plant.n_states)
    aux_mat = None
    if aux is not None:
        aux_mat = np.asarray(aux, dtype=float).reshape(plant.n_inputs, plant.n_inputs)
    n = scn.n_steps
    if x_ref.shape != (n + 1, plant.n_states) or u_ref.shape != (n + 1,):
        raise ValueError(
            f"reference shapes {x_ref.shape}/{u_ref.shape} do not match "
            f"{n + 1} samples of a {plant.n_states}-state model"
        )
    f = plant.f_mat
    g = plant.g_mat[:, 0]
    limit = scn.steering_limit
    states = np.zeros((n + 1, plant.n_states))
    states[0] = scn.x0
    alpha = np.zeros(n + 1)
    z_prev = np.zeros(plant.n_inputs)
    for i in range(n):
        err = x_ref[i] - states[i]
        u_fb = k @ err
        if aux_mat is not None:
            u_fb = u_fb + aux_mat @ z_prev
        ff = u_ref[i] if scn.use_feedforward else 0.0
        u = float(np.clip(u_fb[0] + ff, -limit, limit))
        alpha[i] = u
        z_prev = np.array([u - ff])
        states[i + 1] = f @ states[i] + g * u
        norm = float(np.linalg.norm(states[i + 1]))
        if norm > DIVERGENCE_LIMIT:
            raise RuntimeError(f"closed loop diverged at step {i + 1}: state norm {norm:.3e}")
    alpha[n] = alpha[n - 1]

    # Global tractor position from forward speed, lateral speed and heading.
    # The heading error state equals the heading itself because the nominal
    # course is a straight line.
    psi = states[:, 5]
    vx = scn.v * np.cos(psi) - states[:, 0] * np.sin(psi)
    vy = scn.v * np.sin(psi) + states[:, 0] * np.cos(psi)
    pos_x = np.concatenate(([0.0], np.cumsum(vx[:-1]) * scn.ts))
    pos_y = np.concatenate(([0.0], np.cumsum(vy[:-1]) * scn.ts))

    time = np.arange(n + 1) * scn.ts
    metrics = _series_metrics(x_ref, states, alpha, scn.ts)
    return SimResult(
        time=time,
        states=states,
        alpha=alpha,
        x_ref=x_ref,
        u_ref=u_ref,
        pos_x=pos_x,
        pos_y=pos_y,
        metrics=metrics,
    )


def compute_metrics(result: SimResult) -> Metrics:
    """Recompute metrics from the stored series of a run."""
    if result.states.shape[0] == 0:
        raise ValueError("result has empty series")
    ts = float(result.time[1] - result.time[0]) if result.time.shape[0] > 1 else 1.0
    return _series_metrics(result.x_ref, result.states, result.alpha, ts)


def synthesize_rlqr_gain(model: DiscreteModel, unc, weights: RlqrWeights) -> np.ndarray:
    """Error-feedback steering gain from the robust regulator recursion."""
    sol = rlqr_synthesize(model, unc, weights)
    return -sol.k_gain


def synthesize_hinf_gain(model: DiscreteModel, cfg: HinfConfig, gamma_margin: float | None = None):
    """Error-feedback steering gain and input correction at the given level.

    When ``gamma_margin`` is set, ``cfg.gamma`` is treated as an upper
    bracket: the lowest feasible level is located by bisection and then
    multiplied by the margin.  Returns ``(k, correction, gamma_used)``.
    """
    disturbance = np.ones((model.n_states, 1))
    gamma = cfg.gamma
    if gamma_margin is not None:
        if gamma_margin < 1.0:
            raise ValueError(f"gamma margin must be >= 1, got {gamma_margin}")
        gamma_min = gamma_feasibility_search(model, disturbance, cfg, lo=1.0, hi=cfg.gamma, tol=1.0)
        gamma = gamma_margin * gamma_min
    cfg_used = HinfConfig(
        gamma=gamma,
        qc_mat=cfg.qc_mat,
        rc_mat=cfg.rc_mat,
        pc_terminal=cfg.pc_terminal,
        qw_mat=cfg.qw_mat,
        pi0=cfg.pi0,
    )
    p = hinf_riccati(model, disturbance, cfg_used)
    gain = hinf_gain(model, cfg_used, p)
    correction = hinf_input_correction(model, cfg_used, p)
    return -gain, correction, gamma


def run_case(case_id: int, controller_kind: str, config) -> SimResult:
    """Full pipeline for one evaluated case and one controller.

    Models are built at the design payload (synthesis) and at the true
    payload given by the case factor (plant); the reference is always
    generated on the design model, so both controllers track the same
    trajectory in a given case.
    """
    if case_id not in CASE_PAYLOAD_FACTORS:
        raise ValueError(f"case_id must be one of {sorted(CASE_PAYLOAD_FACTORS)}, got {case_id}")
    if controller_kind not in ("rlqr", "hinf"):
        raise ValueError(f"controller_kind must be 'rlqr' or 'hinf', got {controller_kind!r}")
    params: VehicleParams = config.vehicle
    payload_design = params.payload
    payload_true = CASE_PAYLOAD_FACTORS[case_id] * payload_design
    scn = config.scenario_for(payload_true=payload_true, payload_design=payload_design, v=params.v)
    model_design = discretize_at_payload(params, payload_design, scn.ts)
    plant_true = discretize_at_payload(params, payload_true, scn.ts)
    x_ref, u_ref = generate_reference(scn, model_design)
    if controller_kind == "rlqr":
        unc = config.uncertainty_model(params, scn.ts)
        weights = RlqrWeights(
            q_mat=config.controller.q_mat(),
            r_mat=config.controller.r_mat(),
            mu=config.controller.mu,
        )
        k = synthesize_rlqr_gain(model_design, unc, weights)
        aux = None
    else:
        base = HinfConfig(
            gamma=config.controller.gamma_bracket(),
            qc_mat=config.controller.r_mat(),
            rc_mat=config.controller.q_mat(),
        )
        margin = config.controller.gamma_margin if config.controller.gamma_auto() else None
        k, aux, _ = synthesize_hinf_gain(model_design, base, gamma_margin=margin)
    return simulate_closed_loop(plant_true, k, aux, scn, x_ref, u_ref)
