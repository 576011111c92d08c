"""Robust steering control for articulated heavy-duty vehicles.

Synthesis of recursive robust LQR and H-infinity steering controllers under
payload uncertainty, plus a closed-loop double lane-change simulator.
"""

from .config import ConfigError, RunConfig, load_config
from .discretize import DiscreteModel, continuous_from_tustin, tustin
from .hinf import (
    GammaInfeasibleError,
    HinfConfig,
    gamma_feasibility_search,
    gamma_feasible,
    hinf_gain,
    hinf_input_correction,
    hinf_riccati,
)
from .rlqr import (
    RlqrSolution,
    RlqrWeights,
    SynthesisError,
    riccati_consistency,
    rlqr_step,
    rlqr_synthesize,
)
from .robust_ls import (
    RlsProblem,
    RobustRlsProblem,
    robust_rls_array_form,
    solve_rls,
    solve_robust_rls,
)
from .simulate import (
    CASE_PAYLOAD_FACTORS,
    Metrics,
    Scenario,
    SimResult,
    compute_metrics,
    generate_reference,
    run_case,
    simulate_closed_loop,
)
from .uncertainty import (
    UncertaintyModel,
    build_uncertainty,
    check_rank_condition,
    discretize_at_payload,
    payload_variation_matrix,
    reference_uncertainty,
)
from .vehicle import (
    AxleLoads,
    ContinuousModel,
    VehicleParams,
    assemble_continuous,
    compute_axle_loads,
    standard_form,
)

__all__ = [
    "AxleLoads",
    "CASE_PAYLOAD_FACTORS",
    "ConfigError",
    "ContinuousModel",
    "DiscreteModel",
    "GammaInfeasibleError",
    "HinfConfig",
    "Metrics",
    "RlqrSolution",
    "RlqrWeights",
    "RlsProblem",
    "RobustRlsProblem",
    "RunConfig",
    "Scenario",
    "SimResult",
    "SynthesisError",
    "UncertaintyModel",
    "VehicleParams",
    "assemble_continuous",
    "build_uncertainty",
    "check_rank_condition",
    "compute_axle_loads",
    "compute_metrics",
    "continuous_from_tustin",
    "discretize_at_payload",
    "gamma_feasibility_search",
    "gamma_feasible",
    "generate_reference",
    "hinf_gain",
    "hinf_input_correction",
    "hinf_riccati",
    "load_config",
    "payload_variation_matrix",
    "reference_uncertainty",
    "riccati_consistency",
    "rlqr_step",
    "rlqr_synthesize",
    "robust_rls_array_form",
    "run_case",
    "simulate_closed_loop",
    "solve_rls",
    "solve_robust_rls",
    "standard_form",
    "tustin",
]

__version__ = "0.1.0"
