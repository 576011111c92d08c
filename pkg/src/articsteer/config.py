"""Run configuration: YAML loading, validation and defaults.

An empty or missing file yields the standard setup: the stock vehicle,
the published weight matrices, the reference uncertainty vectors, the
30 s double lane-change scenario and all four payload cases.  Unknown
keys are rejected so typos fail loudly instead of silently reverting a
field to its default.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .simulate import Scenario
from .uncertainty import (
    DEFAULT_EF_SCALE,
    DEFAULT_EG_SCALE,
    UncertaintyModel,
    build_uncertainty,
    payload_variation_matrix,
    reference_uncertainty,
)
from .vehicle import N_STATES, VehicleParams

SCHEMA_VERSION = 1

DEFAULT_Q_DIAG = (1.0, 1.0, 1.0, 1.0, 25000.0, 100.0)
DEFAULT_R_VALUE = 67070.0


class ConfigError(ValueError):
    """Raised for unparseable or invalid run configuration."""


def _expect_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _check_keys(section: dict, allowed, where: str):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _float(value, name: str) -> float:
    if isinstance(value, str):
        # YAML 1.1 only recognises exponents written with a sign, so a
        # natural "1.0e8" reaches us as a string; accept it anyway.
        try:
            out = float(value)
        except ValueError:
            raise ConfigError(f"{name} must be a number, got {value!r}") from None
        if not math.isfinite(out):
            raise ConfigError(f"{name} must be a finite number, got {value!r}")
        return out
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


def _positive(value, name: str) -> float:
    out = _float(value, name)
    if out <= 0.0:
        raise ConfigError(f"{name} must be positive, got {out}")
    return out


def _float_list(value, name: str, length: int) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(f"{name} must be a list of {length} numbers")
    return tuple(_float(v, f"{name}[{i}]") for i, v in enumerate(value))


@dataclass(frozen=True)
class ControllerSettings:
    """Weights and robustness levels shared by both controllers."""

    q_diag: tuple = DEFAULT_Q_DIAG
    r_value: float = DEFAULT_R_VALUE
    mu: float = 1e8
    gamma: object = "auto"
    gamma_margin: float = 1.3
    gamma_search_hi: float = 1e6

    def q_mat(self) -> np.ndarray:
        return np.diag(np.asarray(self.q_diag, dtype=float))

    def r_mat(self) -> np.ndarray:
        return np.array([[self.r_value]])

    def gamma_auto(self) -> bool:
        return isinstance(self.gamma, str)

    def gamma_bracket(self) -> float:
        """Fixed level, or the upper bisection bracket in auto mode."""
        return self.gamma_search_hi if self.gamma_auto() else float(self.gamma)


@dataclass(frozen=True)
class UncertaintySettings:
    """How the synthesis-side perturbation set is obtained.

    mode "reference" uses the stored vectors for the standard vehicle,
    "derived" rebuilds them from the discrete-matrix drift over the payload
    band, "explicit" takes them verbatim from the config, and "none"
    disables the perturbation (plain regulator).
    """

    mode: str = "reference"
    payload_min: float | None = None
    payload_max: float | None = None
    row_index: int = 5
    ef_scale: tuple = DEFAULT_EF_SCALE
    eg_scale: tuple = DEFAULT_EG_SCALE
    ef: tuple | None = None
    eg: float | None = None

    def build(self, params: VehicleParams, ts: float) -> UncertaintyModel | None:
        if self.mode == "none":
            return None
        if self.mode == "reference":
            return reference_uncertainty()
        if self.mode == "explicit":
            if self.ef is None or self.eg is None:
                raise ConfigError("uncertainty mode 'explicit' requires both ef and eg")
            n = len(self.ef)
            return UncertaintyModel(
                h_mat=np.ones((n, 1)),
                ef_mat=np.array([list(self.ef)], dtype=float),
                eg_mat=np.array([[self.eg]], dtype=float),
            )
        gamma_f = payload_variation_matrix(params, ts, self.payload_min, self.payload_max)
        return build_uncertainty(
            gamma_f,
            row_index=self.row_index,
            ef_scale=self.ef_scale,
            eg_scale=self.eg_scale,
        )


@dataclass(frozen=True)
class ScenarioSettings:
    """Scenario block with the payloads left open until the case is chosen."""

    x0: tuple = (0.0, 0.0, 0.0, 0.0, 0.3, -0.1)
    duration: float = 30.0
    ts: float = 0.01
    steering_limit: float = 0.44
    lane_offset: float = 3.5
    geometry: tuple = (100.0, 50.0, 100.0, 50.0)
    use_feedforward: bool = True

    def scenario(self, payload_true: float, payload_design: float, v: float) -> Scenario:
        return Scenario(
            x0=np.asarray(self.x0, dtype=float),
            duration=self.duration,
            ts=self.ts,
            payload_true=payload_true,
            payload_design=payload_design,
            steering_limit=self.steering_limit,
            lane_offset=self.lane_offset,
            geometry=self.geometry,
            v=v,
            use_feedforward=self.use_feedforward,
        )


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for a batch of case runs."""

    vehicle: VehicleParams = field(default_factory=VehicleParams)
    controller: ControllerSettings = field(default_factory=ControllerSettings)
    uncertainty: UncertaintySettings = field(default_factory=UncertaintySettings)
    scenario: ScenarioSettings = field(default_factory=ScenarioSettings)
    cases: tuple = (1, 2, 3, 4)
    output_dir: str = "runs"

    def scenario_for(self, payload_true: float, payload_design: float, v: float) -> Scenario:
        return self.scenario.scenario(payload_true, payload_design, v)

    def uncertainty_model(self, params: VehicleParams, ts: float) -> UncertaintyModel | None:
        return self.uncertainty.build(params, ts)


def _parse_vehicle(section: dict) -> VehicleParams:
    names = [f.name for f in dataclasses.fields(VehicleParams)]
    _check_keys(section, names, "vehicle")
    overrides = {key: _float(value, f"vehicle.{key}") for key, value in section.items()}
    try:
        return VehicleParams(**overrides)
    except ValueError as exc:
        raise ConfigError(f"vehicle: {exc}") from exc


def _parse_mu(value) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return _positive(value, "controller.mu")


def _parse_controller(section: dict) -> ControllerSettings:
    _check_keys(
        section,
        ("q_diag", "r_value", "mu", "gamma", "gamma_margin", "gamma_search_hi"),
        "controller",
    )
    kwargs = {}
    if "q_diag" in section:
        diag = _float_list(section["q_diag"], "controller.q_diag", N_STATES)
        if any(d <= 0.0 for d in diag):
            raise ConfigError(f"controller.q_diag entries must be positive, got {diag}")
        kwargs["q_diag"] = diag
    if "r_value" in section:
        kwargs["r_value"] = _positive(section["r_value"], "controller.r_value")
    if "mu" in section:
        kwargs["mu"] = _parse_mu(section["mu"])
    if "gamma" in section:
        value = section["gamma"]
        if isinstance(value, str) and value.lower() == "auto":
            kwargs["gamma"] = "auto"
        else:
            kwargs["gamma"] = _positive(value, "controller.gamma")
    if "gamma_margin" in section:
        margin = _float(section["gamma_margin"], "controller.gamma_margin")
        if margin < 1.0:
            raise ConfigError(f"controller.gamma_margin must be >= 1, got {margin}")
        kwargs["gamma_margin"] = margin
    if "gamma_search_hi" in section:
        kwargs["gamma_search_hi"] = _positive(section["gamma_search_hi"], "controller.gamma_search_hi")
    return ControllerSettings(**kwargs)


def _parse_uncertainty(section: dict) -> UncertaintySettings:
    _check_keys(
        section,
        ("mode", "payload_min", "payload_max", "row_index", "ef_scale", "eg_scale", "ef", "eg"),
        "uncertainty",
    )
    kwargs = {}
    if "mode" in section:
        mode = section["mode"]
        if mode not in ("reference", "derived", "explicit", "none"):
            raise ConfigError(
                f"uncertainty.mode must be one of reference, derived, explicit, none; got {mode!r}"
            )
        kwargs["mode"] = mode
    if "payload_min" in section and section["payload_min"] is not None:
        value = _float(section["payload_min"], "uncertainty.payload_min")
        if value < 0.0:
            raise ConfigError(f"uncertainty.payload_min must be nonnegative, got {value}")
        kwargs["payload_min"] = value
    if "payload_max" in section and section["payload_max"] is not None:
        kwargs["payload_max"] = _positive(section["payload_max"], "uncertainty.payload_max")
    if "row_index" in section:
        row = section["row_index"]
        if isinstance(row, bool) or not isinstance(row, int):
            raise ConfigError(f"uncertainty.row_index must be an integer, got {row!r}")
        kwargs["row_index"] = row
    if "ef_scale" in section:
        kwargs["ef_scale"] = _float_list(section["ef_scale"], "uncertainty.ef_scale", N_STATES)
    if "eg_scale" in section:
        kwargs["eg_scale"] = _float_list(section["eg_scale"], "uncertainty.eg_scale", 1)
    if "ef" in section:
        kwargs["ef"] = _float_list(section["ef"], "uncertainty.ef", N_STATES)
    if "eg" in section:
        kwargs["eg"] = _float(section["eg"], "uncertainty.eg")
    return UncertaintySettings(**kwargs)


def _parse_scenario(section: dict) -> ScenarioSettings:
    _check_keys(
        section,
        ("x0", "duration", "ts", "steering_limit", "lane_offset", "geometry", "use_feedforward"),
        "scenario",
    )
    kwargs = {}
    if "x0" in section:
        kwargs["x0"] = _float_list(section["x0"], "scenario.x0", N_STATES)
    for key in ("duration", "ts", "steering_limit"):
        if key in section:
            kwargs[key] = _positive(section[key], f"scenario.{key}")
    if "lane_offset" in section:
        kwargs["lane_offset"] = _float(section["lane_offset"], "scenario.lane_offset")
    if "geometry" in section:
        geometry = _float_list(section["geometry"], "scenario.geometry", 4)
        if any(g <= 0.0 for g in geometry):
            raise ConfigError(f"scenario.geometry segments must be positive, got {geometry}")
        kwargs["geometry"] = geometry
    if "use_feedforward" in section:
        flag = section["use_feedforward"]
        if not isinstance(flag, bool):
            raise ConfigError(f"scenario.use_feedforward must be a boolean, got {flag!r}")
        kwargs["use_feedforward"] = flag
    return ScenarioSettings(**kwargs)


def _parse_cases(value) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("cases must be a non-empty list of case ids")
    cases = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int) or item not in (1, 2, 3, 4):
            raise ConfigError(f"cases entries must be integers in 1..4, got {item!r}")
        if item in cases:
            raise ConfigError(f"duplicate case id {item}")
        cases.append(item)
    return tuple(cases)


def parse_config(data: dict | None, source: str = "config") -> RunConfig:
    """Validate a parsed YAML document into a RunConfig."""
    data = _expect_mapping(data, source)
    _check_keys(
        data,
        ("schema_version", "vehicle", "controller", "uncertainty", "scenario", "cases", "output"),
        source,
    )
    if "schema_version" in data and data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {data['schema_version']!r}, expected {SCHEMA_VERSION}"
        )
    kwargs = {}
    if "vehicle" in data:
        kwargs["vehicle"] = _parse_vehicle(_expect_mapping(data["vehicle"], "vehicle"))
    if "controller" in data:
        kwargs["controller"] = _parse_controller(_expect_mapping(data["controller"], "controller"))
    if "uncertainty" in data:
        kwargs["uncertainty"] = _parse_uncertainty(_expect_mapping(data["uncertainty"], "uncertainty"))
    if "scenario" in data:
        kwargs["scenario"] = _parse_scenario(_expect_mapping(data["scenario"], "scenario"))
    if "cases" in data:
        kwargs["cases"] = _parse_cases(data["cases"])
    if "output" in data:
        output = _expect_mapping(data["output"], "output")
        _check_keys(output, ("dir",), "output")
        if "dir" in output:
            if not isinstance(output["dir"], str) or not output["dir"]:
                raise ConfigError("output.dir must be a non-empty string")
            kwargs["output_dir"] = output["dir"]
    return RunConfig(**kwargs)


def load_config(path: str) -> RunConfig:
    """Load and validate a YAML run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ConfigError(f"{path}: parse error at line {mark.line + 1}: {exc}") from exc
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    return parse_config(data, source=path)
