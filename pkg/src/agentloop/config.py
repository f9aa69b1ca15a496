"""Scenario configuration: schema, lossless JSON round-trip, presets.

All numeric fields are seconds or 1/s as documented per field; floats
serialize with shortest round-trip decimals, so parse -> serialize ->
parse is exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .model import AgencyLevel, AdaptationLaw, DelayBudget, ModeDynamics
from .policies import (
    DwellConstrained,
    Hysteresis,
    PeriodicReconfig,
    SwitchingPolicy,
    ThresholdSign,
)


class ConfigError(ValueError):
    """Malformed configuration; message names the offending field."""


@dataclass
class IntegratorSettings:
    """Fixed-step integrator setup.  dt and horizon in seconds."""

    dt: float = 1e-3
    horizon: float = 30.0
    x0: list[float] = field(default_factory=lambda: [1.0, -1.0])
    theta0: list[float] = field(default_factory=lambda: [0.0])
    m0: list[float] = field(default_factory=list)
    zeta0: list[float] = field(default_factory=list)
    sigma0: int = 1
    c0: int = 1


@dataclass
class ClassifierSettings:
    """Outcome thresholds: settle_tol on the final norm, blowup_tol on the peak."""

    settle_tol: float = 1e-2
    blowup_tol: float = 1e6


@dataclass
class BudgetSpec:
    """Declared margin constants; None means derive where possible.

    gamma and the jump factors can be computed from quadratic
    certificates; l_theta, l_d and beta must be declared whenever their
    mechanism is active.  Dwell times default to the enforcing policy's
    parameters.
    """

    gamma: float | None = None
    nu_sigma: float | None = None
    nu_c: float | None = None
    l_theta: float | None = None
    l_d: float | None = None
    beta: float | None = None
    tau_a_sigma: float | None = None
    tau_a_c: float | None = None


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    agency_level: AgencyLevel = AgencyLevel.L1
    modes: list[ModeDynamics] = field(default_factory=list)
    configurations: list[ModeDynamics] = field(default_factory=list)
    delays: DelayBudget = field(default_factory=DelayBudget)
    policy: SwitchingPolicy | None = None
    reconfig: PeriodicReconfig | None = None
    adaptation: AdaptationLaw = field(default_factory=AdaptationLaw)
    theta_coupling: float = 0.0  # gain feeding theta back into the plant flow
    drift_rate: float = 0.0  # eta_d, bounded design drift rate (L5)
    private_state_indices: list[int] = field(default_factory=list)
    private_state_reset: str = "zero"  # "zero" | "carry" on reconfiguration
    budget: BudgetSpec = field(default_factory=BudgetSpec)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)


def _policy_to_dict(p: SwitchingPolicy | None):
    if p is None:
        return None
    if isinstance(p, DwellConstrained):
        return {"kind": "dwell", "tau_a": p.tau_a, "inner": _policy_to_dict(p.inner)}
    if isinstance(p, Hysteresis):
        return {"kind": "hysteresis", "band": p.band,
                "score_channel": p.score_channel, "decision_delay": p.decision_delay}
    return {"kind": "threshold", "score_channel": p.score_channel,
            "decision_delay": p.decision_delay}


def _policy_from_dict(d) -> SwitchingPolicy | None:
    if d is None:
        return None
    kind = d.get("kind")
    if kind == "dwell":
        inner = _policy_from_dict(d.get("inner"))
        if inner is None or isinstance(inner, DwellConstrained):
            raise ConfigError("policy.inner: dwell requires a threshold or hysteresis inner policy")
        if "tau_a" not in d:
            raise ConfigError("policy.tau_a: missing dwell time")
        return DwellConstrained(tau_a=float(d["tau_a"]), inner=inner)
    if kind == "hysteresis":
        if "band" not in d:
            raise ConfigError("policy.band: missing hysteresis band")
        return Hysteresis(band=float(d["band"]),
                          score_channel=int(d.get("score_channel", 1)),
                          decision_delay=float(d.get("decision_delay", 0.0)))
    if kind == "threshold":
        return ThresholdSign(score_channel=int(d.get("score_channel", 1)),
                             decision_delay=float(d.get("decision_delay", 0.0)))
    raise ConfigError(f"policy.kind: unknown kind {kind!r}")


def _mode_to_dict(m: ModeDynamics):
    return {"a": m.a.tolist(), "a_delay": m.a_delay.tolist(), "label": m.label}


def _mode_from_dict(d, where: str) -> ModeDynamics:
    if "a" not in d:
        raise ConfigError(f"{where}.a: missing flow matrix")
    return ModeDynamics(
        a=np.asarray(d["a"], dtype=float),
        a_delay=None if d.get("a_delay") is None else np.asarray(d["a_delay"], dtype=float),
        label=str(d.get("label", "")),
    )


def to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "name": cfg.name,
        "agency_level": cfg.agency_level.name,
        "modes": [_mode_to_dict(m) for m in cfg.modes],
        "configurations": [_mode_to_dict(m) for m in cfg.configurations],
        "delays": asdict(cfg.delays),
        "policy": _policy_to_dict(cfg.policy),
        "reconfig": None if cfg.reconfig is None else {"period": cfg.reconfig.period},
        "adaptation": asdict(cfg.adaptation),
        "theta_coupling": cfg.theta_coupling,
        "drift_rate": cfg.drift_rate,
        "private_state_indices": list(cfg.private_state_indices),
        "private_state_reset": cfg.private_state_reset,
        "budget": asdict(cfg.budget),
        "integrator": asdict(cfg.integrator),
        "classifier": asdict(cfg.classifier),
    }


def _build(cls, d: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    fields = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(d) - fields
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def from_dict(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be an object")
    known = {
        "name", "agency_level", "modes", "configurations", "delays", "policy",
        "reconfig", "adaptation", "theta_coupling", "drift_rate",
        "private_state_indices", "private_state_reset", "budget", "integrator",
        "classifier",
    }
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")

    level_name = d.get("agency_level", "L1")
    try:
        level = AgencyLevel[level_name]
    except KeyError:
        raise ConfigError(f"agency_level: unknown level {level_name!r}") from None

    reconfig_d = d.get("reconfig")
    if reconfig_d is not None and "period" not in reconfig_d:
        raise ConfigError("reconfig.period: missing reconfiguration period")
    return ScenarioConfig(
        name=str(d.get("name", "scenario")),
        agency_level=level,
        modes=[_mode_from_dict(m, f"modes[{i}]") for i, m in enumerate(d.get("modes", []))],
        configurations=[_mode_from_dict(m, f"configurations[{i}]")
                        for i, m in enumerate(d.get("configurations", []))],
        delays=_build(DelayBudget, d.get("delays", {}), "delays"),
        policy=_policy_from_dict(d.get("policy")),
        reconfig=None if reconfig_d is None else PeriodicReconfig(period=float(reconfig_d["period"])),
        adaptation=_build(AdaptationLaw, d.get("adaptation", {}), "adaptation"),
        theta_coupling=float(d.get("theta_coupling", 0.0)),
        drift_rate=float(d.get("drift_rate", 0.0)),
        private_state_indices=[int(i) for i in d.get("private_state_indices", [])],
        private_state_reset=str(d.get("private_state_reset", "zero")),
        budget=_build(BudgetSpec, d.get("budget", {}), "budget"),
        integrator=_build(IntegratorSettings, d.get("integrator", {}), "integrator"),
        classifier=_build(ClassifierSettings, d.get("classifier", {}), "classifier"),
    )


def dumps(cfg: ScenarioConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=False) + "\n"


def loads(text: str) -> ScenarioConfig:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON ({e})") from None
    return from_dict(d)


def save(cfg: ScenarioConfig, path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(cfg), encoding="utf-8")


def load(path) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config: file not found: {p}")
    return loads(p.read_text(encoding="utf-8"))
