"""Domain types for the augmented closed loop and the authority hierarchy.

Structure and validation only; dynamics live in the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np


def _as_vector(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


def _as_matrix(m) -> np.ndarray:
    return np.atleast_2d(np.asarray(m, dtype=float))


class AgencyLevel(IntEnum):
    """Cumulative runtime-authority levels.

    L1 executes a fixed policy.  L2 adds parameter adaptation, L3 mode
    switching, L4 configuration jumps, L5 continuous design drift.
    """

    L1 = 1
    L2 = 2
    L3 = 3
    L4 = 4
    L5 = 5

    @property
    def allows_adaptation(self) -> bool:
        return self >= AgencyLevel.L2

    @property
    def allows_switching(self) -> bool:
        return self >= AgencyLevel.L3

    @property
    def allows_reconfiguration(self) -> bool:
        return self >= AgencyLevel.L4

    @property
    def allows_design_drift(self) -> bool:
        return self >= AgencyLevel.L5


class DesignTuple(NamedTuple):
    zeta: np.ndarray
    sigma: int
    c: int


@dataclass
class AugmentedState:
    """One snapshot of the jointly evolved loop state.

    Continuous parts: plant state ``x``, memory ``m``, adaptable
    parameters ``theta``, goal descriptor ``zeta``.  Discrete parts:
    mode index ``sigma`` and configuration index ``c`` (both 1-based).
    """

    t: float
    x: np.ndarray
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    zeta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sigma: int = 1
    c: int = 1

    def __post_init__(self):
        self.x = _as_vector(self.x)
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        self.m = np.asarray(self.m, dtype=float).reshape(-1)
        self.zeta = np.asarray(self.zeta, dtype=float).reshape(-1)

    def violations(self, mode_count: int = 1, config_count: int = 1) -> list[str]:
        out = []
        for name in ("x", "theta", "m", "zeta"):
            if not np.all(np.isfinite(getattr(self, name))):
                out.append(f"state.{name}: non-finite entries")
        if not np.isfinite(self.t):
            out.append("state.t: non-finite")
        if not 1 <= self.sigma <= mode_count:
            out.append(f"state.sigma: {self.sigma} outside 1..{mode_count}")
        if not 1 <= self.c <= config_count:
            out.append(f"state.c: {self.c} outside 1..{config_count}")
        return out


def project_design_state(s: AugmentedState) -> DesignTuple:
    """Project out the design variables (zeta, sigma, c), unchanged."""
    return DesignTuple(s.zeta, s.sigma, s.c)


@dataclass
class ModeDynamics:
    """Linear flow of one mode: dx/dt = a x(t) + a_delay x(t - tau_bar)."""

    a: np.ndarray
    a_delay: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        self.a = _as_matrix(self.a)
        if self.a_delay is None:
            self.a_delay = np.zeros_like(self.a)
        else:
            self.a_delay = _as_matrix(self.a_delay)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModeDynamics):
            return NotImplemented
        return (np.array_equal(self.a, other.a)
                and np.array_equal(self.a_delay, other.a_delay)
                and self.label == other.label)

    def violations(self, prefix: str = "mode") -> list[str]:
        out = []
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            out.append(f"{prefix}.a: not square, shape {self.a.shape}")
        if self.a_delay.ndim != 2 or self.a_delay.shape[0] != self.a_delay.shape[1]:
            out.append(f"{prefix}.a_delay: not square, shape {self.a_delay.shape}")
        if not out and self.a.shape != self.a_delay.shape:
            out.append(
                f"{prefix}: dimension mismatch, a is {self.a.shape[0]}x{self.a.shape[1]} "
                f"but a_delay is {self.a_delay.shape[0]}x{self.a_delay.shape[1]}"
            )
        if not np.all(np.isfinite(self.a)):
            out.append(f"{prefix}.a: non-finite entries")
        if not np.all(np.isfinite(self.a_delay)):
            out.append(f"{prefix}.a_delay: non-finite entries")
        return out


@dataclass
class AdaptationLaw:
    """First-order lag of theta toward a state-dependent bounded target.

    d(theta)/dt = rho * (kappa * tanh(|x|) - theta).  With ``enabled``
    False, theta is held constant along flows.
    """

    rho: float = 0.0
    kappa: float = 0.3
    enabled: bool = False

    def violations(self) -> list[str]:
        out = []
        if self.rho < 0:
            out.append(f"adaptation.rho: negative rate {self.rho}")
        if self.kappa < 0:
            out.append(f"adaptation.kappa: negative amplitude {self.kappa}")
        return out


@dataclass
class DelayBudget:
    """Per-channel latencies and the declared total effective bound tau_bar.

    tau_bar is the declared supremum of the summed channel delays, not a
    computed sum; validation only requires it to dominate each channel.
    All values in seconds.
    """

    tau_u: float = 0.0
    tau_theta: float = 0.0
    tau_z: float = 0.0
    tau_sigma: float = 0.0
    tau_c: float = 0.0
    tau_zeta: float = 0.0
    tau_bar: float = 0.0

    _CHANNELS = ("tau_u", "tau_theta", "tau_z", "tau_sigma", "tau_c", "tau_zeta")

    def violations(self) -> list[str]:
        out = []
        for name in self._CHANNELS:
            v = getattr(self, name)
            if v < 0:
                out.append(f"delays.{name}: negative delay {v}")
        if self.tau_bar < 0:
            out.append(f"delays.tau_bar: negative bound {self.tau_bar}")
        for name in self._CHANNELS:
            v = getattr(self, name)
            if v > self.tau_bar:
                out.append(f"delays.tau_bar: declared bound {self.tau_bar} below channel {name}={v}")
        return out


@dataclass
class ValidationReport:
    """Accumulated violations; empty means the scenario is runnable."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str) -> None:
        self.violations.append(msg)

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"- {v}" for v in self.violations)


def validate_scenario(scenario) -> ValidationReport:
    """Check a ScenarioConfig for structural and authority-level consistency.

    Report-style: collects every violation instead of aborting on the
    first.  An empty report means the engine will accept the scenario.
    """
    from . import policies as pol  # local import, keeps module layering flat

    rep = ValidationReport()
    level = scenario.agency_level
    n = len(_as_vector(scenario.integrator.x0))

    dyn_list = scenario.modes if scenario.modes else scenario.configurations
    if not dyn_list:
        rep.add("modes: scenario declares no dynamics (modes and configurations both empty)")
    if scenario.modes and scenario.configurations and len(scenario.modes) > 1 and len(scenario.configurations) > 1:
        rep.add("modes/configurations: joint mode x configuration dynamics tables are not supported")

    for i, mode in enumerate(scenario.modes):
        for v in mode.violations(prefix=f"modes[{i}]"):
            rep.add(v)
        if mode.a.ndim == 2 and mode.a.shape[0] == mode.a.shape[1] and mode.a.shape[0] != n:
            rep.add(f"modes[{i}].a: dimension {mode.a.shape[0]} does not match x0 dimension {n}")
    for i, cfg in enumerate(scenario.configurations):
        for v in cfg.violations(prefix=f"configurations[{i}]"):
            rep.add(v)
        if cfg.a.ndim == 2 and cfg.a.shape[0] == cfg.a.shape[1] and cfg.a.shape[0] != n:
            rep.add(f"configurations[{i}].a: dimension {cfg.a.shape[0]} does not match x0 dimension {n}")

    for v in scenario.delays.violations():
        rep.add(v)
    for v in scenario.adaptation.violations():
        rep.add(v)

    # authority gating: a mechanism asserted below its level is an error
    if scenario.adaptation.enabled and scenario.adaptation.rho > 0 and not level.allows_adaptation:
        rep.add(f"adaptation: forbidden at {level.name} (adaptation requires L2+)")
    if scenario.policy is not None and not level.allows_switching:
        rep.add(f"policy: mode switching forbidden at {level.name} (requires L3+)")
    if scenario.reconfig is not None and not level.allows_reconfiguration:
        rep.add(f"reconfig: configuration jumps forbidden at {level.name} (requires L4+)")
    if scenario.drift_rate > 0 and not level.allows_design_drift:
        rep.add(f"drift_rate: design drift forbidden at {level.name} (requires L5)")
    if scenario.drift_rate < 0:
        rep.add(f"drift_rate: negative rate {scenario.drift_rate}")

    if scenario.policy is not None:
        for v in pol.policy_violations(scenario.policy, n):
            rep.add(v)
        if len(scenario.modes) != 2:
            rep.add(f"policy: switching requires exactly 2 modes, scenario declares {len(scenario.modes)}")
    if scenario.reconfig is not None:
        if scenario.reconfig.period <= 0:
            rep.add(f"reconfig.period: must be positive, got {scenario.reconfig.period}")
        if len(scenario.configurations) < 2:
            rep.add(
                "reconfig: configuration jumps require >= 2 configurations, "
                f"scenario declares {len(scenario.configurations)}"
            )
    for idx in scenario.private_state_indices:
        if not 0 <= idx < n:
            rep.add(f"private_state_indices: index {idx} outside state dimension {n}")

    it = scenario.integrator
    if it.dt <= 0:
        rep.add(f"integrator.dt: must be positive, got {it.dt}")
    if it.horizon <= 0:
        rep.add(f"integrator.horizon: must be positive, got {it.horizon}")
    tau_bar = scenario.delays.tau_bar
    if it.dt > 0 and 0 < tau_bar < it.dt:
        rep.add(
            f"delays.tau_bar: {tau_bar} shorter than one step dt={it.dt}; "
            "stage reads would need future samples (use tau_bar = 0 or tau_bar >= dt)"
        )
    if not 1 <= it.sigma0 <= max(len(scenario.modes), 1):
        rep.add(f"integrator.sigma0: {it.sigma0} outside declared mode range")
    if not 1 <= it.c0 <= max(len(scenario.configurations), 1):
        rep.add(f"integrator.c0: {it.c0} outside declared configuration range")

    cl = scenario.classifier
    if cl.settle_tol <= 0:
        rep.add(f"classifier.settle_tol: must be positive, got {cl.settle_tol}")
    if cl.blowup_tol <= cl.settle_tol:
        rep.add("classifier.blowup_tol: must exceed settle_tol")
    return rep
