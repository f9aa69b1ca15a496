"""Endogenous decision rules: switching, hysteresis, dwell enforcement,
adaptation targets, design drift, and switch-count statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True)
class ThresholdSign:
    """Switch on the sign of the decision score: mode 1 if score >= 0, else 2."""

    score_channel: int = 1  # 1-based index into x
    decision_delay: float = 0.0  # score read at t - decision_delay


@dataclass(frozen=True)
class Hysteresis:
    """Three-branch rule: 1 if score >= band, 2 if score <= -band, else hold."""

    band: float
    score_channel: int = 1
    decision_delay: float = 0.0


@dataclass(frozen=True)
class DwellConstrained:
    """Suppress the inner policy's decision until tau_a has elapsed since
    the last switch."""

    tau_a: float
    inner: Union[ThresholdSign, Hysteresis]


SwitchingPolicy = Union[ThresholdSign, Hysteresis, DwellConstrained]


def score_spec(policy: SwitchingPolicy) -> tuple[int, float]:
    """(score_channel, decision_delay) of the policy's score source."""
    inner = policy.inner if isinstance(policy, DwellConstrained) else policy
    return inner.score_channel, inner.decision_delay


def policy_violations(policy: SwitchingPolicy, state_dim: int) -> list[str]:
    out = []
    inner = policy
    if isinstance(policy, DwellConstrained):
        if policy.tau_a < 0:
            out.append(f"policy.tau_a: negative dwell time {policy.tau_a}")
        if isinstance(policy.inner, DwellConstrained):
            out.append("policy.inner: nested dwell constraints are not allowed")
            return out
        inner = policy.inner
    if isinstance(inner, Hysteresis) and inner.band <= 0:
        out.append(f"policy.band: hysteresis requires band > 0, got {inner.band}")
    if not 1 <= inner.score_channel <= state_dim:
        out.append(f"policy.score_channel: {inner.score_channel} outside 1..{state_dim}")
    if inner.decision_delay < 0:
        out.append(f"policy.decision_delay: negative delay {inner.decision_delay}")
    return out


def decide_mode(
    policy: SwitchingPolicy,
    score: float,
    current_mode: int,
    t: float,
    last_switch: float,
) -> int:
    """Evaluate the switching rule; total function, returns 1 or 2."""
    if isinstance(policy, DwellConstrained):
        if t - last_switch < policy.tau_a:
            return current_mode
        return decide_mode(policy.inner, score, current_mode, t, last_switch)
    if isinstance(policy, Hysteresis):
        if score >= policy.band:
            return 1
        if score <= -policy.band:
            return 2
        return current_mode
    return 1 if score >= 0 else 2


@dataclass(frozen=True)
class PeriodicReconfig:
    """Cycle the configuration index every `period` seconds."""

    period: float


def adaptation_target(x, kappa: float) -> float:
    """Bounded target kappa * tanh(|x|), saturating below kappa."""
    return kappa * math.tanh(float(np.linalg.norm(x)))


def design_drift(d, eta_d: float, t: float) -> np.ndarray:
    """Bounded drift law with |d_dot| <= eta_d exactly.

    Shipped law: eta_d * sin(t) along the normalized all-ones direction.
    Only its rate bound matters to the certificates.
    """
    d = np.asarray(d, dtype=float).reshape(-1)
    if eta_d == 0.0 or d.size == 0:
        return np.zeros_like(d)
    unit = np.ones_like(d) / math.sqrt(d.size)
    return eta_d * math.sin(t) * unit


@dataclass
class SwitchStats:
    """Mode-switch timing summary extracted from a trajectory's event log."""

    switch_times: list[float] = field(default_factory=list)
    min_gap: float = math.inf
    mean_gap: float = math.inf

    @property
    def count(self) -> int:
        return len(self.switch_times)

    def n_sigma(self, t: float, horizon: float) -> int:
        """Number of switches in the window (t, t + horizon]."""
        return sum(1 for s in self.switch_times if t < s <= t + horizon)


def switch_statistics(traj) -> SwitchStats:
    """Gap statistics over a trajectory's sigma-switch events."""
    times = [ev.t for ev in traj.events if ev.kind == "switch"]
    gaps = [b - a for a, b in zip(times, times[1:])]
    return SwitchStats(
        switch_times=times,
        min_gap=min(gaps) if gaps else math.inf,
        mean_gap=sum(gaps) / len(gaps) if gaps else math.inf,
    )


def empirical_score_rate(traj, channel: int = 1) -> float:
    """Max observed |delta score| / dt along a run: the empirical rate
    bound entering the hysteresis dwell estimate."""
    s = traj.x[:, channel - 1]
    if s.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(s)))) / traj.dt


def hysteresis_dwell_bound(h_lower: float, m_upper: float) -> float:
    """Guaranteed inter-switch gap 2 h_lower / m_upper induced by a
    hysteresis band h_lower under score rate bound m_upper."""
    if h_lower <= 0:
        raise ValueError(f"h_lower must be positive, got {h_lower}")
    if m_upper <= 0:
        raise ValueError(f"m_upper must be positive, got {m_upper}")
    return 2.0 * h_lower / m_upper
