"""Deterministic fixed-step integrator for delayed flows with discrete jumps.

Classical RK4 on the coupled (x, theta, m, zeta) flow, method-of-steps
for the delayed plant coupling, switching and reconfiguration applied at
step boundaries only.  Identical configs produce identical trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .model import AugmentedState, AdaptationLaw, ModeDynamics
from . import policies as pol


class HistoryError(ValueError):
    """Raised on a delayed read beyond the newest stored sample."""


class BlowupError(RuntimeError):
    """Non-finite state during integration; carries the last finite state."""

    def __init__(self, msg: str, last_state: AugmentedState | None = None):
        super().__init__(msg)
        self.last_state = last_state


class ScenarioError(ValueError):
    """Scenario failed validation; message lists every violation."""


class HistoryBuffer:
    """Time-indexed samples of x supporting delayed reads x(t - tau).

    Queries before the first sample return the initial-history function
    (constant at the first sample unless a callable is given); queries
    between samples interpolate linearly; queries beyond the newest
    sample raise (future read).
    """

    def __init__(self, t0: float, x0, initial_history=None):
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        self._cap = 1024
        self._times = np.empty(self._cap)
        self._values = np.empty((self._cap, x0.size))
        self._n = 0
        self._cursor = 1
        self._initial = initial_history
        self.append(t0, x0)

    @property
    def times(self) -> np.ndarray:
        return self._times[: self._n]

    @property
    def newest_time(self) -> float:
        return float(self._times[self._n - 1])

    def append(self, t: float, x) -> None:
        if self._n and t <= self._times[self._n - 1]:
            raise ValueError(
                f"sample times must strictly increase: {t} after {self._times[self._n - 1]}"
            )
        if self._n == self._cap:
            self._cap *= 2
            times = np.empty(self._cap)
            values = np.empty((self._cap, self._values.shape[1]))
            times[: self._n] = self._times[: self._n]
            values[: self._n] = self._values[: self._n]
            self._times, self._values = times, values
        self._times[self._n] = t
        self._values[self._n] = np.asarray(x, dtype=float)
        self._n += 1

    def replace_newest(self, x) -> None:
        """Overwrite the newest sample in place (post-jump value at a
        jump instant, so delayed reads across the jump see the reset)."""
        self._values[self._n - 1] = np.asarray(x, dtype=float)

    def sample(self, t_query: float) -> np.ndarray:
        if t_query > self._times[self._n - 1]:
            raise HistoryError(
                f"future read: t={t_query} beyond newest sample t={self._times[self._n - 1]}"
            )
        if t_query <= self._times[0]:
            if t_query == self._times[0] or self._initial is None:
                return self._values[0].copy()
            return np.asarray(self._initial(t_query), dtype=float).reshape(-1)
        # queries advance monotonically during integration; try the cached
        # bracket before falling back to bisection
        i = self._cursor
        if not (0 < i < self._n and self._times[i - 1] < t_query <= self._times[i]):
            i = int(np.searchsorted(self._times[: self._n], t_query, side="left"))
            self._cursor = i
        if self._times[i] == t_query:
            return self._values[i].copy()
        t0, t1 = self._times[i - 1], self._times[i]
        w = (t_query - t0) / (t1 - t0)
        return (1.0 - w) * self._values[i - 1] + w * self._values[i]


def sample_delayed(h: HistoryBuffer, t_query: float) -> np.ndarray:
    """Delayed state read; see HistoryBuffer.sample."""
    return h.sample(t_query)


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # "switch" | "reconfig"
    from_index: int
    to_index: int


class Outcome(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class StabilityVerdict:
    outcome: Outcome
    final_norm: float
    peak_norm: float
    blowup_time: float | None = None

    @property
    def is_stable(self) -> bool:
        return self.outcome is Outcome.STABLE


@dataclass
class Trajectory:
    """Columnar state series plus the ordered event log.

    Row i holds the state at t_i after any jumps that fired there, i.e.
    the value the following flow step departs from.
    """

    dt: float
    times: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    m: np.ndarray
    zeta: np.ndarray
    sigma: np.ndarray
    c: np.ndarray
    events: list[Event] = field(default_factory=list)
    blowup: bool = False  # truncated after |x| crossed the divergence threshold
    nonfinite: bool = False  # truncated after a non-finite step result
    blowup_time: float | None = None

    def __len__(self) -> int:
        return self.times.size

    @property
    def complete(self) -> bool:
        return not (self.blowup or self.nonfinite)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)

    def state(self, i: int) -> AugmentedState:
        return AugmentedState(
            t=float(self.times[i]),
            x=self.x[i].copy(),
            theta=self.theta[i].copy(),
            m=self.m[i].copy(),
            zeta=self.zeta[i].copy(),
            sigma=int(self.sigma[i]),
            c=int(self.c[i]),
        )

    def states(self) -> Iterator[AugmentedState]:
        for i in range(len(self)):
            yield self.state(i)


def _flow_rk4(x, theta, m, zeta, t, dt, a, a_delay, law: AdaptationLaw,
              history: HistoryBuffer | None, tau_bar: float,
              drift_rate: float, coupling_gain: float, memory_diag):
    """One RK4 step of the coupled flow.  Returns (x, theta, m, zeta).

    The delayed plant term reads the history at each internal stage time;
    tau_bar = 0 short-circuits to the stage value, so a zero delay is
    exactly the undelayed integrator.
    """
    delayed = tau_bar > 0.0
    adapting = law.enabled and theta.size > 0
    coupling = coupling_gain != 0.0 and theta.size > 0
    drifting = drift_rate > 0.0 and zeta.size > 0
    zero_th = np.zeros_like(theta)
    zero_z = np.zeros_like(zeta)

    def rhs(ts, xs, ths, ms, zs):
        xd = history.sample(ts - tau_bar) if delayed else xs
        dx = a @ xs + a_delay @ xd
        if coupling:
            dx += coupling_gain * ths[0] * xs
        if adapting:
            target = law.kappa * math.tanh(math.sqrt(float(xs @ xs)))
            dth = law.rho * (target - ths)
        else:
            dth = zero_th
        dm = memory_diag * ms if ms.size else ms
        dz = pol.design_drift(zs, drift_rate, ts) if drifting else zero_z
        return dx, dth, dm, dz

    h2 = 0.5 * dt
    k1x, k1t, k1m, k1z = rhs(t, x, theta, m, zeta)
    k2x, k2t, k2m, k2z = rhs(t + h2, x + h2 * k1x, theta + h2 * k1t, m + h2 * k1m, zeta + h2 * k1z)
    k3x, k3t, k3m, k3z = rhs(t + h2, x + h2 * k2x, theta + h2 * k2t, m + h2 * k2m, zeta + h2 * k2z)
    k4x, k4t, k4m, k4z = rhs(t + dt, x + dt * k3x, theta + dt * k3t, m + dt * k3m, zeta + dt * k3z)
    s = dt / 6.0
    return (
        x + s * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        theta + s * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        m + s * (k1m + 2.0 * k2m + 2.0 * k3m + k4m),
        zeta + s * (k1z + 2.0 * k2z + 2.0 * k3z + k4z),
    )


def step_flow(s: AugmentedState, dyn: ModeDynamics, law: AdaptationLaw,
              h: HistoryBuffer | None, dt: float, *, tau_bar: float = 0.0,
              drift_rate: float = 0.0, coupling_gain: float = 0.0,
              memory_diag=None) -> AugmentedState:
    """Advance the continuous components one step; sigma and c unchanged."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if memory_diag is None:
        memory_diag = -np.ones_like(s.m)
    x, theta, m, zeta = _flow_rk4(
        s.x, s.theta, s.m, s.zeta, s.t, dt, dyn.a, dyn.a_delay, law,
        h, tau_bar, drift_rate, coupling_gain, memory_diag,
    )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(theta))
            and np.all(np.isfinite(m)) and np.all(np.isfinite(zeta))):
        raise BlowupError(f"non-finite state after step from t={s.t}", last_state=s)
    return AugmentedState(t=s.t + dt, x=x, theta=theta, m=m, zeta=zeta, sigma=s.sigma, c=s.c)


def simulate(scenario) -> Trajectory:
    """Run a validated scenario over its horizon.

    Alternates policy queries at step boundaries with RK4 flow steps; at
    most one sigma jump and one c jump fire per boundary, sigma first.
    Truncates and flags the trajectory when |x| crosses the blowup
    tolerance or a step goes non-finite.
    """
    from .model import validate_scenario

    report = validate_scenario(scenario)
    if not report.ok:
        raise ScenarioError(f"scenario '{scenario.name}' invalid:\n{report}")

    it = scenario.integrator
    dt = it.dt
    n_steps = int(round(it.horizon / dt))
    tau_bar = scenario.delays.tau_bar
    law = scenario.adaptation
    drift_rate = scenario.drift_rate if scenario.agency_level.allows_design_drift else 0.0
    coupling = scenario.theta_coupling

    x0 = np.asarray(it.x0, dtype=float).reshape(-1)
    theta0 = np.asarray(it.theta0, dtype=float).reshape(-1)
    m0 = np.asarray(it.m0, dtype=float).reshape(-1)
    zeta0 = np.asarray(it.zeta0, dtype=float).reshape(-1)
    memory_diag = -np.ones_like(m0)

    times = np.empty(n_steps + 1)
    xs = np.empty((n_steps + 1, x0.size))
    thetas = np.empty((n_steps + 1, theta0.size))
    ms = np.empty((n_steps + 1, m0.size))
    zetas = np.empty((n_steps + 1, zeta0.size))
    sigmas = np.empty(n_steps + 1, dtype=np.int64)
    cs = np.empty(n_steps + 1, dtype=np.int64)
    times[0], xs[0], thetas[0], ms[0], zetas[0] = 0.0, x0, theta0, m0, zeta0

    sigma, c = it.sigma0, it.c0
    history = HistoryBuffer(0.0, x0)
    events: list[Event] = []
    last_switch = -math.inf

    policy = scenario.policy
    if policy is not None:
        score_channel, decision_delay = pol.score_spec(policy)
    reconfig = scenario.reconfig
    config_count = len(scenario.configurations)
    next_reconfig_k = 1
    reset_zero = scenario.private_state_reset == "zero"
    private = list(scenario.private_state_indices)

    use_configs = bool(scenario.configurations)
    dyn_table = scenario.configurations if use_configs else scenario.modes

    blowup = nonfinite = False
    blow_at = None
    end = n_steps + 1
    for i in range(n_steps):
        t = times[i]
        x = xs[i]

        if policy is not None:
            if decision_delay > 0.0:
                score = float(history.sample(t - decision_delay)[score_channel - 1])
            else:
                score = float(x[score_channel - 1])
            want = pol.decide_mode(policy, score, sigma, t, last_switch)
            if want != sigma:
                events.append(Event(t=t, kind="switch", from_index=sigma, to_index=want))
                sigma = want
                last_switch = t

        if reconfig is not None and t >= next_reconfig_k * reconfig.period - 1e-9 * max(dt, 1.0):
            c_new = c % config_count + 1
            events.append(Event(t=t, kind="reconfig", from_index=c, to_index=c_new))
            c = c_new
            next_reconfig_k = int(math.floor(t / reconfig.period + 1e-9)) + 1
            if reset_zero and private:
                x = x.copy()
                x[private] = 0.0
                xs[i] = x
                history.replace_newest(x)
        sigmas[i], cs[i] = sigma, c

        dyn = dyn_table[(c if use_configs else sigma) - 1]
        xn, thn, mn, zn = _flow_rk4(
            x, thetas[i], ms[i], zetas[i], t, dt, dyn.a, dyn.a_delay, law,
            history, tau_bar, drift_rate, coupling, memory_diag,
        )
        times[i + 1] = (i + 1) * dt
        xs[i + 1], thetas[i + 1], ms[i + 1], zetas[i + 1] = xn, thn, mn, zn
        sigmas[i + 1], cs[i + 1] = sigma, c

        sq = float(xn @ xn) + float(thn @ thn) + float(mn @ mn) + float(zn @ zn)
        if not math.isfinite(sq):
            nonfinite = True
            blow_at = float(times[i + 1])
            end = i + 2
            break
        history.append(times[i + 1], xn)
        if math.sqrt(float(xn @ xn)) > scenario.classifier.blowup_tol:
            blowup = True
            blow_at = float(times[i + 1])
            end = i + 2
            break

    return Trajectory(
        dt=dt, times=times[:end], x=xs[:end], theta=thetas[:end], m=ms[:end],
        zeta=zetas[:end], sigma=sigmas[:end], c=cs[:end], events=events,
        blowup=blowup, nonfinite=nonfinite, blowup_time=blow_at,
    )


def classify_outcome(traj: Trajectory, settle_tol: float, blowup_tol: float) -> StabilityVerdict:
    """Unstable if |x| ever exceeded blowup_tol (or the run went
    non-finite); Stable if the final norm settled below settle_tol;
    Inconclusive otherwise."""
    norms = traj.norms
    finite = norms[np.isfinite(norms)]
    peak = float(np.max(finite)) if finite.size else math.inf
    final = float(norms[-1])
    if traj.blowup or traj.nonfinite or peak > blowup_tol or not math.isfinite(final):
        return StabilityVerdict(Outcome.UNSTABLE, final, peak, traj.blowup_time)
    if final <= settle_tol:
        return StabilityVerdict(Outcome.STABLE, final, peak)
    return StabilityVerdict(Outcome.INCONCLUSIVE, final, peak)
