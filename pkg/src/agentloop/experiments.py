"""Scenario presets and sweep orchestration.

Ships the two-mode delayed benchmark, the dwell/delay stability map, the
reconfiguration-period study, and the two fully coupled cases, with the
declared margin constants attached to each preset.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import budget as bud
from . import certificates as cert
from . import policies as pol
from .config import BudgetSpec, ClassifierSettings, IntegratorSettings, ScenarioConfig
from .engine import Outcome, StabilityVerdict, Trajectory, classify_outcome, simulate
from .model import AdaptationLaw, AgencyLevel, DelayBudget, ModeDynamics

# two-mode delayed benchmark: both modes Hurwitz, delayed coupling on x2
A1 = np.array([[-3.8897, -3.2679],
               [1.5381, 0.7197]])
A2 = np.array([[-3.1172, 0.4840],
               [-5.4957, 0.4516]])
AD = np.array([[0.0, 0.0],
               [0.8, 0.2]])

# declared margin constants for the benchmark (gamma from A2's slow eigenvalue)
GAMMA = 0.609
NU = 2.2
L_THETA = 0.8
BETA = 2.5

STABLE_CASE = {"rho": 0.15, "tau_a": 4.0, "tau_bar": 0.03}
UNSTABLE_CASE = {"rho": 3.5, "tau_a": 0.4, "tau_bar": 0.20}

DEFAULT_TAU_A_GRID = [round(0.2 * k, 10) for k in range(1, 21)]  # 0.2 .. 4.0
DEFAULT_TAU_BAR_GRID = [round(0.025 * k, 10) for k in range(0, 11)]  # 0 .. 0.25

# reconfiguration study plant: open-loop unstable, weakly stabilized by
# direct feedback, estimated by a deliberately slow observer so that
# frequent estimate resets keep the loop effectively open
RECONFIG_A = np.array([[0.0, 1.0], [2.0, -0.2]])
RECONFIG_B = np.array([[0.0], [1.0]])
RECONFIG_C = np.array([[1.0, 0.0]])
RECONFIG_K = np.array([[2.45, 1.6]])  # A - B K poles {-0.3, -1.5}
RECONFIG_L = np.array([[3.3], [2.84]])  # A - L C poles {-0.5, -3.0}
FAST_PERIOD = 0.1
SLOW_PERIOD = 5.0


def _benchmark_modes() -> list[ModeDynamics]:
    return [
        ModeDynamics(a=A1, a_delay=AD, label="regulation"),
        ModeDynamics(a=A2, a_delay=AD, label="tracking"),
    ]


def level1_baseline() -> ScenarioConfig:
    """Fixed policy on the first benchmark mode, no delay, no decisions."""
    return ScenarioConfig(
        name="level1_baseline",
        agency_level=AgencyLevel.L1,
        modes=[ModeDynamics(a=A1, label="regulation")],
        budget=BudgetSpec(gamma=None),
    )


def fig1_sweep_base() -> ScenarioConfig:
    """Pure switching-delay study base: sign switching under a dwell
    constraint, adaptation off.  The sweep overrides tau_a and tau_bar."""
    return ScenarioConfig(
        name="fig1_sweep",
        agency_level=AgencyLevel.L3,
        modes=_benchmark_modes(),
        delays=DelayBudget(tau_bar=0.0),
        policy=pol.DwellConstrained(tau_a=1.0, inner=pol.ThresholdSign()),
        adaptation=AdaptationLaw(rho=0.0, enabled=False),
        budget=BudgetSpec(gamma=GAMMA, nu_sigma=NU, beta=BETA),
    )


def _fully_coupled(name: str, rho: float, tau_a: float, tau_bar: float) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        agency_level=AgencyLevel.L3,
        modes=_benchmark_modes(),
        delays=DelayBudget(tau_bar=tau_bar),
        policy=pol.DwellConstrained(tau_a=tau_a, inner=pol.ThresholdSign()),
        adaptation=AdaptationLaw(rho=rho, kappa=0.3, enabled=True),
        budget=BudgetSpec(gamma=GAMMA, nu_sigma=NU, l_theta=L_THETA, beta=BETA),
    )


def fig3_stable() -> ScenarioConfig:
    return _fully_coupled("fig3_stable", **STABLE_CASE)


def fig3_unstable() -> ScenarioConfig:
    return _fully_coupled("fig3_unstable", **UNSTABLE_CASE)


@dataclass
class ReconfigScenario:
    """Two control architectures over one plant: direct state feedback
    and an observer-based realization whose estimate resets on entry.

    Both closed loops are verified Hurwitz at construction.  The
    augmented continuous state is (plant, estimate); the estimate is the
    architecture-private part.
    """

    a_plant: np.ndarray = field(default_factory=lambda: RECONFIG_A.copy())
    b_input: np.ndarray = field(default_factory=lambda: RECONFIG_B.copy())
    c_output: np.ndarray = field(default_factory=lambda: RECONFIG_C.copy())
    k_gain: np.ndarray = field(default_factory=lambda: RECONFIG_K.copy())
    l_gain: np.ndarray = field(default_factory=lambda: RECONFIG_L.copy())
    reconfig_period: float = SLOW_PERIOD

    def __post_init__(self):
        n = self.a_plant.shape[0]
        if self.l_gain.shape[0] != n:
            raise ValueError("observer dimension must equal plant dimension")
        cert.decay_rate(self.arch_direct)  # raises if not Hurwitz
        cert.decay_rate(self.arch_observer)

    @property
    def closed_direct(self) -> np.ndarray:
        return self.a_plant - self.b_input @ self.k_gain

    @property
    def arch_direct(self) -> np.ndarray:
        """Direct feedback architecture; the idle estimate decays."""
        n = self.a_plant.shape[0]
        z = np.zeros((n, n))
        return np.block([[self.closed_direct, z], [z, -np.eye(n)]])

    @property
    def arch_observer(self) -> np.ndarray:
        """Observer-based architecture: u = -K xhat, xhat driven by L(y - C xhat)."""
        lc = self.l_gain @ self.c_output
        return np.block([
            [self.a_plant, -self.b_input @ self.k_gain],
            [lc, self.closed_direct - lc],
        ])

    def to_scenario(self, period: float | None = None, name: str = "fig2_reconfig") -> ScenarioConfig:
        n = self.a_plant.shape[0]
        period = self.reconfig_period if period is None else period
        return ScenarioConfig(
            name=name,
            agency_level=AgencyLevel.L4,
            configurations=[
                ModeDynamics(a=self.arch_direct, label="direct-feedback"),
                ModeDynamics(a=self.arch_observer, label="observer-based"),
            ],
            reconfig=None if math.isinf(period) else pol.PeriodicReconfig(period=period),
            private_state_indices=list(range(n, 2 * n)),
            private_state_reset="zero",
            budget=BudgetSpec(),
            integrator=IntegratorSettings(x0=[1.0, -1.0] + [0.0] * n),
        )


def fig2_reconfig() -> ScenarioConfig:
    return ReconfigScenario().to_scenario()


def fig2_fast() -> ScenarioConfig:
    return ReconfigScenario().to_scenario(period=FAST_PERIOD, name="fig2_fast")


def fig2_slow() -> ScenarioConfig:
    return ReconfigScenario().to_scenario(period=SLOW_PERIOD, name="fig2_slow")


PRESETS = {
    "level1_baseline": level1_baseline,
    "fig1_sweep": fig1_sweep_base,
    "fig2_reconfig": fig2_reconfig,
    "fig2_fast": fig2_fast,
    "fig2_slow": fig2_slow,
    "fig3_stable": fig3_stable,
    "fig3_unstable": fig3_unstable,
}


@dataclass
class SweepGrid:
    """Verdict matrix indexed [tau_a][tau_bar]."""

    tau_a_values: list[float]
    tau_bar_values: list[float]
    verdicts: list[list[StabilityVerdict]] = field(default_factory=list)

    def verdict(self, i_tau_a: int, j_tau_bar: int) -> StabilityVerdict:
        return self.verdicts[i_tau_a][j_tau_bar]


def _sweep_cell(base: ScenarioConfig, tau_a: float, tau_bar: float) -> ScenarioConfig:
    if not isinstance(base.policy, pol.DwellConstrained):
        raise ValueError("sweep base scenario must use a dwell-constrained policy")
    return replace(
        base,
        name=f"{base.name}[tau_a={tau_a},tau_bar={tau_bar}]",
        policy=pol.DwellConstrained(tau_a=tau_a, inner=base.policy.inner),
        delays=replace(base.delays, tau_bar=tau_bar),
    )


def _run_cell(args) -> tuple[int, int, str, float, float]:
    base, i, j, tau_a, tau_bar = args
    scenario = _sweep_cell(base, tau_a, tau_bar)
    traj = simulate(scenario)
    v = classify_outcome(traj, scenario.classifier.settle_tol, scenario.classifier.blowup_tol)
    return i, j, v.outcome.value, v.final_norm, v.peak_norm


def delay_dwell_sweep(
    base: ScenarioConfig,
    tau_a_values: list[float] | None = None,
    tau_bar_values: list[float] | None = None,
    workers: int = 1,
) -> SweepGrid:
    """Classify every (tau_a, tau_bar) cell of the grid.

    Cells are independent runs; results are assembled by index, so the
    grid is identical for any worker count.  Cell blowups classify as
    Unstable and never abort the sweep.
    """
    tau_a_values = list(DEFAULT_TAU_A_GRID if tau_a_values is None else tau_a_values)
    tau_bar_values = list(DEFAULT_TAU_BAR_GRID if tau_bar_values is None else tau_bar_values)
    jobs = [(base, i, j, ta, tb)
            for i, ta in enumerate(tau_a_values)
            for j, tb in enumerate(tau_bar_values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_cell, jobs, chunksize=4))
    else:
        results = [_run_cell(job) for job in jobs]

    grid = SweepGrid(tau_a_values=tau_a_values, tau_bar_values=tau_bar_values)
    grid.verdicts = [[None] * len(tau_bar_values) for _ in tau_a_values]
    for i, j, outcome, final_norm, peak in results:
        grid.verdicts[i][j] = StabilityVerdict(Outcome(outcome), final_norm, peak)
    return grid


def empirical_boundary(grid: SweepGrid) -> list[tuple[float, float | None]]:
    """Per tau_bar column, the smallest tau_a classified Stable with every
    larger tau_a in the column also Stable; None when no such tau_a."""
    out = []
    for j, tb in enumerate(grid.tau_bar_values):
        col = [grid.verdicts[i][j].outcome for i in range(len(grid.tau_a_values))]
        boundary = None
        for i in range(len(col)):
            if all(o is Outcome.STABLE for o in col[i:]):
                boundary = grid.tau_a_values[i]
                break
        out.append((tb, boundary))
    return out


def level4_reconfig_run(
    scenario: ReconfigScenario,
    fast_period: float = FAST_PERIOD,
    slow_period: float = SLOW_PERIOD,
) -> tuple[Trajectory, Trajectory]:
    """Simulate the reconfiguration study at a fast and a slow period."""
    fast = simulate(scenario.to_scenario(period=fast_period, name="fig2_fast"))
    slow = simulate(scenario.to_scenario(period=slow_period, name="fig2_slow"))
    return fast, slow


@dataclass
class FullyCoupledResult:
    scenario: ScenarioConfig
    trajectory: Trajectory
    verdict: StabilityVerdict
    constants: bud.BudgetConstants
    report: bud.BudgetReport
    stats: pol.SwitchStats


def fully_coupled_case(which: str) -> FullyCoupledResult:
    """Run one of the two benchmark cases ("stable" | "unstable") and
    bundle the trajectory with its margin report and switch statistics."""
    which = which.lower()
    if which not in ("stable", "unstable"):
        raise ValueError(f"which must be 'stable' or 'unstable', got {which!r}")
    scenario = fig3_stable() if which == "stable" else fig3_unstable()
    resolved = bud.resolve_constants(scenario)
    assert resolved.ok, resolved.missing
    traj = simulate(scenario)
    verdict = classify_outcome(traj, scenario.classifier.settle_tol, scenario.classifier.blowup_tol)
    return FullyCoupledResult(
        scenario=scenario,
        trajectory=traj,
        verdict=verdict,
        constants=resolved.constants,
        report=bud.effective_margin(resolved.constants),
        stats=pol.switch_statistics(traj),
    )
