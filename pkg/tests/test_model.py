import numpy as np
import pytest

from agentloop import experiments as exp
from agentloop.model import (
    AgencyLevel,
    AugmentedState,
    AdaptationLaw,
    DelayBudget,
    ModeDynamics,
    project_design_state,
    validate_scenario,
)
from agentloop.config import ScenarioConfig
from agentloop.policies import DwellConstrained, ThresholdSign


def test_dimension_mismatch_is_reported():
    cfg = exp.level1_baseline()
    cfg.modes = [ModeDynamics(a=np.eye(2) * -1, a_delay=np.zeros((3, 3)))]
    report = validate_scenario(cfg)
    assert not report.ok
    assert any("dimension mismatch" in v for v in report.violations)


def test_benchmark_scenario_validates_clean():
    for name, builder in exp.PRESETS.items():
        report = validate_scenario(builder())
        assert report.ok, f"{name}: {report}"


def test_adaptation_forbidden_at_l1():
    cfg = exp.level1_baseline()
    cfg.adaptation = AdaptationLaw(rho=0.5, enabled=True)
    report = validate_scenario(cfg)
    assert any("forbidden at L1" in v for v in report.violations)


def test_switching_forbidden_below_l3():
    cfg = exp.fig3_stable()
    cfg.agency_level = AgencyLevel.L2
    report = validate_scenario(cfg)
    assert any("forbidden at L2" in v for v in report.violations)


def test_negative_rates_and_bad_delays_reported():
    cfg = exp.level1_baseline()
    cfg.adaptation = AdaptationLaw(rho=-1.0, enabled=False)
    cfg.delays = DelayBudget(tau_u=0.5, tau_bar=0.1)  # bound below a channel
    report = validate_scenario(cfg)
    assert any("negative rate" in v for v in report.violations)
    assert any("below channel" in v for v in report.violations)


def test_sub_step_delay_rejected():
    cfg = exp.fig3_stable()
    cfg.delays = DelayBudget(tau_bar=1e-4)  # < dt
    report = validate_scenario(cfg)
    assert any("shorter than one step" in v for v in report.violations)


def test_projection_is_identity_on_components():
    s = AugmentedState(t=0.0, x=[1.0, 0.0], zeta=[], sigma=2, c=1)
    d = project_design_state(s)
    assert d.sigma == 2 and d.c == 1
    assert d.zeta.size == 0
    s2 = AugmentedState(t=1.0, x=[0.5, 0.5], zeta=[3.0, -1.0], sigma=1, c=4)
    d2 = project_design_state(s2)
    assert d2.zeta is s2.zeta and d2.sigma == s2.sigma and d2.c == s2.c


def test_projection_reflects_modification():
    s = AugmentedState(t=0.0, x=[1.0], sigma=1, c=1)
    s.sigma = 2
    assert project_design_state(s).sigma == 2


def test_state_invariant_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(200):
        s = AugmentedState(
            t=float(rng.uniform(0, 30)),
            x=rng.normal(size=2),
            theta=rng.normal(size=1),
            zeta=rng.normal(size=rng.integers(0, 3)),
            sigma=int(rng.integers(1, 3)),
            c=1,
        )
        assert s.violations(mode_count=2, config_count=1) == []
    bad = AugmentedState(t=0.0, x=[np.inf, 0.0], sigma=3, c=1)
    out = bad.violations(mode_count=2, config_count=1)
    assert any("non-finite" in v for v in out)
    assert any("sigma" in v for v in out)


def test_joint_mode_config_tables_rejected():
    cfg = ScenarioConfig(
        agency_level=AgencyLevel.L4,
        modes=[ModeDynamics(a=-np.eye(2)), ModeDynamics(a=-2 * np.eye(2))],
        configurations=[ModeDynamics(a=-np.eye(2)), ModeDynamics(a=-3 * np.eye(2))],
        policy=DwellConstrained(tau_a=1.0, inner=ThresholdSign()),
    )
    report = validate_scenario(cfg)
    assert any("not supported" in v for v in report.violations)


def test_nested_dwell_rejected():
    from agentloop.policies import policy_violations

    p = DwellConstrained(tau_a=1.0, inner=DwellConstrained(tau_a=1.0, inner=ThresholdSign()))
    assert any("nested dwell" in v for v in policy_violations(p, state_dim=2))
