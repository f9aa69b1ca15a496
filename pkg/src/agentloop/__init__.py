"""Simulator and certificate engine for switched, delayed, adaptive
closed loops whose decision variables evolve endogenously."""

from .model import (
    AgencyLevel,
    AugmentedState,
    AdaptationLaw,
    DelayBudget,
    ModeDynamics,
    ValidationReport,
    project_design_state,
    validate_scenario,
)
from .engine import (
    HistoryBuffer,
    Outcome,
    StabilityVerdict,
    Trajectory,
    classify_outcome,
    sample_delayed,
    simulate,
    step_flow,
)
from .certificates import (
    ModeCertificate,
    certify_mode,
    comparability_constant,
    decay_rate,
    eigen_spectrum,
    solve_lyapunov,
)
from .policies import (
    DwellConstrained,
    Hysteresis,
    PeriodicReconfig,
    SwitchStats,
    ThresholdSign,
    adaptation_target,
    decide_mode,
    design_drift,
    hysteresis_dwell_bound,
    switch_statistics,
)
from .budget import (
    BudgetConstants,
    BudgetReport,
    budget_timeseries,
    check_prop1,
    check_theorem1,
    check_theorem2,
    design_rule_report,
    effective_margin,
    resolve_constants,
)
from .config import ScenarioConfig, load, save

__version__ = "0.1.0"
