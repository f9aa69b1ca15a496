"""Effective decay margin and every stability condition checker.

The margin is the nominal decay rate gamma minus the costs charged by
each decision mechanism: adaptation, design drift, delay, mode switching
and reconfiguration.  A positive margin certifies exponential stability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import AgencyLevel


@dataclass(frozen=True)
class BudgetConstants:
    """Constants feeding the margin.

    Rates in 1/s, delays and dwell times in s, jump growth factors
    dimensionless and >= 1.  A dwell time of None disables that jump
    mechanism (its term contributes zero).
    """

    gamma: float
    nu_sigma: float = 1.0
    nu_c: float = 1.0
    l_theta: float = 0.0
    rho: float = 0.0
    l_d: float = 0.0
    eta_d: float = 0.0
    beta: float = 0.0
    tau_bar: float = 0.0
    tau_a_sigma: float | None = None
    tau_a_c: float | None = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.nu_sigma < 1 or self.nu_c < 1:
            raise ValueError("jump growth factors must be >= 1")
        for name in ("l_theta", "rho", "l_d", "eta_d", "beta", "tau_bar"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("tau_a_sigma", "tau_a_c"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} is enabled but not positive: {v}")

    @classmethod
    def merged(cls, gamma: float, nu: float, tau_a: float, **kw) -> "BudgetConstants":
        """Single jump term covering simultaneous switch + reconfiguration
        (one nu, one dwell time, charged once)."""
        return cls(gamma=gamma, nu_sigma=nu, tau_a_sigma=tau_a, nu_c=1.0, tau_a_c=None, **kw)


def _jump_term(nu: float, tau_a: float | None) -> float:
    if tau_a is None:
        return 0.0
    return math.log(nu) / tau_a


@dataclass(frozen=True)
class BudgetReport:
    """Term-by-term margin breakdown.

    lambda_total = gamma - (all five terms); lambda_flow excludes the
    jump-rate terms.  Certification needs both positive: flow decay must
    exist, and it must dominate the jump growth rate.
    """

    gamma: float
    term_adaptation: float
    term_design: float
    term_delay: float
    term_switch: float
    term_reconfig: float

    @property
    def lambda_flow(self) -> float:
        return self.gamma - self.term_adaptation - self.term_design - self.term_delay

    @property
    def jump_rate(self) -> float:
        return self.term_switch + self.term_reconfig

    @property
    def lambda_total(self) -> float:
        return (self.gamma - self.term_adaptation - self.term_design
                - self.term_delay - self.term_switch - self.term_reconfig)

    @property
    def flow_margin_ok(self) -> bool:
        return self.lambda_flow > 0

    @property
    def jump_rate_ok(self) -> bool:
        return self.lambda_flow > self.jump_rate

    @property
    def certified(self) -> bool:
        return self.flow_margin_ok and self.jump_rate_ok

    @property
    def verdict(self) -> str:
        return "Certified" if self.certified else "NotCertified"


def effective_margin(c: BudgetConstants) -> BudgetReport:
    """Evaluate the five mechanism costs and the resulting margin."""
    return BudgetReport(
        gamma=c.gamma,
        term_adaptation=c.l_theta * c.rho,
        term_design=c.l_d * c.eta_d,
        term_delay=c.beta * c.tau_bar,
        term_switch=_jump_term(c.nu_sigma, c.tau_a_sigma),
        term_reconfig=_jump_term(c.nu_c, c.tau_a_c),
    )


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a single dwell-time condition.

    margin_ok: the flow margin (denominator) is positive.
    required_dwell: dwell threshold when margin_ok, else None.
    satisfied: the supplied dwell time strictly exceeds the threshold.
    """

    margin_ok: bool
    required_dwell: float | None
    satisfied: bool


def _dwell_check(gamma: float, cost: float, nu: float, tau_a: float | None) -> CheckResult:
    margin = gamma - cost
    if margin <= 0:
        return CheckResult(margin_ok=False, required_dwell=None, satisfied=False)
    required = math.log(nu) / margin
    ok = tau_a is not None and tau_a > required
    return CheckResult(margin_ok=True, required_dwell=required, satisfied=ok)


def check_theorem1(gamma: float, l_theta: float, rho: float, nu: float,
                   tau_a: float | None = None) -> CheckResult:
    """Adaptation-switching coupling: requires gamma > l_theta*rho and
    dwell time above ln(nu)/(gamma - l_theta*rho)."""
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    return _dwell_check(gamma, l_theta * rho, nu, tau_a)


def check_prop1(gamma: float, beta: float, tau_bar: float, nu: float,
                tau_a: float | None = None) -> CheckResult:
    """Delay-switching coupling: requires gamma > beta*tau_bar and dwell
    time above ln(nu)/(gamma - beta*tau_bar)."""
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    return _dwell_check(gamma, beta * tau_bar, nu, tau_a)


@dataclass(frozen=True)
class Theorem2Result:
    report: BudgetReport
    margin_ok: bool  # flow margin positive
    satisfied: bool  # certified: flow margin also dominates jump rate


def check_theorem2(c: BudgetConstants) -> Theorem2Result:
    """Fully coupled condition over all five mechanisms."""
    rep = effective_margin(c)
    return Theorem2Result(report=rep, margin_ok=rep.flow_margin_ok, satisfied=rep.certified)


@dataclass(frozen=True)
class RuleRow:
    rule: str  # L2 | L3 | L3+delay | L4 | L5
    description: str
    passed: bool
    slack: float  # positive margin by which the rule passes


@dataclass
class RuleTable:
    level: AgencyLevel
    rows: list[RuleRow] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)


def design_rule_report(c: BudgetConstants, level: AgencyLevel) -> RuleTable:
    """Evaluate the per-level design rules applicable to the scenario.

    Levels are cumulative, so each enabled mechanism's rule up to the
    given level is reported with its binding slack.
    """
    table = RuleTable(level=level)
    rows = table.rows

    if level >= AgencyLevel.L2:
        slack = c.gamma - c.l_theta * c.rho
        rows.append(RuleRow("L2", "limit adaptation rate (l_theta*rho < gamma)",
                            passed=slack > 0, slack=slack))
    if level >= AgencyLevel.L3 and c.tau_a_sigma is not None:
        chk = check_theorem1(c.gamma, c.l_theta, c.rho, c.nu_sigma, c.tau_a_sigma)
        slack = c.tau_a_sigma - chk.required_dwell if chk.margin_ok else -math.inf
        rows.append(RuleRow("L3", "enforce dwell time above the adaptation-tightened threshold",
                            passed=chk.satisfied, slack=slack))
        if c.tau_bar > 0:
            chk = check_prop1(c.gamma, c.beta, c.tau_bar, c.nu_sigma, c.tau_a_sigma)
            slack = c.tau_a_sigma - chk.required_dwell if chk.margin_ok else -math.inf
            rows.append(RuleRow("L3+delay", "reduce switching under latency",
                                passed=chk.satisfied, slack=slack))
    if level >= AgencyLevel.L4 and c.tau_a_c is not None:
        required = math.log(c.nu_c) / c.gamma
        slack = c.tau_a_c - required
        rows.append(RuleRow("L4", "limit reconfiguration rate (tau_a_c > ln(nu_c)/gamma)",
                            passed=slack > 0, slack=slack))
    if level >= AgencyLevel.L5:
        rep = effective_margin(c)
        rows.append(RuleRow("L5", "allocate the shared stability budget (lambda > 0)",
                            passed=rep.lambda_total > 0, slack=rep.lambda_total))
    return table


def budget_timeseries(traj, c: BudgetConstants) -> tuple[np.ndarray, BudgetReport]:
    """Per-timestep margin trace over a trajectory's time grid.

    Terms use the declared scenario constants and the enforced dwell
    times, so the trace is piecewise constant; returned as (times,
    report).  The sign of lambda_total is the divergence leading
    indicator.
    """
    return np.asarray(traj.times, dtype=float), effective_margin(c)


@dataclass(frozen=True)
class EnvelopeReport:
    """Empirical exponential envelope |x(t)| <= k_emp e^{-omega t} |x(0)|.

    omega is half the certified net decay rate; k_emp is the smallest
    prefactor that makes the envelope hold over the logged run, and
    t_at_peak is where it binds.
    """

    omega: float
    k_emp: float
    t_at_peak: float


def decay_envelope(traj, mu: float) -> EnvelopeReport:
    """Fit the achieved envelope for a certified net decay rate mu > 0."""
    if mu <= 0:
        raise ValueError(f"envelope requires a positive net decay rate, got {mu}")
    omega = mu / 2.0
    norms = traj.norms
    x0 = norms[0]
    if x0 == 0:
        return EnvelopeReport(omega=omega, k_emp=0.0, t_at_peak=0.0)
    ratios = norms / (np.exp(-omega * traj.times) * x0)
    i = int(np.argmax(ratios))
    return EnvelopeReport(omega=omega, k_emp=float(ratios[i]), t_at_peak=float(traj.times[i]))


@dataclass
class ResolvedBudget:
    """BudgetConstants plus where each one came from.

    provenance maps field name to "declared" or "computed"; missing
    lists constants that were needed but neither declared nor derivable.
    """

    constants: BudgetConstants | None
    provenance: dict[str, str]
    missing: list[str]

    @property
    def ok(self) -> bool:
        return not self.missing and self.constants is not None


def resolve_constants(scenario) -> ResolvedBudget:
    """Assemble BudgetConstants for a scenario.

    Declared values win; gamma and the jump factors fall back to the
    quadratic-certificate path (Q = I) over the scenario's dynamics
    table.  Sensitivities l_theta, l_d and the delay penalty beta are
    never estimated: they must be declared whenever their mechanism is
    active.
    """
    from . import certificates as cert

    spec = scenario.budget
    prov: dict[str, str] = {}
    missing: list[str] = []

    dyn_table = scenario.configurations if scenario.configurations else scenario.modes
    certs = None

    def get_certs():
        nonlocal certs
        if certs is None:
            certs = [cert.certify_mode(d) for d in dyn_table]
        return certs

    if spec.gamma is not None:
        gamma = spec.gamma
        prov["gamma"] = "declared"
    else:
        try:
            gamma = min(c.gamma for c in get_certs())
            prov["gamma"] = "computed"
        except cert.CertificateError as e:
            return ResolvedBudget(None, prov, [f"gamma ({e})"])

    rho = scenario.adaptation.rho if scenario.adaptation.enabled else 0.0
    if rho > 0:
        if spec.l_theta is None:
            missing.append("l_theta")
            l_theta = 0.0
        else:
            l_theta = spec.l_theta
            prov["l_theta"] = "declared"
    else:
        l_theta = spec.l_theta if spec.l_theta is not None else 0.0

    tau_bar = scenario.delays.tau_bar
    if tau_bar > 0:
        if spec.beta is None:
            missing.append("beta")
            beta = 0.0
        else:
            beta = spec.beta
            prov["beta"] = "declared"
    else:
        beta = spec.beta if spec.beta is not None else 0.0

    eta_d = scenario.drift_rate
    if eta_d > 0:
        if spec.l_d is None:
            missing.append("l_d")
            l_d = 0.0
        else:
            l_d = spec.l_d
            prov["l_d"] = "declared"
    else:
        l_d = spec.l_d if spec.l_d is not None else 0.0

    def resolve_nu(declared, tag):
        if declared is not None:
            prov[tag] = "declared"
            return declared
        try:
            nu = cert.comparability_constant(get_certs())
            prov[tag] = "computed"
            return nu
        except cert.CertificateError as e:
            missing.append(f"{tag} ({e})")
            return 1.0

    # switching side
    from .policies import DwellConstrained

    tau_a_sigma = spec.tau_a_sigma
    if tau_a_sigma is None and isinstance(scenario.policy, DwellConstrained):
        tau_a_sigma = scenario.policy.tau_a
        prov["tau_a_sigma"] = "policy"
    elif tau_a_sigma is not None:
        prov["tau_a_sigma"] = "declared"
    nu_sigma = resolve_nu(spec.nu_sigma, "nu_sigma") if (
        scenario.policy is not None or spec.nu_sigma is not None) else 1.0
    if scenario.policy is not None and tau_a_sigma is None:
        missing.append("tau_a_sigma (switching enabled with no enforced dwell time)")

    # reconfiguration side
    tau_a_c = spec.tau_a_c
    if tau_a_c is None and scenario.reconfig is not None:
        tau_a_c = scenario.reconfig.period
        prov["tau_a_c"] = "policy"
    elif tau_a_c is not None:
        prov["tau_a_c"] = "declared"
    nu_c = resolve_nu(spec.nu_c, "nu_c") if (
        scenario.reconfig is not None or spec.nu_c is not None) else 1.0

    if missing:
        return ResolvedBudget(None, prov, missing)
    constants = BudgetConstants(
        gamma=gamma, nu_sigma=nu_sigma, nu_c=nu_c, l_theta=l_theta, rho=rho,
        l_d=l_d, eta_d=eta_d, beta=beta, tau_bar=tau_bar,
        tau_a_sigma=tau_a_sigma, tau_a_c=tau_a_c,
    )
    return ResolvedBudget(constants, prov, [])
