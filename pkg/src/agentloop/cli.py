"""Command-line surface: simulate, sweep, budget, certify, preset.

Every command is a pure function of (config, flags); outputs are CSV
files whose bytes are identical across reruns and worker counts.
Exit codes: 0 completed (any verdict), 2 config or validation error,
3 numerical blowup in a non-sweep single run.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import budget as bud
from . import config as cfgmod
from . import csvio
from . import experiments as exp
from . import policies as pol
from .engine import classify_outcome, simulate
from .model import validate_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _load_scenario(args) -> cfgmod.ScenarioConfig:
    scenario = cfgmod.load(args.config)
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    if overrides:
        scenario = replace(scenario, integrator=replace(scenario.integrator, **overrides))
    report = validate_scenario(scenario)
    if not report.ok:
        raise cfgmod.ConfigError(f"scenario '{scenario.name}' invalid:\n{report}")
    return scenario


def _run_and_write(scenario, out_dir: Path) -> int:
    traj = simulate(scenario)
    verdict = classify_outcome(traj, scenario.classifier.settle_tol,
                               scenario.classifier.blowup_tol)
    stats = pol.switch_statistics(traj)
    channel = pol.score_spec(scenario.policy)[0] if scenario.policy is not None else 1
    m_bar = pol.empirical_score_rate(traj, channel)
    csvio.write_trajectory(out_dir / "trajectory.csv", traj)
    csvio.write_events(out_dir / "events.csv", traj.events)
    csvio.write_summary(out_dir / "summary.csv", scenario.name, verdict, stats, m_bar)
    print(f"{scenario.name}: verdict={verdict.outcome.value} final_norm={verdict.final_norm:.6g} "
          f"switches={stats.count} min_gap={stats.min_gap:.6g}")
    return EXIT_BLOWUP if traj.nonfinite else EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    return _run_and_write(scenario, Path(args.out))


def _parse_grid(text: str | None, name: str) -> list[float] | None:
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise cfgmod.ConfigError(f"--{name}: expected comma-separated numbers, got {text!r}")
    if not values:
        raise cfgmod.ConfigError(f"--{name}: empty grid")
    return values


def cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    grid = exp.delay_dwell_sweep(
        scenario,
        tau_a_values=_parse_grid(args.tau_a, "tau-a"),
        tau_bar_values=_parse_grid(args.tau_bar, "tau-bar"),
        workers=args.workers,
    )
    boundary = exp.empirical_boundary(grid)
    out = Path(args.out)
    csvio.write_sweep(out / "sweep.csv", grid)
    csvio.write_boundary(out / "boundary.csv", boundary)
    n_cells = len(grid.tau_a_values) * len(grid.tau_bar_values)
    print(f"{scenario.name}: swept {n_cells} cells "
          f"({len(grid.tau_a_values)} tau_a x {len(grid.tau_bar_values)} tau_bar)")
    for tb, ta in boundary:
        print(f"  tau_bar={tb:g}: boundary tau_a={'undefined' if ta is None else f'{ta:g}'}")
    return EXIT_OK


def _certificate_lines(scenario) -> tuple[list[str], bud.ResolvedBudget]:
    resolved = bud.resolve_constants(scenario)
    lines = []
    if not resolved.ok:
        lines.append("underdetermined constants (declare them in the budget section):")
        for name in resolved.missing:
            lines.append(f"  - {name}")
        return lines, resolved
    c = resolved.constants
    prov = resolved.provenance

    def tag(name):
        return prov.get(name, "default")

    lines.append(f"constants: gamma={c.gamma:g} [{tag('gamma')}]"
                 f" nu_sigma={c.nu_sigma:g} [{tag('nu_sigma')}]"
                 f" nu_c={c.nu_c:g} [{tag('nu_c')}]")
    lines.append(f"           l_theta={c.l_theta:g} [{tag('l_theta')}] rho={c.rho:g}"
                 f" l_d={c.l_d:g} [{tag('l_d')}] eta_d={c.eta_d:g}")
    lines.append(f"           beta={c.beta:g} [{tag('beta')}] tau_bar={c.tau_bar:g}"
                 f" tau_a_sigma={'-' if c.tau_a_sigma is None else f'{c.tau_a_sigma:g}'}"
                 f" [{tag('tau_a_sigma')}]"
                 f" tau_a_c={'-' if c.tau_a_c is None else f'{c.tau_a_c:g}'} [{tag('tau_a_c')}]")

    t1 = bud.check_theorem1(c.gamma, c.l_theta, c.rho, c.nu_sigma, c.tau_a_sigma)
    req = "-" if t1.required_dwell is None else f"{t1.required_dwell:.4g} s"
    lines.append(f"Theorem 1  (adaptation x switching): margin_ok={t1.margin_ok}"
                 f" required_dwell={req} satisfied={t1.satisfied}")
    p1 = bud.check_prop1(c.gamma, c.beta, c.tau_bar, c.nu_sigma, c.tau_a_sigma)
    req = "-" if p1.required_dwell is None else f"{p1.required_dwell:.4g} s"
    lines.append(f"Prop 1     (delay x switching):      margin_ok={p1.margin_ok}"
                 f" required_dwell={req} satisfied={p1.satisfied}")
    rep = bud.effective_margin(c)
    lines.append(f"Theorem 2  (full budget): lambda={rep.lambda_total:+.4g}"
                 f" lambda_flow={rep.lambda_flow:+.4g} jump_rate={rep.jump_rate:.4g}"
                 f" -> {rep.verdict}")
    lines.append(f"terms: adaptation={rep.term_adaptation:.4g} design={rep.term_design:.4g}"
                 f" delay={rep.term_delay:.4g} switch={rep.term_switch:.4g}"
                 f" reconfig={rep.term_reconfig:.4g} of gamma={rep.gamma:.4g}")
    table = bud.design_rule_report(c, scenario.agency_level)
    lines.append(f"design rules at {scenario.agency_level.name}:")
    for row in table.rows:
        status = "pass" if row.passed else "FAIL"
        lines.append(f"  [{status}] {row.rule:9s} slack={row.slack:+.4g}  {row.description}")
    return lines, resolved


def cmd_budget(args) -> int:
    scenario = _load_scenario(args)
    lines, resolved = _certificate_lines(scenario)
    if not resolved.ok:
        print("\n".join(lines), file=sys.stderr)
        return EXIT_CONFIG
    traj = simulate(scenario)
    times, report = bud.budget_timeseries(traj, resolved.constants)
    out = Path(args.out)
    csvio.write_budget(out / "budget.csv", times, report)
    out.mkdir(parents=True, exist_ok=True)
    (out / "certificates.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return EXIT_BLOWUP if traj.nonfinite else EXIT_OK


def cmd_certify(args) -> int:
    scenario = _load_scenario(args)
    lines, resolved = _certificate_lines(scenario)
    print("\n".join(lines))
    return EXIT_OK if resolved.ok else EXIT_CONFIG


def cmd_preset(args) -> int:
    builder = exp.PRESETS.get(args.name)
    if builder is None:
        raise cfgmod.ConfigError(
            f"preset: unknown name {args.name!r}; available: {', '.join(sorted(exp.PRESETS))}")
    cfgmod.save(builder(), args.out)
    print(f"wrote preset '{args.name}' to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agentloop",
                                description="Switched delayed adaptive closed-loop simulator "
                                            "and stability-budget certifier")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, out=True):
        sp.add_argument("--config", required=True, help="scenario config JSON")
        if out:
            sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--dt", type=float, default=None, help="override step size (s)")
        sp.add_argument("--horizon", type=float, default=None, help="override horizon (s)")

    sp = sub.add_parser("simulate", help="run one scenario, write trajectory/events/summary CSVs")
    add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="classify a (tau_a, tau_bar) grid, write sweep/boundary CSVs")
    add_common(sp)
    sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sp.add_argument("--tau-a", default=None, help="comma-separated dwell-time grid (s)")
    sp.add_argument("--tau-bar", default=None, help="comma-separated delay grid (s)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("budget", help="run one scenario and write per-step budget traces")
    add_common(sp)
    sp.set_defaults(func=cmd_budget)

    sp = sub.add_parser("certify", help="check every stability condition, no simulation")
    add_common(sp, out=False)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("preset", help="write a shipped preset config to a file")
    sp.add_argument("name", help=f"one of: {', '.join(sorted(exp.PRESETS))}")
    sp.add_argument("--out", "-o", required=True, help="output config path")
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
