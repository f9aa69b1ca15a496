"""Bit-exact CSV persistence for trajectories, events, sweeps and budgets.

Floats are written with shortest round-trip decimals; headers are fixed
strings so downstream consumers can validate schemas byte-wise.  Writes
are whole-file atomic (write then rename).
"""
from __future__ import annotations

import math
import os
from pathlib import Path

TRAJECTORY_BASE_HEADER = ["t"]
EVENTS_HEADER = "t,kind,from,to"
SWEEP_HEADER = "tau_bar,tau_a,verdict,final_norm"
BOUNDARY_HEADER = "tau_bar,tau_a_boundary"
BUDGET_HEADER = ("t,term_adaptation,term_design,term_delay,term_switch,"
                 "term_reconfig,lambda,lambda_flow")
SUMMARY_HEADER = ("name,verdict,final_norm,peak_norm,switch_count,min_gap,"
                  "mean_gap,empirical_m_bar,blowup_time")


def _f(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def trajectory_header(n: int, k: int) -> str:
    cols = ["t"] + [f"x{i+1}" for i in range(n)] + ["norm_x"]
    cols += [f"theta{i+1}" for i in range(k)] + ["sigma", "c"]
    return ",".join(cols)


def write_trajectory(path, traj) -> None:
    n = traj.x.shape[1]
    k = traj.theta.shape[1]
    lines = [trajectory_header(n, k)]
    norms = traj.norms
    for i in range(len(traj)):
        row = [_f(traj.times[i])]
        row += [_f(v) for v in traj.x[i]]
        row.append(_f(norms[i]))
        row += [_f(v) for v in traj.theta[i]]
        row.append(str(int(traj.sigma[i])))
        row.append(str(int(traj.c[i])))
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_events(path, events) -> None:
    lines = [EVENTS_HEADER]
    for ev in events:
        lines.append(f"{_f(ev.t)},{ev.kind},{ev.from_index},{ev.to_index}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_summary(path, name: str, verdict, stats, m_bar: float) -> None:
    row = [
        name,
        verdict.outcome.value,
        _f(verdict.final_norm),
        _f(verdict.peak_norm),
        str(stats.count),
        _f(stats.min_gap),
        _f(stats.mean_gap),
        _f(m_bar),
        "" if verdict.blowup_time is None else _f(verdict.blowup_time),
    ]
    _atomic_write(path, SUMMARY_HEADER + "\n" + ",".join(row) + "\n")


def write_sweep(path, grid) -> None:
    lines = [SWEEP_HEADER]
    for j, tb in enumerate(grid.tau_bar_values):
        for i, ta in enumerate(grid.tau_a_values):
            v = grid.verdicts[i][j]
            lines.append(f"{_f(tb)},{_f(ta)},{v.outcome.value},{_f(v.final_norm)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_boundary(path, boundary) -> None:
    lines = [BOUNDARY_HEADER]
    for tb, ta in boundary:
        lines.append(f"{_f(tb)},{'' if ta is None else _f(ta)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_budget(path, times, report) -> None:
    lines = [BUDGET_HEADER]
    terms = (report.term_adaptation, report.term_design, report.term_delay,
             report.term_switch, report.term_reconfig,
             report.lambda_total, report.lambda_flow)
    tail = "," + ",".join(_f(v) for v in terms)
    for t in times:
        lines.append(_f(t) + tail)
    _atomic_write(path, "\n".join(lines) + "\n")
