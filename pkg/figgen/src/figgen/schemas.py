"""CSV readers for the simulator's output schemas.

The renderer never computes dynamics; it consumes these files as its
only interface to the simulator.  Every reader validates the header
line byte-wise and refuses anything unexpected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EVENTS_HEADER = "t,kind,from,to"
SWEEP_HEADER = "tau_bar,tau_a,verdict,final_norm"
BOUNDARY_HEADER = "tau_bar,tau_a_boundary"
BUDGET_HEADER = ("t,term_adaptation,term_design,term_delay,term_switch,"
                 "term_reconfig,lambda,lambda_flow")

VERDICT_CODES = {"Stable": 0, "Inconclusive": 1, "Unstable": 2}


class SchemaError(ValueError):
    """Missing input file or unexpected CSV header."""


def _read_lines(path) -> list[str]:
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input CSV missing: {p}")
    text = p.read_text(encoding="utf-8")
    return text.splitlines()


def _check_header(got: str, want: str, path) -> None:
    if got != want:
        raise SchemaError(f"{path}: unexpected header\n  got:  {got!r}\n  want: {want!r}")


def _is_trajectory_header(header: str) -> bool:
    cols = header.split(",")
    if len(cols) < 5 or cols[0] != "t" or cols[-2:] != ["sigma", "c"]:
        return False
    if "norm_x" not in cols:
        return False
    i = cols.index("norm_x")
    xs = cols[1:i]
    thetas = cols[i + 1:-2]
    return (all(c == f"x{k+1}" for k, c in enumerate(xs)) and len(xs) >= 1
            and all(c == f"theta{k+1}" for k, c in enumerate(thetas)))


@dataclass
class TrajectoryData:
    t: np.ndarray
    x: np.ndarray
    norm_x: np.ndarray
    theta: np.ndarray
    sigma: np.ndarray
    c: np.ndarray


def read_trajectory(path) -> TrajectoryData:
    lines = _read_lines(path)
    if not lines or not _is_trajectory_header(lines[0]):
        raise SchemaError(f"{path}: unexpected header for a trajectory CSV: "
                          f"{lines[0] if lines else '<empty>'!r}")
    cols = lines[0].split(",")
    i_norm = cols.index("norm_x")
    n = i_norm - 1
    k = len(cols) - i_norm - 3
    rows = [line.split(",") for line in lines[1:] if line]
    t = np.array([float(r[0]) for r in rows])
    x = np.array([[float(v) for v in r[1:1 + n]] for r in rows])
    norm_x = np.array([float(r[i_norm]) for r in rows])
    theta = np.array([[float(v) for v in r[i_norm + 1:i_norm + 1 + k]] for r in rows])
    sigma = np.array([int(r[-2]) for r in rows])
    c = np.array([int(r[-1]) for r in rows])
    return TrajectoryData(t=t, x=x, norm_x=norm_x, theta=theta, sigma=sigma, c=c)


@dataclass
class EventData:
    t: np.ndarray
    kind: list[str]


def read_events(path) -> EventData:
    lines = _read_lines(path)
    _check_header(lines[0] if lines else "", EVENTS_HEADER, path)
    rows = [line.split(",") for line in lines[1:] if line]
    return EventData(t=np.array([float(r[0]) for r in rows]),
                     kind=[r[1] for r in rows])


@dataclass
class SweepData:
    tau_bar: np.ndarray  # sorted unique axis values
    tau_a: np.ndarray
    codes: np.ndarray  # [i_tau_a, j_tau_bar] verdict codes


def read_sweep(path) -> SweepData:
    lines = _read_lines(path)
    _check_header(lines[0] if lines else "", SWEEP_HEADER, path)
    cells = {}
    for line in lines[1:]:
        if not line:
            continue
        tb_s, ta_s, verdict, _ = line.split(",")
        if verdict not in VERDICT_CODES:
            raise SchemaError(f"{path}: unknown verdict {verdict!r}")
        cells[(float(ta_s), float(tb_s))] = VERDICT_CODES[verdict]
    tau_a = np.array(sorted({ta for ta, _ in cells}))
    tau_bar = np.array(sorted({tb for _, tb in cells}))
    codes = np.full((tau_a.size, tau_bar.size), -1)
    for (ta, tb), code in cells.items():
        codes[np.searchsorted(tau_a, ta), np.searchsorted(tau_bar, tb)] = code
    if np.any(codes < 0):
        raise SchemaError(f"{path}: sweep grid is not complete")
    return SweepData(tau_bar=tau_bar, tau_a=tau_a, codes=codes)


@dataclass
class BoundaryData:
    tau_bar: np.ndarray
    tau_a: np.ndarray  # NaN where undefined


def read_boundary(path) -> BoundaryData:
    lines = _read_lines(path)
    _check_header(lines[0] if lines else "", BOUNDARY_HEADER, path)
    tb, ta = [], []
    for line in lines[1:]:
        if not line:
            continue
        tb_s, ta_s = line.split(",")
        tb.append(float(tb_s))
        ta.append(math.nan if ta_s == "" else float(ta_s))
    return BoundaryData(tau_bar=np.array(tb), tau_a=np.array(ta))


@dataclass
class BudgetData:
    t: np.ndarray
    terms: dict[str, np.ndarray]  # stacked cost terms, top of file order
    lam: np.ndarray
    lam_flow: np.ndarray

    @property
    def stack_total(self) -> np.ndarray:
        return sum(self.terms.values())

    @property
    def gamma(self) -> np.ndarray:
        return self.lam + self.stack_total


def read_budget(path) -> BudgetData:
    lines = _read_lines(path)
    _check_header(lines[0] if lines else "", BUDGET_HEADER, path)
    rows = [line.split(",") for line in lines[1:] if line]
    arr = np.array([[float(v) for v in r] for r in rows])
    names = BUDGET_HEADER.split(",")[1:6]
    return BudgetData(
        t=arr[:, 0],
        terms={name: arr[:, 1 + i] for i, name in enumerate(names)},
        lam=arr[:, 6],
        lam_flow=arr[:, 7],
    )


def exceedance_mask(budget: BudgetData) -> np.ndarray:
    """True where the stacked costs exceed the available budget."""
    return budget.stack_total > budget.gamma
