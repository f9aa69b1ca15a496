"""Renderers for the four shipped figures.

Pure consumers of the simulator CSVs: a categorical stability heatmap
with the empirical boundary, trajectory panel stacks for the coupled and
reconfiguration runs, and stacked budget traces with exceedance shading.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

from . import schemas

# deterministic SVG output: fixed hash salt, no embedded date
plt.rcParams["svg.hashsalt"] = "figgen"

NORM_FLOOR = 1e-12  # log-scale display clamp
DWELL_REFERENCE = 1.30  # certified zero-delay dwell threshold, seconds

VERDICT_COLORS = ["#2a9d8f", "#e9c46a", "#e76f51"]  # stable, inconclusive, unstable
TERM_COLORS = {
    "term_adaptation": "#577590",
    "term_design": "#8e7dbe",
    "term_delay": "#f3722c",
    "term_switch": "#f94144",
    "term_reconfig": "#90be6d",
}
TERM_LABELS = {
    "term_adaptation": "adaptation",
    "term_design": "design drift",
    "term_delay": "delay",
    "term_switch": "switching",
    "term_reconfig": "reconfiguration",
}


def _save(fig, out_path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out_path.suffix.lower() == ".svg" else None
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)


def _edges(values: np.ndarray) -> np.ndarray:
    """Cell edges around sorted axis values for pcolormesh."""
    mids = (values[1:] + values[:-1]) / 2.0
    first = values[0] - (mids[0] - values[0]) if values.size > 1 else values[0] - 0.5
    last = values[-1] + (values[-1] - mids[-1]) if values.size > 1 else values[-1] + 0.5
    return np.concatenate([[first], mids, [last]])


def render_fig1(sweep_csv, boundary_csv, out_path) -> None:
    """Stability map over (dwell time, delay) with the boundary overlay."""
    sweep = schemas.read_sweep(sweep_csv)
    boundary = schemas.read_boundary(boundary_csv)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    cmap = ListedColormap(VERDICT_COLORS)
    norm = BoundaryNorm([-0.5, 0.5, 1.5, 2.5], cmap.N)
    mesh = ax.pcolormesh(_edges(sweep.tau_a), _edges(sweep.tau_bar),
                         sweep.codes.T, cmap=cmap, norm=norm, shading="flat")
    cbar = fig.colorbar(mesh, ax=ax, ticks=[0, 1, 2], pad=0.02)
    cbar.ax.set_yticklabels(["Stable", "Inconclusive", "Unstable"])

    defined = ~np.isnan(boundary.tau_a)
    if np.any(defined):
        ax.step(boundary.tau_a[defined], boundary.tau_bar[defined], where="post",
                color="black", lw=2.0, label="empirical boundary")
    ax.axvline(DWELL_REFERENCE, color="black", ls="--", lw=1.2,
               label=f"certified dwell {DWELL_REFERENCE:.2f} s at zero delay")
    ax.set_xlabel("dwell time  $\\tau_a$  (s)")
    ax.set_ylabel("total delay  $\\bar{\\tau}$  (s)")
    ax.set_title("Empirical stability map")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def _norm_panel(ax, traj, title):
    ax.semilogy(traj.t, np.maximum(traj.norm_x, NORM_FLOOR), lw=1.0, color="#1d3557")
    ax.set_ylabel("$\\|x(t)\\|$")
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.25)


def _mode_panel(ax, traj):
    ax.step(traj.t, traj.sigma, where="post", lw=1.0, color="#457b9d")
    lo, hi = int(traj.sigma.min()), int(traj.sigma.max())
    ax.set_ylim(lo - 0.4, hi + 0.4)
    ax.set_yticks(list(range(lo, hi + 1)))
    ax.set_ylabel("$\\sigma(t)$")
    ax.grid(True, alpha=0.25)


def _theta_panel(ax, traj):
    if traj.theta.shape[1]:
        for k in range(traj.theta.shape[1]):
            ax.plot(traj.t, traj.theta[:, k], lw=1.0, color="#e63946")
    ax.set_ylabel("$\\theta(t)$")
    ax.set_xlabel("t (s)")
    ax.grid(True, alpha=0.25)


def render_trajectory_pair(run_a, run_b, out_path, titles=("case A", "case B")) -> None:
    """Stacked (norm, mode, parameter) panels for two runs side by side."""
    trajs = [schemas.read_trajectory(Path(d) / "trajectory.csv") for d in (run_a, run_b)]
    for d in (run_a, run_b):
        schemas.read_events(Path(d) / "events.csv")  # header check; sigma is plotted from the trajectory

    fig, axes = plt.subplots(3, 2, figsize=(9.0, 6.5), sharex="col")
    for col, (traj, title) in enumerate(zip(trajs, titles)):
        _norm_panel(axes[0][col], traj, title)
        _mode_panel(axes[1][col], traj)
        _theta_panel(axes[2][col], traj)
    fig.tight_layout()
    _save(fig, out_path)


def render_fig3(in_dir, out_path) -> None:
    """State norm, switching signal and adaptive parameter for the stable
    and unstable coupled cases."""
    in_dir = Path(in_dir)
    render_trajectory_pair(in_dir / "fig3_stable", in_dir / "fig3_unstable", out_path,
                           titles=("stable case", "unstable case"))


def render_fig2(in_dir, out_path) -> None:
    """Reconfiguration study: the same panel stack for the fast and slow
    period runs."""
    in_dir = Path(in_dir)
    render_trajectory_pair(in_dir / "fig2_fast", in_dir / "fig2_slow", out_path,
                           titles=("fast reconfiguration", "slow reconfiguration"))


def _decimate_budget(budget):
    """Drop interior points of constant segments; display-only thinning.

    The budget traces are piecewise constant, so only change points and
    the endpoints shape the plot.
    """
    cols = list(budget.terms.values()) + [budget.lam, budget.lam_flow]
    keep = np.zeros(budget.t.size, dtype=bool)
    keep[0] = keep[-1] = True
    for col in cols:
        changes = np.nonzero(np.diff(col))[0]
        keep[changes] = True
        keep[changes + 1] = True
    idx = np.nonzero(keep)[0]
    return schemas.BudgetData(
        t=budget.t[idx],
        terms={k: v[idx] for k, v in budget.terms.items()},
        lam=budget.lam[idx],
        lam_flow=budget.lam_flow[idx],
    )


def _budget_stack_panel(ax, budget, title):
    active = [k for k, v in budget.terms.items() if np.any(v != 0)]
    if active:
        ax.stackplot(budget.t, [budget.terms[k] for k in active],
                     labels=[TERM_LABELS[k] for k in active],
                     colors=[TERM_COLORS[k] for k in active], alpha=0.85)
    gamma = budget.gamma
    ax.plot(budget.t, gamma, "k--", lw=1.2, label="available budget $\\gamma$")
    mask = schemas.exceedance_mask(budget)
    if np.any(mask):
        ax.fill_between(budget.t, gamma, budget.stack_total, where=mask,
                        color="#e76f51", alpha=0.35, label="budget exceeded")
    ax.set_ylabel("cost (1/s)")
    ax.set_title(title, fontsize=10)
    ax.legend(loc="center right", fontsize=7)
    ax.grid(True, alpha=0.25)


def _lambda_panel(ax, budget, title):
    ax.plot(budget.t, budget.lam, lw=1.2,
            color="#2a9d8f" if budget.lam[0] > 0 else "#e76f51")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_ylabel("$\\lambda(t)$ (1/s)")
    ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.25)


def render_fig4(in_dir, out_path) -> None:
    """Stacked mechanism costs against the available budget, then the
    resulting margin, for both coupled cases."""
    in_dir = Path(in_dir)
    stable = _decimate_budget(schemas.read_budget(in_dir / "fig3_stable" / "budget.csv"))
    unstable = _decimate_budget(schemas.read_budget(in_dir / "fig3_unstable" / "budget.csv"))

    fig, axes = plt.subplots(4, 1, figsize=(7.0, 9.0), sharex=True)
    _budget_stack_panel(axes[0], stable, "stacked costs, stable case")
    _budget_stack_panel(axes[1], unstable, "stacked costs, unstable case")
    _lambda_panel(axes[2], stable, "margin, stable case")
    _lambda_panel(axes[3], unstable, "margin, unstable case")
    axes[3].set_xlabel("t (s)")
    fig.tight_layout()
    _save(fig, out_path)


def render(fig_id: str, in_dir, out_path) -> None:
    """Dispatch a figure id to its renderer.

    Input layout under in_dir: fig1/{sweep,boundary}.csv,
    fig2_fast, fig2_slow, fig3_stable, fig3_unstable run directories
    (trajectory.csv, events.csv, budget.csv where applicable).
    """
    in_dir = Path(in_dir)
    if fig_id == "fig1":
        render_fig1(in_dir / "fig1" / "sweep.csv", in_dir / "fig1" / "boundary.csv", out_path)
    elif fig_id == "fig2":
        render_fig2(in_dir, out_path)
    elif fig_id == "fig3":
        render_fig3(in_dir, out_path)
    elif fig_id == "fig4":
        render_fig4(in_dir, out_path)
    else:
        raise ValueError(f"unknown figure id {fig_id!r}; expected fig1..fig4")
