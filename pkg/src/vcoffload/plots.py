"""Figure rendering for harness outputs. Headless backend; files only."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

STYLE = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
}

_MARKERS = ["o", "s", "^", "D", "v", "P", "X"]


def _save(fig, out_path):
    fig.savefig(out_path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def _setting_label(solver, gamma) -> str:
    if str(gamma) not in ("", "None"):
        return f"{solver} (g={gamma})"
    return solver


def render_runtime_scaling(series, out_path) -> None:
    """Mean solver wall time vs fleet size, log-scaled, one line per
    (solver setting, task count)."""
    lines: dict[tuple, list[tuple[int, float]]] = {}
    for row in series:
        key = (row["solver"], str(row["gamma"]), int(row["num_tasks"]))
        lines.setdefault(key, []).append(
            (int(row["num_sps"]), float(row["mean_wall_time_s"]))
        )
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for idx, (key, pts) in enumerate(sorted(lines.items())):
            solver, gamma, num_tasks = key
            pts.sort()
            ax.plot(
                [p[0] for p in pts],
                [max(p[1], 1e-9) for p in pts],  # log axis cannot take 0
                marker=_MARKERS[idx % len(_MARKERS)],
                label=f"{_setting_label(solver, gamma)}, {num_tasks} tasks",
            )
        ax.set_yscale("log")
        ax.set_xlabel("service providers")
        ax.set_ylabel("mean wall time [s]")
        ax.set_title("Solver runtime vs fleet size")
        ax.legend()
        _save(fig, out_path)


def render_convergence(conv, out_path) -> None:
    """Incumbent objective vs attempt number per scenario, with flat lines
    for the single-shot solvers."""
    scenarios = sorted(conv)
    if not scenarios:
        return
    ncols = 2 if len(scenarios) > 1 else 1
    nrows = (len(scenarios) + ncols - 1) // ncols
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(5.5 * ncols, 3.4 * nrows), squeeze=False
        )
        for k, scenario_id in enumerate(scenarios):
            ax = axes[k // ncols][k % ncols]
            entry = conv[scenario_id]
            for label, rows in sorted(entry["traces"].items()):
                xs = [int(it) for it, _ in rows]
                ys = [float(best) for _, best in rows]
                ax.step(xs, ys, where="post", label=label)
            styles = {"dpm": ":", "etpm": "--", "optimal": "-."}
            for solver, total in sorted(entry["baselines"].items()):
                ax.axhline(
                    float(total), linestyle=styles.get(solver, "--"), alpha=0.8,
                    color="gray", label=solver,
                )
            ax.set_title(scenario_id)
            ax.set_xlabel("attempt")
            ax.set_ylabel("best objective")
            ax.legend()
        for k in range(len(scenarios), nrows * ncols):
            axes[k // ncols][k % ncols].axis("off")
        fig.tight_layout()
        _save(fig, out_path)


def render_objective_bars(bars, out_path) -> None:
    """Mean solved objective per solver setting, grouped by scenario."""
    scenarios = sorted({b["scenario_id"] for b in bars})
    labels = sorted({b["solver"] for b in bars})
    values = {(b["scenario_id"], b["solver"]): float(b["mean_total"]) for b in bars}
    width = 0.8 / max(len(labels), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(scenarios)), 4.0))
        for li, label in enumerate(labels):
            xs, ys = [], []
            for si, scenario_id in enumerate(scenarios):
                v = values.get((scenario_id, label))
                if v is None:
                    continue
                xs.append(si + (li - (len(labels) - 1) / 2) * width)
                ys.append(v)
            ax.bar(xs, ys, width=width, label=label)
        ax.set_xticks(range(len(scenarios)))
        ax.set_xticklabels(scenarios, rotation=30, ha="right")
        ax.set_ylabel("mean objective")
        ax.set_title("Solved objective by solver")
        ax.legend()
        fig.tight_layout()
        _save(fig, out_path)
