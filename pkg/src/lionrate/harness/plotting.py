"""SVG line charts for run, sweep and comparison CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from lionrate.harness import io  # noqa: E402

# fixed ids and no date stamp keep the SVG reproducible
matplotlib.rcParams["svg.hashsalt"] = "lionrate"
_SVG_META = {"Date": None}


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_comparison(cmp, path) -> None:
    k = np.arange(1, cmp.K + 1)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(k, cmp.lion_f, label="LION")
    axes[0].plot(k, cmp.sgd_f, label=f"SGD (eta={cmp.sgd_eta:.3g})")
    axes[0].set_ylabel("f")
    axes[1].plot(k, cmp.lion_grad_l1, label="LION")
    axes[1].plot(k, cmp.sgd_grad_l1, label="SGD")
    axes[1].set_ylabel("|grad f|_1")
    for ax in axes:
        ax.set_xlabel("k")
        ax.set_yscale("log")
        ax.legend()
    fig.suptitle(f"seed-mean trajectories over {cmp.n_seeds} seeds")
    fig.tight_layout()
    _save(fig, path)


def _col(rows, name):
    return np.array([float(r[name]) if r[name] != "" else np.nan for r in rows])


def plot_csv(csv_path, svg_path) -> str:
    """Render any CSV this package writes; returns the detected kind."""
    rows = io.read_csv(csv_path)
    if not rows:
        raise ValueError(f"{csv_path} has no data rows")
    cols = set(rows[0])
    if {"lion_f", "sgd_f"} <= cols:
        kind = "compare"
        fig, ax = plt.subplots(figsize=(6, 4))
        k = _col(rows, "k")
        ax.plot(k, _col(rows, "lion_f"), label="LION f")
        ax.plot(k, _col(rows, "sgd_f"), label="SGD f")
        ax.set_yscale("log")
        ax.set_xlabel("k")
    elif {"axis", "bound_value"} <= cols:
        kind = "sweep"
        fig, ax = plt.subplots(figsize=(6, 4))
        x = _col(rows, "axis_value")
        ax.errorbar(x, _col(rows, "mean_metric"), yerr=_col(rows, "std_error"), marker="o",
                    label=rows[0]["metric"])
        ax.plot(x, _col(rows, "bound_value"), "--", label="corollary bound")
        if not np.all(np.isnan(_col(rows, "mean_ratio"))):
            ax.plot(x, _col(rows, "mean_ratio"), marker="s", label="mean |g|_1/|g|_2")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(rows[0]["axis"])
    elif {"kkt_residual", "theta_linf"} <= cols:
        kind = "run"
        fig, ax = plt.subplots(figsize=(6, 4))
        k = _col(rows, "k")
        for name in ("f", "grad_l1", "kkt_residual", "delta_l2"):
            ax.plot(k, np.abs(_col(rows, name)) + 1e-300, label=name)
        ax.set_yscale("log")
        ax.set_xlabel("k")
    else:
        raise ValueError(f"unrecognized CSV layout in {csv_path}")
    ax.legend()
    fig.tight_layout()
    _save(fig, svg_path)
    return kind
