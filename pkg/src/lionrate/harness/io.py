"""CSV/JSON persistence. Floats are written with ``repr`` so files are byte-stable."""

from __future__ import annotations

import csv
import json
import math
import platform
from datetime import datetime, timezone
from pathlib import Path

from lionrate import __version__

RUN_COLUMNS = ["run_id", "seed", "k", "f", "grad_l1", "grad_l2", "ratio", "kkt_residual",
               "theta_linf", "delta_l2", "feasible"]

SUMMARY_COLUMNS = [
    "config_hash", "n_seeds", "K", "d", "lambda", "sigma",
    "mean_avg_kkt_residual", "se_avg_kkt_residual", "mean_avg_grad_l1", "mean_avg_delta",
    "corollary1_bound", "theorem1_bound", "lemma2_bound", "f_trajectory_bound",
    "corollary1_satisfied", "theorem1_satisfied", "lemma2_satisfied", "f_trajectory_satisfied",
    # appended so every flag can be recomputed from this file alone
    "mode", "mean_max_f_gap", "n_aborted",
]

SWEEP_COLUMNS = ["axis", "axis_value", "metric", "mean_metric", "std_error", "bound_value",
                 "mean_ratio", "n_seeds", "n_aborted", "below_bound"]

COMPARE_COLUMNS = ["k", "lion_f", "lion_grad_l1", "sgd_f", "sgd_grad_l1"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def _writer(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def run_csv_path(out_dir, rec) -> Path:
    return Path(out_dir) / "runs" / f"run_{rec.seed}.csv"


def write_run_csv(rec, path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(RUN_COLUMNS)
        s = rec.steps
        for i in range(len(s.get("k", ()))):
            ratio = float(s["ratio"][i])
            w.writerow([
                rec.run_id, rec.seed, int(s["k"][i]), fmt(float(s["f"][i])),
                fmt(float(s["grad_l1"][i])), fmt(float(s["grad_l2"][i])),
                "" if math.isnan(ratio) else repr(ratio),
                fmt(float(s["kkt_residual"][i])), fmt(float(s["theta_linf"][i])),
                fmt(float(s["delta_l2"][i])), fmt(bool(s["feasible"][i])),
            ])


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def summary_row(s) -> list[str]:
    b, ok = s.bounds, s.satisfied
    return [
        s.config_hash, s.n_seeds, s.K, s.d, fmt(float(s.lam)), fmt(float(s.sigma)),
        fmt(s.mean_avg_kkt_residual), fmt(s.se_avg_kkt_residual), fmt(s.mean_avg_grad_l1),
        fmt(s.mean_avg_delta),
        fmt(b.get("corollary1_bound")), fmt(b.get("theorem1_bound")),
        fmt(b.get("lemma2_bound")), fmt(b.get("f_trajectory_bound")),
        fmt(ok["corollary1"]), fmt(ok["theorem1"]), fmt(ok["lemma2"]), fmt(ok["f_trajectory"]),
        s.mode, fmt(s.mean_max_f_gap), s.n_aborted,
    ]


def write_summary_csv(summaries, path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in summary_row(s)])


def recompute_flags(row: dict[str, str]) -> dict[str, bool | None]:
    """Re-derive the bound flags of one summary CSV row from its own columns."""
    from lionrate.harness.runner import bound_flags

    if row["corollary1_bound"] == "":
        return {k: None for k in ("corollary1", "theorem1", "lemma2", "f_trajectory")}
    bounds = {k: float(row[k]) for k in ("corollary1_bound", "theorem1_bound",
                                        "lemma2_bound", "f_trajectory_bound")}
    flags = bound_flags(row["mode"], float(row["mean_avg_kkt_residual"]),
                        float(row["mean_avg_grad_l1"]), float(row["mean_avg_delta"]),
                        float(row["mean_max_f_gap"]), bounds)
    if row["lemma2_satisfied"] == "":
        flags["lemma2"] = None
    return flags


def write_sweep_csv(res, path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(SWEEP_COLUMNS)
        for p in res.points:
            w.writerow([res.axis, fmt(p.axis_value), res.metric, fmt(p.mean_metric),
                        fmt(p.std_error), fmt(p.bound_value), fmt(p.mean_ratio),
                        p.n_seeds, p.n_aborted, fmt(bool(p.mean_metric <= p.bound_value))])


def write_sweep_fit_csv(res, path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["quantity", "slope", "intercept", "r_squared"])
        for name, fit in (("metric", res.fit), ("bound", res.bound_fit), ("ratio", res.ratio_fit)):
            if fit is not None:
                w.writerow([name, fmt(fit.slope), fmt(fit.intercept), fmt(fit.r_squared)])


def write_comparison_csv(cmp, path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(COMPARE_COLUMNS)
        for k in range(cmp.K):
            w.writerow([k + 1, fmt(float(cmp.lion_f[k])), fmt(float(cmp.lion_grad_l1[k])),
                        fmt(float(cmp.sgd_f[k])), fmt(float(cmp.sgd_grad_l1[k]))])


def write_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=repr) + "\n")


def write_metadata(out_dir, cfg, command: str) -> None:
    """Timestamped sidecar; the only output that differs between identical invocations."""
    write_json({
        "command": command,
        "config_hash": cfg.config_hash(),
        "config": cfg.as_dict(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        "version": __version__,
    }, Path(out_dir) / f"meta_{command}.json")
