"""Certification battery: every check becomes a report entry, never an exception."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from lionrate.errors import ConfigError
from lionrate.harness import io
from lionrate.harness.config import ExperimentConfig
from lionrate.harness.runner import Summary, run_experiment
from lionrate.problems import certify_smoothness, gradient_check, make_problem

FEAS_TOL = 1e-12
RESIDUAL_TOL = 1e-9
FD_TOL = 1e-5
# finite differences cost O(d) evaluations per point; larger problems are checked
# on a same-family instance of this dimension
FD_MAX_DIM = 50


@dataclass
class Check:
    name: str
    passed: Optional[bool]  # None = not applicable to this config
    value: float
    threshold: float
    detail: str = ""


@dataclass
class VerificationReport:
    config_hash: str
    checks: list[Check] = field(default_factory=list)
    summary: Optional[Summary] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.passed is False]

    def as_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "passed": self.passed,
            "checks": [{k: (None if isinstance(v, float) and math.isnan(v) else v)
                        for k, v in asdict(c).items()} for c in self.checks],
        }


def verify_suite(cfg: ExperimentConfig, out_dir=None, fd_points: int = 100,
                 smoothness_trials: int = 1000) -> VerificationReport:
    if cfg.schedule_mode != "theory":
        raise ConfigError("verify requires schedule.mode = theory")
    rep = VerificationReport(cfg.config_hash())
    add = rep.checks.append

    s = run_experiment(cfg, keep_records=False)
    rep.summary = s
    aggs = [r.aggregates for r in s.records if r.aggregates is not None]
    add(Check("runs_completed", s.n_aborted == 0, float(s.n_aborted), 0.0,
              "; ".join(r.abort_reason for r in s.records if r.aborted)))

    max_linf = max(a.max_theta_linf for a in aggs) if aggs else math.nan
    if cfg.mode == "constrained":
        add(Check("feasibility", max_linf <= 1.0 / s.lam + FEAS_TOL, max_linf, 1.0 / s.lam,
                  "max over seeds and steps of |theta^k|_inf"))
        min_res = min(a.min_kkt_residual for a in aggs) if aggs else math.nan
        add(Check("residual_nonnegative", min_res >= -RESIDUAL_TOL, min_res, -RESIDUAL_TOL,
                  "min over seeds and steps of the KKT residual"))
    else:
        scaled = s.lam * max_linf
        applicable = cfg.lam is None
        add(Check("boundary_avoidance", (scaled <= 0.5 + FEAS_TOL) if applicable else None,
                  scaled, 0.5,
                  "max lambda*|theta^k|_inf" + ("" if applicable else " (lambda not auto-chosen)")))

    lhs = s.certified_metric
    lhs_name = "mean avg KKT residual" if cfg.mode == "constrained" else "mean (1/2K) sum |grad|_1"
    add(Check("corollary1_bound", s.satisfied["corollary1"], lhs, s.bounds["corollary1_bound"],
              lhs_name))
    add(Check("theorem1_bound", s.satisfied["theorem1"], lhs, s.bounds["theorem1_bound"], lhs_name))
    add(Check("lemma2_bound", s.satisfied["lemma2"], s.mean_avg_delta, s.bounds["lemma2_bound"],
              "mean avg |c^k - grad f(theta^k)|_2"))
    add(Check("f_trajectory_bound", s.satisfied["f_trajectory"], s.mean_max_f_gap,
              s.bounds["f_trajectory_bound"], "mean max_k f(theta^k) - f_star"))

    fd_dim = min(cfg.d, FD_MAX_DIM)
    fd_problem = make_problem(cfg.problem, fd_dim, **cfg.problem_params())
    err = gradient_check(fd_problem, n_points=fd_points, seed=cfg.init_seed)
    add(Check("gradient_finite_difference", err < FD_TOL, err, FD_TOL,
              f"{fd_points} random points, dim {fd_dim}"))
    sm = certify_smoothness(fd_problem, trials=smoothness_trials, seed=cfg.init_seed)
    add(Check("smoothness_constant", sm.passed, sm.max_ratio, sm.declared_L,
              "max sampled |grad diff| / |x - y|"))

    if out_dir is not None:
        write_report(rep, out_dir)
        io.write_summary_csv([s], Path(out_dir) / "summary.csv")
        io.write_metadata(out_dir, cfg, command="verify")
    return rep


def write_report(rep: VerificationReport, out_dir) -> None:
    out = Path(out_dir)
    io.write_json(rep.as_dict(), out / "verify_report.json")
    fh, w = io._writer(out / "verify_report.csv")
    with fh:
        w.writerow(["check", "passed", "value", "threshold", "detail"])
        for c in rep.checks:
            w.writerow([c.name, io.fmt(c.passed), io.fmt(float(c.value)),
                        io.fmt(float(c.threshold)), c.detail])
