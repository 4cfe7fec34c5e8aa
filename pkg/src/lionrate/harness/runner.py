"""Run orchestration: single runs, multi-seed experiments, baseline comparison, sweeps.

Every step evaluates the exact gradient at the current iterate (the logging
pass, which never touches optimizer state) and feeds ``grad + xi`` to the
optimizer (the training pass). Aggregates use every step; ``log_every`` only
thins the per-step table.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from lionrate import metrics
from lionrate.errors import ConfigError, DomainError, InvalidInputError
from lionrate.harness.config import ExperimentConfig
from lionrate.optimizers import (
    LionConfig,
    SgdConfig,
    init_state,
    init_state_zero,
    lion_step,
    sgd_step,
)
from lionrate.problems import GradOracle, NoiseModel, Problem, make_problem
from lionrate.ratefit import SweepPoint, SweepResult
from lionrate.schedule import (
    TheoryConstants,
    choose_lambda_unconstrained,
    corollary_constants,
    instantiate,
)

log = logging.getLogger(__name__)

STEP_FIELDS = ("f", "grad_l1", "grad_l2", "ratio", "kkt_residual", "theta_linf",
               "delta_l2", "feasible")


@dataclass
class RunSetup:
    """Everything shared by the seeds of one config."""

    cfg: ExperimentConfig
    problem: Problem
    theta1: np.ndarray
    f1: float
    lam: float
    lion: LionConfig
    tc: Optional[TheoryConstants]
    sigma: float

    @property
    def delta(self) -> float:
        return self.f1 - self.problem.f_star_lower


def initial_point(cfg: ExperimentConfig, problem: Problem) -> np.ndarray:
    rng = np.random.default_rng(cfg.init_seed)
    return rng.uniform(-cfg.init_scale, cfg.init_scale, problem.dim)


def prepare(cfg: ExperimentConfig, theta0=None) -> RunSetup:
    """Build the problem, initial point and hyperparameters for ``cfg``.

    Raises ConfigError for an infeasible constrained start (never projected) and
    BudgetError when K is below a schedule floor.
    """
    problem = make_problem(cfg.problem, cfg.d, **cfg.problem_params())
    theta1 = initial_point(cfg, problem) if theta0 is None else np.array(theta0, dtype=np.float64)
    if theta1.shape != (problem.dim,):
        raise ConfigError(f"theta0 has shape {theta1.shape}, expected ({problem.dim},)")
    if problem.domain_radius is not None and np.max(np.abs(theta1)) > problem.domain_radius:
        raise ConfigError("initial point lies outside the problem's certified domain")
    f1 = problem.f(theta1)
    sigma = cfg.effective_sigma

    tc = None
    if cfg.schedule_mode == "theory":
        delta = f1 - problem.f_star_lower
        if not delta > 0:
            raise ConfigError("theory schedule needs f(theta^1) > f_star; move the initial point")
        tc = corollary_constants(problem.smoothness_L, delta, sigma)

    lam = cfg.lam
    if lam is None:
        if tc is None:
            raise ConfigError("lambda = auto requires the theory schedule")
        lam = choose_lambda_unconstrained(problem, tc, f1)

    if cfg.mode == "constrained" and np.max(np.abs(theta1)) > 1.0 / lam:
        raise ConfigError(
            f"infeasible start: |theta0|_inf = {np.max(np.abs(theta1)):g} > 1/lambda = {1.0 / lam:g}")

    if tc is not None:
        lion = instantiate(tc, cfg.K, problem.dim, lam=lam)
    else:
        try:
            lion = LionConfig(cfg.beta1, cfg.beta2, cfg.eta, lam, cfg.K)
        except InvalidInputError as e:
            raise ConfigError(str(e)) from None
    return RunSetup(cfg, problem, theta1, f1, lam, lion, tc, sigma)


def certificates(setup: RunSetup) -> dict[str, float]:
    """Closed-form bounds for this setup; empty outside the theory schedule."""
    if setup.tc is None:
        return {}
    tc, K, d = setup.tc, setup.cfg.K, setup.problem.dim
    lc = setup.lion
    return {
        "corollary1_bound": metrics.corollary1_bound(d, K, tc.L, tc.delta, tc.sigma),
        "theorem1_bound": metrics.theorem1_bound(d, K, tc),
        "lemma2_bound": metrics.lemma2_bound(K, lc.beta1, lc.beta2, lc.eta, tc.L, tc.sigma, d),
        "f_trajectory_bound": metrics.f_trajectory_bound(tc, setup.f1, setup.problem.f_star_lower),
    }


@dataclass
class RunRecord:
    run_id: str
    seed: int
    config: ExperimentConfig
    lam: float
    lion: LionConfig
    steps: dict[str, np.ndarray]  # logged rows only; includes "k"
    aggregates: Optional[metrics.RunAggregates]
    certificates: dict[str, float]
    final_theta: np.ndarray
    aborted: bool = False
    abort_reason: str = ""
    last_step: int = 0

    def step_metrics(self, i: int) -> metrics.StepMetrics:
        s = self.steps
        r = s["ratio"][i]
        return metrics.StepMetrics(
            k=int(s["k"][i]), f_val=float(s["f"][i]), grad_l1=float(s["grad_l1"][i]),
            grad_l2=float(s["grad_l2"][i]), ratio=None if math.isnan(r) else float(r),
            kkt_residual=float(s["kkt_residual"][i]), theta_linf=float(s["theta_linf"][i]),
            delta_l2=float(s["delta_l2"][i]), feasible=bool(s["feasible"][i]))


def _logged_indices(n: int, K: int, log_every: int) -> np.ndarray:
    idx = np.arange(0, n, log_every)
    if n == K and (K - 1) % log_every:
        idx = np.append(idx, K - 1)
    return idx


def _aggregate_arrays(a: dict[str, np.ndarray], n: int) -> metrics.RunAggregates:
    ratios = a["ratio"][:n]
    ratios = ratios[~np.isnan(ratios)]
    return metrics.RunAggregates(
        avg_kkt_residual=math.fsum(a["kkt_residual"][:n]) / n,
        avg_grad_l1=math.fsum(a["grad_l1"][:n]) / n,
        avg_delta=math.fsum(a["delta_l2"][:n]) / n,
        max_theta_linf=float(a["theta_linf"][:n].max()),
        min_f=float(a["f"][:n].min()),
        max_f=float(a["f"][:n].max()),
        final_f=float(a["f"][n - 1]),
        mean_ratio=math.fsum(ratios) / len(ratios) if len(ratios) else math.nan,
        n_steps=n,
        min_kkt_residual=float(a["kkt_residual"][:n].min()),
    )


def run_single(cfg: ExperimentConfig, seed: int, setup: Optional[RunSetup] = None,
               theta0=None) -> RunRecord:
    """Execute K LION steps for one noise seed. Deterministic per ``(cfg, seed)``."""
    if setup is None:
        setup = prepare(cfg, theta0)
    p, lc, lam, K = setup.problem, setup.lion, setup.lam, cfg.K
    oracle = GradOracle(p, NoiseModel(setup.sigma, cfg.noise_kind), seed)
    arrays = {name: np.empty(K) for name in STEP_FIELDS}
    inv_lam = 1.0 / lam if lam > 0 else math.inf

    state = None
    theta = setup.theta1.copy()
    n_done, aborted, reason = 0, False, ""
    for k in range(1, K + 1):
        try:
            fval, grad = p.value_and_grad(theta)
        except (DomainError, InvalidInputError) as e:
            aborted, reason = True, f"step {k}: {e}"
            break
        g = grad + oracle.draw_noise()
        if state is None:
            state = init_state(theta, g) if cfg.momentum_init == "gradient" else init_state_zero(theta)
        try:
            new_state, c = lion_step(state, g, lc)
        except InvalidInputError as e:
            aborted, reason = True, f"step {k}: {e}"
            break

        i = k - 1
        l1 = float(np.abs(grad).sum())
        l2 = math.sqrt(float(grad @ grad))
        linf = float(np.abs(theta).max())
        diff = c - grad
        arrays["f"][i] = fval
        arrays["grad_l1"][i] = l1
        arrays["grad_l2"][i] = l2
        arrays["ratio"][i] = l1 / l2 if l2 > 0 else math.nan
        arrays["kkt_residual"][i] = lam * float(grad @ theta) + l1
        arrays["theta_linf"][i] = linf
        arrays["delta_l2"][i] = math.sqrt(float(diff @ diff))
        arrays["feasible"][i] = linf <= inv_lam + 1e-12
        n_done = k

        state = new_state
        theta = state.theta
        if not np.all(np.isfinite(theta)):
            aborted, reason = True, f"step {k}: non-finite iterate"
            break

    if aborted:
        log.warning("run %s seed %d aborted: %s", cfg.config_hash(), seed, reason)
    idx = _logged_indices(n_done, K, cfg.log_every)
    steps = {name: arr[idx] for name, arr in arrays.items()}
    steps["k"] = idx + 1
    steps["feasible"] = steps["feasible"].astype(bool)
    return RunRecord(
        run_id=f"{cfg.config_hash()}-s{seed}",
        seed=seed,
        config=cfg,
        lam=lam,
        lion=lc,
        steps=steps,
        aggregates=_aggregate_arrays(arrays, n_done) if n_done else None,
        certificates=certificates(setup),
        final_theta=theta.copy(),
        aborted=aborted,
        abort_reason=reason,
        last_step=n_done,
    )


# ---------------------------------------------------------------------------
# Multi-seed experiments
# ---------------------------------------------------------------------------

BOUND_NAMES = ("corollary1", "theorem1", "lemma2", "f_trajectory")


@dataclass
class Summary:
    config_hash: str
    mode: str
    n_seeds: int
    K: int
    d: int
    lam: float
    sigma: float
    f_star: float
    mean_avg_kkt_residual: float
    se_avg_kkt_residual: float
    mean_avg_grad_l1: float
    se_avg_grad_l1: float
    mean_avg_delta: float
    mean_max_f_gap: float
    max_theta_linf: float
    mean_ratio: float
    bounds: dict[str, float]
    satisfied: dict[str, Optional[bool]]
    n_aborted: int
    records: list[RunRecord] = field(default_factory=list, repr=False)

    @property
    def certified_metric(self) -> float:
        """Seed-mean left-hand side of the corollary for this mode."""
        if self.mode == "constrained":
            return self.mean_avg_kkt_residual
        return 0.5 * self.mean_avg_grad_l1

    @property
    def incomplete(self) -> bool:
        return self.n_aborted > 0

    @property
    def all_satisfied(self) -> bool:
        return all(v is not False for v in self.satisfied.values())


def _mean_se(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    mean = math.fsum(arr) / arr.size
    if arr.size == 1:
        return mean, 0.0
    return mean, float(np.std(arr, ddof=1) / math.sqrt(arr.size))


def bound_flags(mode: str, mean_avg_kkt: float, mean_avg_l1: float, mean_avg_delta: float,
                mean_max_f_gap: float, bounds: dict[str, float],
                momentum_init: str = "gradient") -> dict[str, Optional[bool]]:
    """Compare seed means with each bound; None where a bound does not apply."""
    if not bounds:
        return {b: None for b in BOUND_NAMES}
    lhs = mean_avg_kkt if mode == "constrained" else 0.5 * mean_avg_l1
    return {
        "corollary1": bool(lhs <= bounds["corollary1_bound"]),
        "theorem1": bool(lhs <= bounds["theorem1_bound"]),
        "lemma2": bool(mean_avg_delta <= bounds["lemma2_bound"]) if momentum_init == "gradient" else None,
        "f_trajectory": bool(mean_max_f_gap <= bounds["f_trajectory_bound"]),
    }


def summarize(cfg: ExperimentConfig, setup: RunSetup, records: list[RunRecord]) -> Summary:
    done = [r for r in records if r.aggregates is not None and not r.aborted]
    aggs = [r.aggregates for r in done]
    f_star = setup.problem.f_star_lower
    kkt_m, kkt_se = _mean_se([a.avg_kkt_residual for a in aggs])
    l1_m, l1_se = _mean_se([a.avg_grad_l1 for a in aggs])
    delta_m, _ = _mean_se([a.avg_delta for a in aggs])
    fgap_m, _ = _mean_se([a.max_f - f_star for a in aggs])
    ratio_m, _ = _mean_se([a.mean_ratio for a in aggs if not math.isnan(a.mean_ratio)])
    bounds = certificates(setup)
    return Summary(
        config_hash=cfg.config_hash(), mode=cfg.mode, n_seeds=len(records), K=cfg.K,
        d=setup.problem.dim, lam=setup.lam, sigma=setup.sigma, f_star=f_star,
        mean_avg_kkt_residual=kkt_m, se_avg_kkt_residual=kkt_se,
        mean_avg_grad_l1=l1_m, se_avg_grad_l1=l1_se, mean_avg_delta=delta_m,
        mean_max_f_gap=fgap_m,
        max_theta_linf=max((a.max_theta_linf for a in aggs), default=math.nan),
        mean_ratio=ratio_m,
        bounds=bounds,
        satisfied=bound_flags(cfg.mode, kkt_m, l1_m, delta_m, fgap_m, bounds, cfg.momentum_init),
        n_aborted=len(records) - len(done),
        records=records,
    )


def run_experiment(cfg: ExperimentConfig, out_dir=None, keep_records: bool = True) -> Summary:
    """Run every seed of ``cfg``; write per-run and summary CSVs when ``out_dir`` is given."""
    from lionrate.harness import io

    setup = prepare(cfg)
    records = []
    for seed in cfg.seeds:
        rec = run_single(cfg, seed, setup)
        if out_dir is not None:
            io.write_run_csv(rec, io.run_csv_path(out_dir, rec))
        if not keep_records:
            rec.steps = {}
        records.append(rec)
    summary = summarize(cfg, setup, records)
    if out_dir is not None:
        io.write_summary_csv([summary], io.Path(out_dir) / "summary.csv")
        io.write_metadata(out_dir, cfg, command="run")
    return summary


# ---------------------------------------------------------------------------
# LION vs SGD
# ---------------------------------------------------------------------------

@dataclass
class Comparison:
    K: int
    sgd_eta: float
    lion_f: np.ndarray  # seed-mean trajectories, length K
    lion_grad_l1: np.ndarray
    sgd_f: np.ndarray
    sgd_grad_l1: np.ndarray
    n_seeds: int
    sgd_diverged: int = 0
    lion_aborted: int = 0


def default_sgd_eta(setup: RunSetup) -> float:
    # matches the per-coordinate magnitude of a LION step
    return setup.lion.eta * math.sqrt(setup.problem.dim)


def _noise_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    child = np.random.SeedSequence(seed).spawn(1)[0]
    return np.random.default_rng(child), np.random.default_rng(child)


def run_pair(setup: RunSetup, seed: int, sgd_eta: float):
    """One seed of LION and SGD on identical noise sequences.

    Returns four length-K arrays (lion f, lion |grad|_1, sgd f, sgd |grad|_1);
    entries after a divergence are NaN.
    """
    cfg, p, K = setup.cfg, setup.problem, setup.cfg.K
    noise = NoiseModel(setup.sigma, cfg.noise_kind)
    rng_lion, rng_sgd = _noise_streams(seed)
    o_lion = GradOracle.from_generator(p, noise, rng_lion, seed)
    o_sgd = GradOracle.from_generator(p, noise, rng_sgd, seed)
    out = np.full((4, K), np.nan)

    state = None
    theta = setup.theta1.copy()
    for k in range(K):
        try:
            fval, grad = p.value_and_grad(theta)
        except (DomainError, InvalidInputError):
            break
        g = grad + o_lion.draw_noise()
        if state is None:
            state = init_state(theta, g) if cfg.momentum_init == "gradient" else init_state_zero(theta)
        out[0, k], out[1, k] = fval, np.abs(grad).sum()
        state, _ = lion_step(state, g, setup.lion)
        theta = state.theta
        if not np.all(np.isfinite(theta)):
            break

    scfg = SgdConfig(sgd_eta)
    theta = setup.theta1.copy()
    for k in range(K):
        try:
            fval, grad = p.value_and_grad(theta)
        except (DomainError, InvalidInputError):
            break
        out[2, k], out[3, k] = fval, np.abs(grad).sum()
        theta = sgd_step(theta, grad + o_sgd.draw_noise(), scfg)
        if not np.all(np.isfinite(theta)):
            break
    return out


def run_baseline_comparison(cfg: ExperimentConfig, out_dir=None) -> Comparison:
    from lionrate.harness import io

    setup = prepare(cfg)
    sgd_eta = cfg.sgd_eta if cfg.sgd_eta is not None else default_sgd_eta(setup)
    if not sgd_eta > 0:
        raise ConfigError("sgd_eta must be positive")
    total = np.zeros((4, cfg.K))
    sgd_div = lion_ab = 0
    for seed in cfg.seeds:
        tr = run_pair(setup, seed, sgd_eta)
        lion_ab += bool(np.isnan(tr[0]).any())
        sgd_div += bool(np.isnan(tr[2]).any())
        total += tr
    total /= len(cfg.seeds)
    cmp = Comparison(cfg.K, sgd_eta, total[0], total[1], total[2], total[3], len(cfg.seeds),
                     sgd_diverged=sgd_div, lion_aborted=lion_ab)
    if out_dir is not None:
        io.write_comparison_csv(cmp, io.Path(out_dir) / "compare.csv")
        io.write_metadata(out_dir, cfg, command="compare")
        from lionrate.harness import plotting
        plotting.plot_comparison(cmp, io.Path(out_dir) / "compare.svg")
    return cmp


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _sweep_cell(cfg: ExperimentConfig) -> tuple[Summary, RunSetup]:
    setup = prepare(cfg)
    records = [run_single(cfg, s, setup) for s in cfg.seeds]
    for r in records:
        r.steps = {}
    return summarize(cfg, setup, records), setup


def _sweep_point(axis_value: float, summary: Summary) -> SweepPoint:
    mean = summary.certified_metric
    se = summary.se_avg_kkt_residual if summary.mode == "constrained" else 0.5 * summary.se_avg_grad_l1
    return SweepPoint(
        axis_value=float(axis_value), mean_metric=mean, std_error=se,
        bound_value=summary.bounds.get("corollary1_bound", math.nan),
        mean_ratio=summary.mean_ratio, n_seeds=summary.n_seeds, n_aborted=summary.n_aborted)


def _metric_name(cfg: ExperimentConfig) -> str:
    return "avg_kkt_residual" if cfg.mode == "constrained" else "half_avg_grad_l1"


def run_k_sweep(cfg: ExperimentConfig, K_values, out_dir=None) -> SweepResult:
    """Re-derive the schedule at each K (betas and eta are K-dependent) and fit the decay."""
    if cfg.schedule_mode != "theory":
        raise ConfigError("sweeps certify against the theory schedule; set schedule.mode = theory")
    res = SweepResult(axis="K", metric=_metric_name(cfg))
    for K in K_values:
        summary, _ = _sweep_cell(cfg.replace(K=int(K)))
        res.points.append(_sweep_point(K, summary))
    res.refit()
    if out_dir is not None:
        _write_sweep(cfg.replace(sweep_axis="K", sweep_values=tuple(int(k) for k in K_values)),
                     res, out_dir)
    return res


def run_d_sweep(cfg: ExperimentConfig, d_values, out_dir=None) -> SweepResult:
    """Sweep the dimension at fixed K; the initial point and constants are rebuilt per d."""
    if cfg.schedule_mode != "theory":
        raise ConfigError("sweeps certify against the theory schedule; set schedule.mode = theory")
    res = SweepResult(axis="d", metric=_metric_name(cfg))
    for d in d_values:
        summary, _ = _sweep_cell(cfg.replace(d=int(d)))
        res.points.append(_sweep_point(d, summary))
    res.refit()
    if out_dir is not None:
        _write_sweep(cfg.replace(sweep_axis="d", sweep_values=tuple(int(v) for v in d_values)),
                     res, out_dir)
    return res


def _write_sweep(cfg: ExperimentConfig, res: SweepResult, out_dir) -> None:
    from lionrate.harness import io

    io.write_sweep_csv(res, io.Path(out_dir) / "sweep.csv")
    io.write_sweep_fit_csv(res, io.Path(out_dir) / "sweep_fit.csv")
    io.write_metadata(out_dir, cfg, command="sweep")
