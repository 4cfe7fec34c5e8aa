import math

import numpy as np
import pytest

from lionrate.cli import main
from lionrate.errors import BudgetError, ConfigError
from lionrate.harness import io
from lionrate.harness.config import ExperimentConfig, dump_config, load_config, parse_config
from lionrate.harness.runner import (
    _noise_streams,
    prepare,
    run_baseline_comparison,
    run_experiment,
    run_k_sweep,
    run_single,
)
from lionrate.harness.verify import verify_suite
from lionrate.problems import GradOracle, NoiseModel, Quadratic

SMALL = ExperimentConfig(problem="quadratic", d=5, K=200, lam=1.0, seeds=(0, 1, 2))

TEXT = """
[problem]
name = rastrigin
d = 8
a = 0.5

[run]
K = 300
mode = constrained
lambda = 2.0
init_scale = 0.25
base_seed = 10
n_seeds = 3
log_every = 7

[noise]
sigma = 0.5
kind = uniform
"""


def test_parse_config():
    cfg = parse_config(TEXT)
    assert cfg.problem == "rastrigin" and cfg.d == 8 and cfg.a == 0.5
    assert cfg.seeds == (10, 11, 12)
    assert cfg.lam == 2.0 and cfg.noise_kind == "uniform" and cfg.log_every == 7
    assert parse_config("[run]\nmode = unconstrained\n").lam is None


@pytest.mark.parametrize("text", [
    "[problem]\nname = quadratic\nsize = 3\n",
    "[extras]\nx = 1\n",
    "[run]\nk = 10\n",
    "[run]\nK = 10.5\n",
    "[run]\nmode = constrained\nlambda = 0\n",
    "[problem]\nname = rosenbrock\n[run]\nmode = unconstrained\n",
    "[problem]\nname = rosenbrock\n[run]\nlambda = 0.1\n",
    "[schedule]\nmode = manual\nbeta1 = 0.9\n",
    "[noise]\nsigma = 0\n",
    "[run]\nseeds = 1,2\nn_seeds = 3\n",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_round_trip(tmp_path):
    for cfg in (parse_config(TEXT), ExperimentConfig(mode="unconstrained", lam=None),
                ExperimentConfig(mode="unconstrained", lam=1.0, sigma_per_coord=0.3),
                ExperimentConfig(schedule_mode="manual", beta1=0.9, beta2=0.99, eta=1e-3,
                                 sweep_axis="K", sweep_values=(100, 1000))):
        assert parse_config(dump_config(cfg)) == cfg
    p = tmp_path / "c.ini"
    p.write_text(dump_config(SMALL))
    assert load_config(p) == SMALL
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_k1_run_aggregates_equal_the_step():
    cfg = SMALL.replace(K=1, schedule_mode="manual", beta1=0.9, beta2=0.99, eta=0.01)
    rec = run_single(cfg, seed=0)
    assert rec.last_step == 1 and list(rec.steps["k"]) == [1]
    m, a = rec.step_metrics(0), rec.aggregates
    assert a.n_steps == 1
    assert a.avg_kkt_residual == m.kkt_residual
    assert a.avg_grad_l1 == m.grad_l1
    assert a.avg_delta == m.delta_l2
    assert a.final_f == m.f_val


def test_noiseless_run_is_feasible_and_decreasing():
    cfg = ExperimentConfig(d=10, K=500, lam=0.5, schedule_mode="manual", beta1=0.9, beta2=0.99,
                           eta=0.01, sigma=0.0)
    rec = run_single(cfg, seed=0)
    assert rec.steps["feasible"].all()
    res = rec.steps["kkt_residual"]
    # decreasing trend (momentum makes it oscillate, so not monotone step to step)
    k = np.arange(res.size)
    assert np.polyfit(k, res, 1)[0] < 0
    assert res[-100:].mean() < 0.1 * res[:100].mean()
    assert res.min() >= -1e-9


def test_logging_interval_does_not_touch_state():
    a = run_single(SMALL.replace(log_every=1), seed=4)
    b = run_single(SMALL.replace(log_every=SMALL.K), seed=4)
    np.testing.assert_array_equal(a.final_theta, b.final_theta)
    assert a.aggregates == b.aggregates
    assert list(b.steps["k"]) == [1, 200]
    c = run_single(SMALL.replace(log_every=7), seed=4)
    assert c.steps["k"][-1] == SMALL.K and c.steps["k"][1] == 8


def test_run_is_deterministic_and_seed_dependent():
    a, b, c = (run_single(SMALL, s) for s in (1, 1, 2))
    np.testing.assert_array_equal(a.final_theta, b.final_theta)
    assert not np.array_equal(a.final_theta, c.final_theta)


def test_one_seed_summary_matches_run():
    s = run_experiment(SMALL.replace(seeds=(3,)))
    a = s.records[0].aggregates
    assert s.mean_avg_kkt_residual == a.avg_kkt_residual
    assert s.se_avg_kkt_residual == 0.0 and s.se_avg_grad_l1 == 0.0


def test_infeasible_start_and_budget():
    with pytest.raises(ConfigError, match="infeasible"):
        prepare(SMALL.replace(lam=2.0))  # init_scale 1 > 1/lambda
    with pytest.raises(ConfigError, match="infeasible"):
        prepare(SMALL, theta0=np.full(5, 1.5))
    prepare(SMALL, theta0=np.full(5, 1.0))  # boundary start is allowed
    with pytest.raises(BudgetError):
        prepare(SMALL.replace(d=2000, K=100))


def test_domain_exit_aborts_run(tmp_path):
    # eta * lambda > 1 lets the iterate overshoot the box and leave rosenbrock's domain
    cfg = ExperimentConfig(problem="rosenbrock", d=3, K=50, lam=0.5, schedule_mode="manual",
                           beta1=0.9, beta2=0.99, eta=5.0, sigma=0.0, init_scale=0.5)
    rec = run_single(cfg, seed=0)
    assert rec.aborted and "outside certified radius" in rec.abort_reason
    assert rec.last_step == rec.aggregates.n_steps < cfg.K
    s = run_experiment(cfg, out_dir=tmp_path)
    assert s.incomplete and s.n_aborted == 1
    assert main(["run", "-c", _write(tmp_path, dump_config(cfg)), "-o", str(tmp_path / "cli")]) == 3


def test_csv_outputs_and_flag_recompute(tmp_path):
    s = run_experiment(SMALL, out_dir=tmp_path)
    rows = io.read_csv(tmp_path / "runs" / "run_0.csv")
    assert list(rows[0]) == io.RUN_COLUMNS and len(rows) == SMALL.K
    summ = io.read_csv(tmp_path / "summary.csv")
    assert list(summ[0]) == io.SUMMARY_COLUMNS
    assert io.recompute_flags(summ[0]) == s.satisfied
    assert (tmp_path / "meta_run.json").exists()


def test_unconstrained_flags_recompute(tmp_path):
    cfg = ExperimentConfig(d=5, K=500, mode="unconstrained", lam=None, seeds=(0, 1))
    s = run_experiment(cfg, out_dir=tmp_path)
    assert s.lam * s.max_theta_linf <= 0.5
    assert io.recompute_flags(io.read_csv(tmp_path / "summary.csv")[0]) == s.satisfied


def test_shared_noise_streams():
    p = Quadratic(6)
    noise = NoiseModel(1.0)
    a, b = _noise_streams(5)
    oa = GradOracle.from_generator(p, noise, a, 5)
    ob = GradOracle.from_generator(p, noise, b, 5)
    for _ in range(20):
        np.testing.assert_array_equal(oa.draw_noise(), ob.draw_noise())


def test_comparison_noiseless(tmp_path):
    cfg = ExperimentConfig(d=5, K=300, schedule_mode="manual", beta1=0.9, beta2=0.99,
                           eta=0.01, sigma=0.0, seeds=(0,))
    cmp = run_baseline_comparison(cfg, out_dir=tmp_path)
    assert cmp.sgd_eta == pytest.approx(0.01 * math.sqrt(5))
    assert not np.isnan(cmp.lion_f).any() and not np.isnan(cmp.sgd_f).any()
    assert cmp.lion_f[-1] < cmp.lion_f[0] and cmp.sgd_f[-1] < cmp.sgd_f[0]
    rows = io.read_csv(tmp_path / "compare.csv")
    assert len(rows) == 300 and all(r["lion_f"] and r["sgd_f"] for r in rows)
    assert (tmp_path / "compare.svg").read_text().startswith("<?xml")


def test_k_sweep_small(tmp_path):
    res = run_k_sweep(SMALL.replace(d=4, seeds=(0, 1)), [100, 400, 1600], out_dir=tmp_path)
    assert res.bound_fit.slope == pytest.approx(-0.25, abs=1e-12)
    assert res.all_below_bound()
    rows = io.read_csv(tmp_path / "sweep.csv")
    assert [r["axis_value"] for r in rows] == ["100.0", "400.0", "1600.0"]
    assert all(float(r["mean_metric"]) <= float(r["bound_value"]) for r in rows)


def test_verify_report(tmp_path):
    rep = verify_suite(SMALL, out_dir=tmp_path, fd_points=20, smoothness_trials=200)
    names = [c.name for c in rep.checks]
    assert {"feasibility", "residual_nonnegative", "lemma2_bound", "f_trajectory_bound",
            "gradient_finite_difference", "smoothness_constant"} <= set(names)
    assert rep.passed, rep.failures()
    assert (tmp_path / "verify_report.json").exists()
    with pytest.raises(ConfigError):
        verify_suite(SMALL.replace(schedule_mode="manual", beta1=0.9, beta2=0.9, eta=0.01))


def _write(tmp_path, text):
    p = tmp_path / "cfg.ini"
    p.write_text(text)
    return str(p)


def test_cli_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, dump_config(SMALL))
    assert main(["run", "-c", good, "-o", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a" / "summary.csv").exists()
    assert main(["run", "-c", good, "-o", str(tmp_path / "b"), "--seeds", "5"]) == 0
    assert (tmp_path / "b" / "runs" / "run_5.csv").exists()
    bad = _write(tmp_path, "[run]\nbogus = 1\n")
    assert main(["run", "-c", bad]) == 1
    budget = _write(tmp_path, dump_config(SMALL.replace(d=2000, K=100)))
    assert main(["run", "-c", budget]) == 1
    assert main(["sweep", "-c", good]) == 1  # no [sweep] section
    assert main(["plot", str(tmp_path / "a" / "runs" / "run_0.csv")]) == 0
    assert (tmp_path / "a" / "runs" / "run_0.svg").exists()
    assert main(["plot", str(tmp_path / "missing.csv")]) == 3
    capsys.readouterr()
