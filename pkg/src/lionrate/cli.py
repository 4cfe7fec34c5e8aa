"""Command line: ``lionrate {run,sweep,compare,verify,plot}``.

Exit codes: 0 success, 1 config error, 2 certification failure, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from lionrate.errors import BudgetError, ConfigError, UnsupportedProblemError

EXIT_OK, EXIT_CONFIG, EXIT_CERT, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("lionrate")


def _load(args):
    from lionrate.harness.config import load_config

    cfg = load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if getattr(args, "seeds", None):
        changes["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> int:
    from lionrate.harness.runner import run_experiment

    cfg = _load(args)
    s = run_experiment(cfg, out_dir=cfg.out_dir, keep_records=False)
    print(f"{cfg.config_hash()}: {s.n_seeds} seeds, K={s.K}, d={s.d}, lambda={s.lam:.6g}")
    print(f"  mean avg KKT residual = {s.mean_avg_kkt_residual:.6g} (se {s.se_avg_kkt_residual:.3g})")
    for name, ok in s.satisfied.items():
        if ok is not None:
            print(f"  {name:<13} {'ok' if ok else 'VIOLATED'}  bound={s.bounds[name + '_bound']:.6g}")
    if s.incomplete:
        return EXIT_ABORT
    return EXIT_OK if s.all_satisfied else EXIT_CERT


def cmd_sweep(args) -> int:
    from lionrate.harness.runner import run_d_sweep, run_k_sweep

    cfg = _load(args)
    if cfg.sweep_axis is None or not cfg.sweep_values:
        raise ConfigError("sweep needs [sweep] axis and values")
    fn = run_k_sweep if cfg.sweep_axis == "K" else run_d_sweep
    res = fn(cfg, cfg.sweep_values, out_dir=cfg.out_dir)
    for p in res.points:
        print(f"  {res.axis}={p.axis_value:g}: {res.metric}={p.mean_metric:.6g} "
              f"bound={p.bound_value:.6g} ratio={p.mean_ratio:.4g}")
    print(f"  fitted slope {res.fit.slope:.4f} (bound slope {res.bound_fit.slope:.4f})")
    if res.ratio_fit is not None:
        print(f"  ratio slope {res.ratio_fit.slope:.4f}")
    if not res.meets_design_span():
        log.warning("sweep has fewer than 4 points or a short span; slopes are indicative only")
    if any(p.n_aborted for p in res.points):
        return EXIT_ABORT
    return EXIT_OK if res.all_below_bound() else EXIT_CERT


def cmd_compare(args) -> int:
    from lionrate.harness.runner import run_baseline_comparison

    cfg = _load(args)
    cmp = run_baseline_comparison(cfg, out_dir=cfg.out_dir)
    print(f"  final f: LION {cmp.lion_f[-1]:.6g}  SGD(eta={cmp.sgd_eta:.4g}) {cmp.sgd_f[-1]:.6g}")
    return EXIT_ABORT if cmp.lion_aborted else EXIT_OK


def cmd_verify(args) -> int:
    from lionrate.harness.verify import verify_suite

    cfg = _load(args)
    rep = verify_suite(cfg, out_dir=cfg.out_dir)
    for c in rep.checks:
        status = {True: "PASS", False: "FAIL", None: "n/a "}[c.passed]
        print(f"  {status} {c.name:<28} value={c.value:.6g} threshold={c.threshold:.6g}")
    return EXIT_OK if rep.passed else EXIT_CERT


def cmd_plot(args) -> int:
    from lionrate.harness.plotting import plot_csv

    out = args.output or str(Path(args.csv).with_suffix(".svg"))
    kind = plot_csv(args.csv, out)
    print(f"  wrote {kind} plot to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lionrate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("run", cmd_run, "multi-seed experiment with bound certificates"),
        ("sweep", cmd_sweep, "K- or d-sweep with log-log slope fits"),
        ("compare", cmd_compare, "LION vs SGD on shared noise"),
        ("verify", cmd_verify, "full certification battery"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-c", "--config", required=True)
        p.add_argument("-o", "--out", default=None, help="output directory (overrides [output] dir)")
        p.add_argument("--seeds", default=None, help="comma-separated seed list override")
        p.set_defaults(func=fn)
    p = sub.add_parser("plot", help="render a CSV written by this tool as SVG")
    p.add_argument("csv")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, BudgetError, UnsupportedProblemError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
