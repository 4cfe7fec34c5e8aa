"""Configuration, orchestration, persistence and the command line."""

from lionrate.harness.config import ExperimentConfig, dump_config, load_config, parse_config
from lionrate.harness.runner import (
    Comparison,
    RunRecord,
    Summary,
    prepare,
    run_baseline_comparison,
    run_d_sweep,
    run_experiment,
    run_k_sweep,
    run_single,
)
from lionrate.harness.verify import VerificationReport, verify_suite

__all__ = [
    "Comparison",
    "ExperimentConfig",
    "RunRecord",
    "Summary",
    "VerificationReport",
    "dump_config",
    "load_config",
    "parse_config",
    "prepare",
    "run_baseline_comparison",
    "run_d_sweep",
    "run_experiment",
    "run_k_sweep",
    "run_single",
    "verify_suite",
]
