"""Experiment harness: configs, runs, traces, bound checks and comparisons."""

from parqlab.harness.bound import BoundReport, check_bound
from parqlab.harness.compare import CompareResult, compare_methods, grid_evolution
from parqlab.harness.config import ExperimentConfig, OptimizerSpec, load_config, validate_config
from parqlab.harness.runner import RunContext, RunResult, prepare, run, run_seed
from parqlab.harness.trace import TRACE_COLUMNS, ExperimentTrace, TraceRecord, bound_value, summarize

__all__ = [
    "BoundReport",
    "check_bound",
    "CompareResult",
    "compare_methods",
    "grid_evolution",
    "ExperimentConfig",
    "OptimizerSpec",
    "load_config",
    "validate_config",
    "RunContext",
    "RunResult",
    "prepare",
    "run",
    "run_seed",
    "TRACE_COLUMNS",
    "ExperimentTrace",
    "TraceRecord",
    "bound_value",
    "summarize",
]
