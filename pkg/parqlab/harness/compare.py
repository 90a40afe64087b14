"""
Side-by-side comparison of several methods on one problem.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from parqlab.errors import ConfigError
from parqlab.harness.config import ExperimentConfig
from parqlab.harness.runner import RunResult, run
from parqlab.harness.trace import ExperimentTrace, parse_q_values, write_frame

COMPARE_METRICS = ("train_loss", "eval_metric", "objective_gap", "quantized_fraction", "inv_slope")


@dataclass
class CompareResult:
    frame: pd.DataFrame
    grid_summary: pd.DataFrame
    runs: Dict[str, RunResult]
    out_path: Path
    grid_summary_path: Path


def q_max_series(traces: Sequence[ExperimentTrace]) -> np.ndarray:
    """Seed mean of the largest tracked grid value at each logged step (NaN when untracked)."""
    rows = []
    for tr in traces:
        levels = [parse_q_values(text) for text in tr.frame["q_values"]]
        rows.append([float(np.max(v)) if v.size else np.nan for v in levels])
    return np.asarray(rows, dtype=np.float64).mean(axis=0)


def _sign(x: float) -> str:
    if np.isnan(x):
        return ""
    return "+" if x > 0 else "-" if x < 0 else "0"


def grid_evolution(steps: np.ndarray, q_max: np.ndarray, total_steps: int) -> Dict[str, object]:
    """
    Mean first difference of q_max over each third of training.

    A difference is assigned to the third containing its later step.
    """
    diffs = np.diff(q_max)
    later = steps[1:]
    bounds = [0, total_steps / 3.0, 2.0 * total_steps / 3.0, np.inf]
    out: Dict[str, object] = {}
    for k in range(3):
        mask = (later > bounds[k]) & (later <= bounds[k + 1])
        chunk = diffs[mask]
        chunk = chunk[~np.isnan(chunk)]
        out[f"third_{k + 1}"] = float(chunk.mean()) if chunk.size else np.nan
    out["pattern"] = ",".join(_sign(out[f"third_{k + 1}"]) for k in range(3))
    out["expand_then_contract"] = bool(out["third_1"] > 0 and out["third_3"] < 0)
    return out


def _check_compatible(configs: Sequence[ExperimentConfig]) -> None:
    if not configs:
        raise ConfigError("compare needs at least one config")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError(f"config names must be distinct, got {names}")
    ref = configs[0]
    for c in configs[1:]:
        if c.problem.model_dump() != ref.problem.model_dump():
            raise ConfigError(f"config {c.name!r} uses a different problem than {ref.name!r}")
        if c.total_steps != ref.total_steps:
            raise ConfigError(f"config {c.name!r} has T={c.total_steps}, {ref.name!r} has T={ref.total_steps}")
        if c.resolved_eval_every != ref.resolved_eval_every:
            raise ConfigError(f"config {c.name!r} logs at a different cadence than {ref.name!r}")


def compare_methods(
    configs: Sequence[ExperimentConfig],
    out,
    workers: Optional[int] = None,
) -> CompareResult:
    """
    Run every config and align their seed-mean metrics by step.

    Writes ``out`` with columns step and <name>.<metric> for each method
    (metrics: train_loss, eval_metric, objective_gap, quantized_fraction,
    inv_slope, q_max), plus ``<stem>_grid_summary.csv`` next to it. Per-run
    outputs go to ``<stem>_runs/``.

    Raises:
        ConfigError: if the configs do not share problem, T and cadence
    """
    _check_compatible(configs)
    out = Path(out)
    runs_root = out.parent / f"{out.stem}_runs"

    runs: Dict[str, RunResult] = {}
    columns: Dict[str, np.ndarray] = {}
    grid_rows: List[dict] = []
    steps = None
    for config in configs:
        result = run(config, out_root=runs_root, workers=workers)
        runs[config.name] = result
        summary = result.summary
        if steps is None:
            steps = summary["step"].to_numpy()
            columns["step"] = steps
        for metric in COMPARE_METRICS:
            columns[f"{config.name}.{metric}"] = summary[f"{metric}_mean"].to_numpy()
        q_max = q_max_series(list(result.traces.values()))
        columns[f"{config.name}.q_max"] = q_max
        grid_rows.append({"method": config.name, **grid_evolution(steps, q_max, config.total_steps)})

    frame = pd.DataFrame(columns)
    grid_summary = pd.DataFrame(grid_rows, columns=["method", "third_1", "third_2", "third_3", "pattern", "expand_then_contract"])
    grid_path = out.parent / f"{out.stem}_grid_summary.csv"
    write_frame(frame, out)
    write_frame(grid_summary, grid_path)
    logger.info("compared {} methods; aligned table in {}", len(configs), out)
    return CompareResult(frame=frame, grid_summary=grid_summary, runs=runs, out_path=out, grid_summary_path=grid_path)
