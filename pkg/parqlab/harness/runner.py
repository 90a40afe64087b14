"""
Experiment runner.

For every seed: evaluate the stochastic gradient at w, step the optimizer,
and log a record every ``eval_every`` steps plus the final step. Seeds are
independent and fan out to a process pool; results are merged in seed order
so parallel and serial runs write identical files.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from parqlab.errors import ConfigError, DivergenceError, OracleUnavailableError
from parqlab.harness.config import ExperimentConfig
from parqlab.harness.trace import (
    ExperimentTrace,
    TraceRecord,
    bound_value,
    format_q_values,
    summarize,
    write_frame,
)
from parqlab.optim.optimizer import GroupedOptimizer
from parqlab.optim.schedules import StepSchedule
from parqlab.problems import Problem, estimate_lipschitz, regularized_optimum
from parqlab.problems.rng import sample_seed
from parqlab.utils.settings import get_settings


@dataclass(frozen=True)
class RunContext:
    """Per-config quantities shared by every seed."""

    step_schedule: StepSchedule
    f_star: Optional[float] = None
    w_star: Optional[tuple] = None
    G: Optional[float] = None
    R: Optional[float] = None

    @property
    def has_optimum(self) -> bool:
        return self.f_star is not None

    @property
    def has_bound(self) -> bool:
        return self.G is not None and self.R is not None


@dataclass
class SeedResult:
    seed: int
    trace: ExperimentTrace
    average: Optional[ExperimentTrace]
    final_w: np.ndarray
    diverged_at: Optional[int] = None


@dataclass
class RunResult:
    """Everything one call to ``run`` produced."""

    config: ExperimentConfig
    out_dir: Path
    context: RunContext
    traces: Dict[int, ExperimentTrace] = field(default_factory=dict)
    average_traces: Dict[int, ExperimentTrace] = field(default_factory=dict)
    summary: Optional[pd.DataFrame] = None
    summary_average: Optional[pd.DataFrame] = None
    final_w: Dict[int, np.ndarray] = field(default_factory=dict)


def prepare(config: ExperimentConfig, problem: Optional[Problem] = None) -> RunContext:
    """
    Solve for the optimum (when an oracle exists), then resolve G, R and the step schedule.

    R defaults to the largest ||w0 - w*|| over the configured seeds.
    """
    problem = problem or config.problem.build()
    reg = config.optimizer.oracle_regularizer()

    f_star = w_star = None
    try:
        w_opt, f_star = regularized_optimum(problem, reg)
        w_star = tuple(float(v) for v in w_opt)
    except OracleUnavailableError as e:
        logger.info("no optimum oracle: {}", e)

    G = config.lipschitz_G
    if G is None:
        G = estimate_lipschitz(problem, reg)

    R = config.radius_R
    if R is None and w_star is not None:
        target = np.asarray(w_star)
        R = max(float(np.linalg.norm(problem.initial_point(s) - target)) for s in config.seeds)
        if R == 0.0:
            R = None

    schedule = config.step_schedule
    if schedule.theorem_base:
        if R is None:
            raise ConfigError("theorem_base needs R: set radius_R or use a problem with an optimum oracle")
        schedule = StepSchedule.theorem(R, G)
        logger.info("step size base set to R/(2G) = {:.6g}", schedule.base)
    return RunContext(step_schedule=schedule, f_star=f_star, w_star=w_star, G=G, R=R)


def _record(
    problem: Problem,
    opt: GroupedOptimizer,
    config: ExperimentConfig,
    ctx: RunContext,
    w: np.ndarray,
    t: int,
    eta: float,
    inv_slope: float,
) -> TraceRecord:
    reg = config.optimizer.oracle_regularizer()
    finite = bool(np.all(np.isfinite(w)))
    loss = problem.full_loss(w) if finite else math.nan
    gap = math.nan
    if ctx.has_optimum and finite:
        gap = problem.objective(w, reg) - ctx.f_star
    return TraceRecord(
        step=t,
        train_loss=loss,
        eval_metric=problem.evaluate(w) if finite else math.nan,
        objective_gap=gap,
        quantized_fraction=opt.quantized_fraction(config.quantized_tol, w=w) if finite else math.nan,
        gamma=opt.gamma,
        eta=eta,
        inv_slope=inv_slope,
        bound_value=bound_value(ctx.G, ctx.R, t) if ctx.has_bound else math.nan,
        q_values=format_q_values(opt.tracked_levels()) if finite else "",
    )


def run_seed(config: ExperimentConfig, ctx: RunContext, seed: int, problem: Optional[Problem] = None) -> SeedResult:
    """Run one seed to completion (or to the first non-finite iterate)."""
    problem = problem or config.problem.build()
    opt = config.optimizer.build(problem)
    opt.init(problem.initial_point(seed))
    T = config.total_steps
    every = config.resolved_eval_every
    track_average = config.track_average and ctx.has_optimum

    records: List[TraceRecord] = []
    averages: List[TraceRecord] = []
    for t in range(1, T + 1):
        grad = problem.stochastic_grad(opt.w, sample_seed(seed, t))
        eta = ctx.step_schedule.eta(t)
        inv_slope = config.slope_schedule.inv_slope(t)
        slope = math.inf if inv_slope == 0.0 else 1.0 / inv_slope
        w = opt.step(grad, eta, slope)

        diverged = not np.all(np.isfinite(w))
        if t % every == 0 or t == T or diverged:
            rec = _record(problem, opt, config, ctx, w, t, eta, inv_slope)
            diverged = diverged or not math.isfinite(rec.train_loss)
            records.append(rec)
            if track_average:
                averages.append(_record(problem, opt, config, ctx, opt.average_iterate(), t, eta, inv_slope))
        if diverged:
            logger.warning("seed {} diverged at step {}", seed, t)
            return SeedResult(
                seed=seed,
                trace=ExperimentTrace(records, seed=seed),
                average=ExperimentTrace(averages, seed=seed) if track_average else None,
                final_w=w,
                diverged_at=t,
            )

    logger.debug("seed {} finished: final train_loss {:.6g}", seed, records[-1].train_loss)
    return SeedResult(
        seed=seed,
        trace=ExperimentTrace(records, seed=seed),
        average=ExperimentTrace(averages, seed=seed) if track_average else None,
        final_w=opt.w,
    )


def _run_seed_task(args) -> SeedResult:
    config, ctx, seed = args
    return run_seed(config, ctx, seed)


def _execute(config: ExperimentConfig, ctx: RunContext, problem: Problem, workers: int) -> List[SeedResult]:
    seeds = list(config.seeds)
    if workers <= 1 or len(seeds) == 1:
        return [run_seed(config, ctx, s, problem=problem) for s in seeds]
    logger.info("running {} seeds on {} workers", len(seeds), min(workers, len(seeds)))
    with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
        return list(pool.map(_run_seed_task, [(config, ctx, s) for s in seeds]))


def _write_meta(path: Path, config: ExperimentConfig, ctx: RunContext) -> None:
    from parqlab import __version__

    meta = {
        "parqlab_version": __version__,
        "name": config.name,
        "seeds": list(config.seeds),
        "total_steps": config.total_steps,
        "eval_every": config.resolved_eval_every,
        "G": ctx.G,
        "R": ctx.R,
        "f_star": ctx.f_star,
        "w_star": list(ctx.w_star) if ctx.w_star is not None else None,
        "eta_base": ctx.step_schedule.base,
        "config": config.model_dump(mode="json"),
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(config: ExperimentConfig, out_root=None, workers: Optional[int] = None) -> RunResult:
    """
    Run every seed of ``config`` and write its outputs.

    Writes to ``<out_root>/<config.name>/``: seed_<s>.csv, seed_<s>_average.csv
    (when an optimum oracle exists), summary.csv, summary_average.csv and
    run_meta.json.

    Args:
        config: Validated experiment config
        out_root: Output root; defaults to config.output, then PARQLAB_OUTPUT_ROOT
        workers: Process count; defaults to PARQLAB_WORKERS

    Raises:
        DivergenceError: after all files are written, if any seed hit a non-finite loss
        OSError: on output failures, with the offending path
    """
    settings = get_settings()
    out_root = Path(out_root or config.output or settings.output_root)
    workers = workers or settings.workers
    out_dir = out_root / config.name

    logger.info(
        "run {!r}: {} on {}, T={}, seeds={}",
        config.name, config.optimizer.kind, config.problem.kind, config.total_steps, list(config.seeds),
    )
    problem = config.problem.build()
    ctx = prepare(config, problem)
    results = _execute(config, ctx, problem, workers)

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"{out_dir}: cannot create output directory ({e.strerror or e})") from e

    result = RunResult(config=config, out_dir=out_dir, context=ctx)
    for res in results:
        result.traces[res.seed] = res.trace
        result.final_w[res.seed] = res.final_w
        res.trace.write(out_dir / f"seed_{res.seed}.csv")
        if res.average is not None:
            result.average_traces[res.seed] = res.average
            res.average.write(out_dir / f"seed_{res.seed}_average.csv")
    _write_meta(out_dir / "run_meta.json", config, ctx)

    diverged = [r for r in results if r.diverged_at is not None]
    if diverged:
        first = diverged[0]
        raise DivergenceError(
            f"seed {first.seed} produced a non-finite loss at step {first.diverged_at}; "
            f"diagnostic record written to {out_dir / f'seed_{first.seed}.csv'}",
            step=first.diverged_at,
        )

    result.summary = summarize(list(result.traces.values()))
    write_frame(result.summary, out_dir / "summary.csv")
    if result.average_traces:
        result.summary_average = summarize(list(result.average_traces.values()))
        write_frame(result.summary_average, out_dir / "summary_average.csv")

    logger.info("run {!r} done; outputs in {}", config.name, out_dir)
    return result
