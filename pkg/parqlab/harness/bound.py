"""
Last-iterate convergence bound check.

Compares the seed-averaged objective gap against
G R (2 + 1.5 ln t) / sqrt(t). The expectation in the bound is approximated
by the mean over seeds, so the report carries the standard error and the
seed count; a flag means the mean exceeded the bound, not that a single
seed did.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from parqlab.errors import InvalidArgumentError, OracleUnavailableError
from parqlab.harness.trace import NUMERIC_COLUMNS, ExperimentTrace, bound_value, summarize

TraceLike = Union[ExperimentTrace, str, Path]


@dataclass
class BoundReport:
    """
    Attributes:
        frame: step, gap_mean, gap_sem, bound, margin, flagged
        n_seeds: Number of traces averaged
        G, R: Constants the bound was evaluated with
        min_step: First step that can be flagged
    """

    frame: pd.DataFrame
    n_seeds: int
    G: float
    R: float
    min_step: int
    column: str = "objective_gap"

    @property
    def violated(self) -> bool:
        return bool(self.frame["flagged"].any())

    @property
    def n_flagged(self) -> int:
        return int(self.frame["flagged"].sum())

    @property
    def worst(self) -> pd.Series:
        """Row with the smallest margin among checked steps."""
        checked = self.frame[self.frame["step"] >= self.min_step]
        if checked.empty:
            checked = self.frame
        return checked.loc[checked["margin"].idxmin()]


def _load(trace: TraceLike) -> ExperimentTrace:
    return trace if isinstance(trace, ExperimentTrace) else ExperimentTrace.read(trace)


def check_bound(
    traces: Sequence[TraceLike],
    G: float,
    R: float,
    min_step: int = 10,
    column: str = "objective_gap",
) -> BoundReport:
    """
    Check the seed-mean of ``column`` against the bound at every logged step.

    Args:
        traces: Per-seed traces (objects or CSV paths) logging the same steps
        G: Lipschitz constant
        R: Distance bound
        min_step: Steps below this are reported but never flagged
        column: Trace column holding the gap

    Raises:
        OracleUnavailableError: if the traces carry no gap values
    """
    if not G > 0 or not R > 0:
        raise InvalidArgumentError(f"G and R must be positive, got G={G}, R={R}")
    if column not in NUMERIC_COLUMNS:
        raise InvalidArgumentError(f"unknown trace column {column!r}")
    loaded = [_load(t) for t in traces]
    if not loaded:
        raise InvalidArgumentError("check_bound needs at least one trace")
    for tr in loaded:
        if tr.frame[column].isna().any():
            raise OracleUnavailableError(f"trace has no {column} values; the run had no optimum oracle")

    summary = summarize(loaded)
    steps = summary["step"].to_numpy()
    bound = np.array([bound_value(G, R, int(t)) for t in steps])
    mean = summary[f"{column}_mean"].to_numpy()
    frame = pd.DataFrame(
        {
            "step": steps,
            "gap_mean": mean,
            "gap_sem": summary[f"{column}_sem"].to_numpy(),
            "bound": bound,
            "margin": bound - mean,
            "flagged": (steps >= min_step) & (mean > bound),
        }
    )
    report = BoundReport(frame=frame, n_seeds=len(loaded), G=G, R=R, min_step=min_step, column=column)
    if report.violated:
        logger.warning("bound violated at {} of {} logged steps ({} seeds)", report.n_flagged, len(frame), len(loaded))
    else:
        logger.info("bound holds at all {} logged steps ({} seeds)", len(frame), len(loaded))
    return report
