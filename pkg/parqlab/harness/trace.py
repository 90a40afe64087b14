"""
Trace records and their CSV format.

Every trace CSV has the fixed header

    step,train_loss,eval_metric,objective_gap,quantized_fraction,gamma,eta,inv_slope,bound_value,q_values

with '.' decimals, '\\n' line endings and floats printed with 17 significant
digits. objective_gap and bound_value are empty when unknown; q_values holds
the positive grid values of the tracked group joined by ';'.
"""

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from parqlab.errors import ParqLabError

TRACE_COLUMNS = [
    "step",
    "train_loss",
    "eval_metric",
    "objective_gap",
    "quantized_fraction",
    "gamma",
    "eta",
    "inv_slope",
    "bound_value",
    "q_values",
]
NUMERIC_COLUMNS = TRACE_COLUMNS[1:-1]
FLOAT_FORMAT = "%.17g"


def bound_value(G: float, R: float, t: int) -> float:
    """G R (2 + 1.5 ln t) / sqrt(t)."""
    return G * R * (2.0 + 1.5 * math.log(t)) / math.sqrt(t)


def format_q_values(levels: Iterable[float]) -> str:
    return ";".join(format(float(v), ".17g") for v in levels)


def parse_q_values(text) -> np.ndarray:
    if not isinstance(text, str) or not text:
        return np.zeros(0)
    return np.array([float(v) for v in text.split(";")])


@dataclass
class TraceRecord:
    step: int
    train_loss: float
    eval_metric: float
    objective_gap: float
    quantized_fraction: float
    gamma: float
    eta: float
    inv_slope: float
    bound_value: float
    q_values: str


class ExperimentTrace:
    """
    Ordered records of one run (one seed, last or average iterate).

    Args:
        records: TraceRecords or an existing DataFrame with TRACE_COLUMNS
        seed: Run seed (informational)
    """

    def __init__(self, records=None, seed: Optional[int] = None):
        if isinstance(records, pd.DataFrame):
            frame = records
        else:
            frame = pd.DataFrame([asdict(r) for r in records or []], columns=TRACE_COLUMNS)
        self.frame = self._normalize(frame)
        self.seed = seed

    @staticmethod
    def _normalize(frame: pd.DataFrame) -> pd.DataFrame:
        missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
        if missing:
            raise ParqLabError(f"trace is missing columns {missing}")
        frame = frame[TRACE_COLUMNS].copy()
        frame["step"] = frame["step"].astype(np.int64)
        for col in NUMERIC_COLUMNS:
            frame[col] = frame[col].astype(np.float64)
        frame["q_values"] = frame["q_values"].fillna("").astype(str)
        if len(frame) > 1 and not bool((frame["step"].diff().iloc[1:] > 0).all()):
            raise ParqLabError("trace steps must be strictly increasing")
        return frame.reset_index(drop=True)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def final(self) -> pd.Series:
        return self.frame.iloc[-1]

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return path

    @classmethod
    def read(cls, path) -> "ExperimentTrace":
        path = Path(path)
        try:
            frame = pd.read_csv(path, dtype={"q_values": str}, keep_default_na=False, na_values={c: [""] for c in NUMERIC_COLUMNS})
        except FileNotFoundError as e:
            raise ParqLabError(f"{path}: trace file not found") from e
        except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
            raise ParqLabError(f"{path}: cannot parse trace: {e}") from e
        return cls(frame)


def write_frame(frame: pd.DataFrame, path) -> Path:
    """Write any result table in the trace CSV dialect."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def summarize(traces: Sequence[ExperimentTrace]) -> pd.DataFrame:
    """
    Per-step mean, standard deviation and standard error across seeds.

    std uses ddof=1 (0 for a single seed); sem = std / sqrt(n_seeds).
    All traces must log the same steps.
    """
    if not traces:
        raise ParqLabError("cannot summarize an empty set of traces")
    steps = traces[0].frame["step"].to_numpy()
    for tr in traces[1:]:
        if not np.array_equal(tr.frame["step"].to_numpy(), steps):
            raise ParqLabError("traces log different steps and cannot be aligned")
    n = len(traces)
    stacked = np.stack([tr.frame[NUMERIC_COLUMNS].to_numpy() for tr in traces])

    columns = {"step": steps}
    for j, col in enumerate(NUMERIC_COLUMNS):
        values = stacked[:, :, j]
        mean = values.mean(axis=0)
        std = values.std(axis=0, ddof=1) if n > 1 else np.zeros_like(mean)
        columns[f"{col}_mean"] = mean
        columns[f"{col}_std"] = std
        columns[f"{col}_sem"] = std / math.sqrt(n)
    columns["n_seeds"] = np.full(steps.shape, n, dtype=np.int64)
    return pd.DataFrame(columns)


def summary_columns() -> List[str]:
    cols = ["step"]
    for col in NUMERIC_COLUMNS:
        cols += [f"{col}_mean", f"{col}_std", f"{col}_sem"]
    return cols + ["n_seeds"]
