"""
Quantization target sets.

A QuantGrid is a finite, strictly increasing set of reals such as
{0, +-q_1, ..., +-q_m}. Hard quantization maps every entry of a vector to
its nearest grid value.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from parqlab.errors import InvalidArgumentError


def _as_vector(u) -> np.ndarray:
    return np.asarray(u, dtype=np.float64)


@dataclass(frozen=True)
class QuantGrid:
    """
    Finite set of quantization values.

    Attributes:
        values: Strictly increasing signed values, e.g. [-q_m, ..., -q_1, 0, q_1, ..., q_m]
        symmetric: Whether the set is closed under negation
    """

    values: np.ndarray
    symmetric: bool = False
    _thresholds: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise InvalidArgumentError("QuantGrid needs at least one value")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("QuantGrid values must be finite")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise InvalidArgumentError(
                f"QuantGrid values must be strictly increasing, got {values.tolist()}"
            )
        # -0.0 and 0.0 are the same grid point
        values = values + 0.0
        if self.symmetric and not np.array_equal(values, -values[::-1]):
            raise InvalidArgumentError(
                f"QuantGrid flagged symmetric but {values.tolist()} is not closed under negation"
            )
        values.setflags(write=False)
        thresholds = 0.5 * (values[:-1] + values[1:])
        thresholds.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_thresholds", thresholds)

    @classmethod
    def from_values(cls, values: Sequence[float], symmetric: Optional[bool] = None) -> "QuantGrid":
        """
        Build a grid from an unordered collection, dropping duplicates.

        Args:
            values: Grid values in any order
            symmetric: Force the flag; inferred from the values when None
        """
        arr = np.unique(np.asarray(values, dtype=np.float64) + 0.0)
        if symmetric is None:
            symmetric = bool(arr.size > 0 and np.array_equal(arr, -arr[::-1]))
        return cls(arr, symmetric=symmetric)

    @classmethod
    def symmetric_from_levels(cls, levels: Sequence[float], include_zero: bool = True) -> "QuantGrid":
        """Build {0?, +-levels} from positive magnitudes."""
        pos = np.asarray(levels, dtype=np.float64)
        if np.any(pos <= 0):
            raise InvalidArgumentError("levels must be positive")
        parts = [-pos, pos]
        if include_zero:
            parts.append(np.zeros(1))
        return cls.from_values(np.concatenate(parts), symmetric=True)

    @property
    def thresholds(self) -> np.ndarray:
        """Midpoints between adjacent values."""
        return self._thresholds

    @property
    def contains_zero(self) -> bool:
        return bool(np.any(self.values == 0.0))

    @property
    def levels(self) -> np.ndarray:
        """Positive magnitudes q_1 < ... < q_m."""
        return self.values[self.values > 0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __len__(self) -> int:
        return int(self.values.size)

    def __contains__(self, item) -> bool:
        return bool(np.any(self.values == float(item)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantGrid):
            return NotImplemented
        return self.symmetric == other.symmetric and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.symmetric, self.values.tobytes()))


def hard_quantize(u, grid: QuantGrid) -> np.ndarray:
    """
    Map every entry of ``u`` to its nearest grid value.

    Ties at a midpoint go to the value of larger magnitude; a tie at zero
    (grid without 0) goes to the positive side.

    Args:
        u: Input vector (any shape)
        grid: Target set

    Returns:
        Array of the same shape whose entries all belong to ``grid.values``
    """
    if grid is None or len(grid) == 0:
        raise InvalidArgumentError("hard_quantize needs a non-empty grid")
    u = _as_vector(u)
    values = grid.values
    if values.size == 1:
        return np.full_like(u, values[0])
    thresholds = grid.thresholds
    upper = np.searchsorted(thresholds, u, side="right")
    lower = np.searchsorted(thresholds, u, side="left")
    idx = np.where(u >= 0, upper, lower)
    return values[idx]


def quantized_fraction(w, grid: QuantGrid, tol: float = 0.0) -> float:
    """
    Fraction of entries lying within ``tol`` of some grid value.

    Args:
        w: Vector to inspect
        grid: Target set
        tol: Absolute tolerance (>= 0)
    """
    if tol < 0:
        raise InvalidArgumentError(f"tol must be >= 0, got {tol}")
    w = _as_vector(w)
    if w.size == 0:
        return 1.0
    dist = np.abs(w - hard_quantize(w, grid))
    return float(np.count_nonzero(dist <= tol)) / w.size
