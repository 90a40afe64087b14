"""
Piecewise-affine regularization (PAR).

    Psi(w) = max_k { a_k (|w| - q_k) + b_k },  0 <= a_0 < ... < a_{m-1} < a_m = +inf

Provides evaluation, the exact subdifferential, the closed-form proximal map,
a stationarity checker, and the soft quantization maps used by PARQ and
BinaryRelax. The regularization strength lambda is stored on the regularizer
but every proximal map takes one combined ``scale`` (e.g. gamma_t * lambda),
so lambda is multiplied in exactly one place: ``ParRegularizer.prox_scale``.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Union

import numpy as np

from parqlab.core.quantgrid import QuantGrid, hard_quantize
from parqlab.errors import DomainError, InvalidArgumentError

INF = math.inf


class Regularizer(Protocol):
    """What the AProx and Prox-SGD steps need from a regularizer."""

    lam: float

    def prox_scale(self, step: float) -> float: ...

    def prox(self, scale: float, u) -> np.ndarray: ...

    def eval(self, w) -> float: ...

    def grid(self) -> QuantGrid: ...


@dataclass(frozen=True)
class SubgradientInterval:
    """Closed interval [lo, hi]; either end may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidArgumentError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def contains(self, g: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= g <= self.hi + tol


@dataclass(frozen=True)
class ParRegularizer:
    """
    Symmetric convex piecewise-affine regularizer.

    Attributes:
        q: Breakpoints [0 = q_0 < q_1 < ... < q_m]
        a: Finite slopes [a_0 < ... < a_{m-1}]; a_m = +inf is implicit
        lam: Regularization strength lambda > 0
        b: Offsets [b_0 = 0, ..., b_m]; derived from q and a
    """

    q: np.ndarray
    a: np.ndarray
    lam: float = 1.0
    b: np.ndarray = field(default=None)

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64).reshape(-1)
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        if q.size < 2:
            raise InvalidArgumentError("PAR needs at least one positive breakpoint")
        if q[0] != 0.0 or not np.all(np.diff(q) > 0):
            raise InvalidArgumentError(f"breakpoints must satisfy 0 = q_0 < q_1 < ..., got {q.tolist()}")
        if a.size != q.size - 1:
            raise InvalidArgumentError(f"expected {q.size - 1} finite slopes, got {a.size}")
        if not np.all(np.isfinite(a)) or a[0] < 0 or not np.all(np.diff(a) > 0):
            raise InvalidArgumentError(f"slopes must satisfy 0 <= a_0 < a_1 < ... < inf, got {a.tolist()}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")

        b = np.zeros_like(q)
        for k in range(1, q.size):
            b[k] = b[k - 1] + a[k - 1] * (q[k] - q[k - 1])
        if self.b is not None:
            given = np.asarray(self.b, dtype=np.float64).reshape(-1)
            if given.shape != b.shape or not np.allclose(given, b, rtol=1e-12, atol=1e-12):
                raise InvalidArgumentError(f"offsets {given.tolist()} disagree with recurrence {b.tolist()}")

        for arr in (q, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return int(self.q.size - 1)

    @property
    def q_max(self) -> float:
        return float(self.q[-1])

    def prox_scale(self, step: float) -> float:
        """Combined prox scale for a step (or aggregate step) size."""
        return float(step) * self.lam

    def eval(self, w) -> float:
        return par_eval(self, w)

    def prox(self, scale: float, u) -> np.ndarray:
        return prox(self, scale, u)

    def grid(self) -> QuantGrid:
        """Signed target set: +-q_k, plus 0 when a_0 > 0."""
        levels = self.q[1:]
        return QuantGrid.symmetric_from_levels(levels, include_zero=bool(self.a[0] > 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParRegularizer):
            return NotImplemented
        return (
            self.lam == other.lam
            and np.array_equal(self.q, other.q)
            and np.array_equal(self.a, other.a)
        )

    def __hash__(self) -> int:
        return hash((self.lam, self.q.tobytes(), self.a.tobytes()))


@dataclass(frozen=True)
class IndicatorRegularizer:
    """
    Indicator of a grid: 0 on the grid, +inf elsewhere.

    Its proximal map is hard quantization for every scale, so AProx with this
    regularizer is BinaryConnect.
    """

    target: QuantGrid
    lam: float = 1.0

    def prox_scale(self, step: float) -> float:
        return float(step) * self.lam

    def eval(self, w) -> float:
        w = np.asarray(w, dtype=np.float64)
        on_grid = np.isin(w, self.target.values)
        return 0.0 if bool(np.all(on_grid)) else INF

    def prox(self, scale: float, u) -> np.ndarray:
        if scale <= 0:
            raise InvalidArgumentError(f"prox scale must be positive, got {scale}")
        return hard_quantize(u, self.target)

    def grid(self) -> QuantGrid:
        return self.target


def par_from_grid(grid: QuantGrid, lam: float) -> ParRegularizer:
    """
    PAR whose scaled-input limit reproduces hard quantization onto ``grid``.

    Sets lambda * a_k = (q_k + q_{k+1}) / 2; a_0 = 0 when 0 is not in the grid.

    Args:
        grid: Symmetric target set with at least two values
        lam: Regularization strength
    """
    if len(grid) < 2:
        raise InvalidArgumentError("par_from_grid needs a grid with at least two values")
    if not grid.symmetric:
        raise InvalidArgumentError("par_from_grid needs a symmetric grid")
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    q = np.concatenate([[0.0], grid.levels])
    a = 0.5 * (q[:-1] + q[1:]) / lam
    if not grid.contains_zero:
        a[0] = 0.0
    return ParRegularizer(q=q, a=a, lam=lam)


def par_eval(reg: ParRegularizer, w) -> float:
    """
    lambda * sum_i Psi(w_i); +inf as soon as one |w_i| exceeds q_m.
    """
    x = np.abs(np.asarray(w, dtype=np.float64)).reshape(-1)
    if x.size == 0:
        return 0.0
    if np.any(x > reg.q_max):
        return INF
    pieces = reg.a[None, :] * (x[:, None] - reg.q[None, :-1]) + reg.b[None, :-1]
    return float(reg.lam * np.sum(np.max(pieces, axis=1)))


def subdifferential(reg: ParRegularizer, w: float) -> SubgradientInterval:
    """
    Exact subdifferential of lambda * Psi at a scalar point.

    Raises:
        DomainError: if |w| > q_m
    """
    w = float(w)
    x = abs(w)
    if x > reg.q_max:
        raise DomainError(f"|w| = {x} exceeds q_m = {reg.q_max}")
    lam, a, q = reg.lam, reg.a, reg.q
    if x == 0.0:
        return SubgradientInterval(-lam * a[0], lam * a[0])

    k = int(np.searchsorted(q, x, side="left"))
    if q[k] == x:
        lo = lam * a[k - 1]
        hi = lam * a[k] if k < reg.m else INF
    else:
        lo = hi = lam * a[k - 1]
    if w > 0:
        return SubgradientInterval(lo, hi)
    return SubgradientInterval(-hi, -lo)


def check_stationarity(reg: ParRegularizer, w, grad, tol: float = 1e-6) -> np.ndarray:
    """
    Element-wise test of 0 in grad f(w) + lambda * dPsi(w).

    Args:
        reg: Regularizer
        w: Candidate point
        grad: Gradient of the smooth part at ``w``
        tol: Widening applied to both ends of each subdifferential interval

    Returns:
        Boolean array, True where the optimality condition holds
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    grad = np.asarray(grad, dtype=np.float64).reshape(-1)
    if w.shape != grad.shape:
        raise InvalidArgumentError(f"w has shape {w.shape} but grad has {grad.shape}")
    return np.array(
        [subdifferential(reg, wi).contains(-gi, tol) for wi, gi in zip(w, grad)],
        dtype=bool,
    )


def _prox_knots(reg: ParRegularizer, scale: float) -> np.ndarray:
    # [A_0 + q_0, A_0 + q_1, A_1 + q_1, A_1 + q_2, ..., A_{m-1} + q_m]
    A = scale * reg.a
    return np.stack([A + reg.q[:-1], A + reg.q[1:]], axis=1).reshape(-1)


def prox(reg: ParRegularizer, scale: float, u) -> np.ndarray:
    """
    Closed-form proximal map of ``scale * Psi`` (lambda is NOT applied here).

    Flat pieces return sgn(u) q_k exactly; slanted pieces return
    u - sgn(u) * scale * a_k; everything beyond scale * a_{m-1} + q_m is
    clipped to sgn(u) q_m.
    """
    if not scale > 0:
        raise InvalidArgumentError(f"prox scale must be positive, got {scale}")
    u = np.asarray(u, dtype=np.float64)
    x = np.abs(u)
    knots = _prox_knots(reg, scale)
    seg = np.searchsorted(knots, x, side="right")

    # even segment 2k -> flat at q_k; odd segment 2k+1 -> slanted with slope index k
    k = seg // 2
    slanted = (seg % 2) == 1
    flat_val = reg.q[np.minimum(k, reg.m)]
    slope_idx = np.minimum(k, reg.m - 1)
    slant_val = x - scale * reg.a[slope_idx]
    mag = np.where(slanted, slant_val, flat_val)
    return np.sign(u) * mag


def threshold_map(reg: ParRegularizer, x) -> np.ndarray:
    """
    Limit of prox(reg, gamma * lambda, gamma * x) as gamma -> inf.

    Hard quantization onto {q_k} with jumps at lambda * a_k.
    """
    x = np.asarray(x, dtype=np.float64)
    jumps = reg.lam * reg.a
    k = np.searchsorted(jumps, np.abs(x), side="right")
    return np.sign(x) * reg.q[k]


def _check_values_slope(grid: QuantGrid, slope: float, minimum: float, name: str) -> None:
    if grid is None or len(grid) == 0:
        raise InvalidArgumentError(f"{name} needs a non-empty grid")
    if math.isnan(slope) or slope < minimum:
        raise InvalidArgumentError(f"{name} slope must be >= {minimum}, got {slope}")


def prox_parq(u, grid: QuantGrid, slope: float) -> np.ndarray:
    """
    Soft quantization map of PARQ.

    Between adjacent grid values v_j < v_{j+1} (midpoint m_j) a slanted piece
    of slope ``slope`` maps [m_j - gap/(2 slope), m_j + gap/(2 slope)] onto
    [v_j, v_{j+1}]; other inputs go flat to the nearest value and inputs
    beyond the extremes are clipped. slope = 1 is the clipped identity,
    slope = inf is hard quantization.
    """
    _check_values_slope(grid, slope, 1.0, "prox_parq")
    u = np.asarray(u, dtype=np.float64)
    hard = hard_quantize(u, grid)
    if math.isinf(slope) or len(grid) == 1:
        return hard

    values = grid.values
    hi_idx = np.clip(np.searchsorted(values, u, side="right"), 1, values.size - 1)
    lo_v = values[hi_idx - 1]
    hi_v = values[hi_idx]
    mid = 0.5 * (lo_v + hi_v)
    half = 0.5 * (hi_v - lo_v) / slope
    inside = (np.abs(u - mid) < half) & (u > values[0]) & (u < values[-1]) & (hard != u)
    soft = np.clip(mid + slope * (u - mid), lo_v, hi_v)
    return np.where(inside, soft, hard)


def prox_binaryrelax(u, grid: QuantGrid, slope: float) -> np.ndarray:
    """
    BinaryRelax map w = (rho * Q(u) + u) / (rho + 1).

    rho = 0 is the identity, rho = inf is hard quantization.
    """
    _check_values_slope(grid, slope, 0.0, "prox_binaryrelax")
    u = np.asarray(u, dtype=np.float64)
    hard = hard_quantize(u, grid)
    if math.isinf(slope):
        return hard
    weight = slope / (1.0 + slope)
    return u + weight * (hard - u)


class ProxKind(str, Enum):
    PAR = "par"
    HARD = "hard"
    PARQ = "parq"
    BINARYRELAX = "binaryrelax"


@dataclass(frozen=True)
class ProxOperator:
    """
    One element-wise map of the prox family, frozen with its parameters.

    Attributes:
        kind: Which map
        grid: Target grid (hard, parq, binaryrelax); per-row grids for row-wise use
        reg: Regularizer for kind=par (a ParRegularizer or IndicatorRegularizer)
        scale: Combined prox scale for kind=par
        slope: rho for parq / binaryrelax
    """

    kind: ProxKind
    grid: Optional[Union[QuantGrid, tuple]] = None
    reg: Optional[Regularizer] = None
    scale: float = 1.0
    slope: float = 1.0

    def _apply_one(self, u: np.ndarray, grid: Optional[QuantGrid]) -> np.ndarray:
        if self.kind is ProxKind.PAR:
            return self.reg.prox(self.scale, u)
        if self.kind is ProxKind.HARD:
            return hard_quantize(u, grid)
        if self.kind is ProxKind.PARQ:
            return prox_parq(u, grid, self.slope)
        return prox_binaryrelax(u, grid, self.slope)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if isinstance(self.grid, tuple):
            if u.ndim != 2 or u.shape[0] != len(self.grid):
                raise InvalidArgumentError(
                    f"{len(self.grid)} row grids cannot be applied to shape {u.shape}"
                )
            return np.stack([self._apply_one(row, g) for row, g in zip(u, self.grid)])
        return self._apply_one(u, self.grid)
